// SPDX-License-Identifier: Apache-2.0
#include "gemo/numerics/json_matrix.hpp"

#include <cmath>

#include "gemo/errors.hpp"

namespace gemo {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(nlohmann::json(std::vector<double>(r.begin(), r.end())));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : (j[0].is_array() ? j[0].size() : 0);
  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& r = j[i];
    if (!r.is_array()) throw ParseError(what + ": row " + std::to_string(i) + " is not an array");
    if (r.size() != cols) {
      throw ShapeError(what + ": row " + std::to_string(i) + " has " + std::to_string(r.size()) +
                       " columns, expected " + std::to_string(cols));
    }
    for (const auto& v : r) {
      if (!v.is_number()) throw ParseError(what + ": non-numeric entry");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw ParseError(what + ": non-finite entry");
      data.push_back(x);
    }
  }
  return Matrix(rows, cols, std::move(data));
}

}  // namespace gemo
