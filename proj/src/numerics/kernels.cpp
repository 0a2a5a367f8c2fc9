// SPDX-License-Identifier: Apache-2.0
#include "gemo/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gemo/errors.hpp"

namespace gemo {
namespace {

void require_product(const Matrix& a, const Matrix& b, std::size_t a_inner, std::size_t b_inner,
                     const char* what) {
  if (a_inner != b_inner) {
    throw DimensionError(std::string(what) + ": incompatible shapes " + a.shape_string() +
                         " and " + b.shape_string());
  }
}

// One output row of each product. The serial and parallel builds share these so
// the accumulation order per entry is identical.
inline void nn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  double* dst = out.row(i).data();
  const double* arow = a.row(i).data();
  for (std::size_t k = 0; k < inner; ++k) {
    const double av = arow[k];
    const double* brow = b.row(k).data();
    for (std::size_t j = 0; j < n; ++j) dst[j] += av * brow[j];
  }
}

inline void nt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  const std::size_t inner = a.cols();
  const double* arow = a.row(i).data();
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* brow = b.row(j).data();
    double acc = 0.0;
    for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
    out(i, j) = acc;
  }
}

// Row i of a^T * b: sum over k of a(k, i) * b(k, :).
inline void tn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  double* dst = out.row(i).data();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double av = a(k, i);
    const double* brow = b.row(k).data();
    for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += av * brow[j];
  }
}

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_product(a, b, a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) nn_row(a, b, out, i);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require_product(a, b, a.cols(), b.cols(), "matmul_nt");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) nt_row(a, b, out, i);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require_product(a, b, a.rows(), b.rows(), "matmul_tn");
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) tn_row(a, b, out, i);
  return out;
}

}  // namespace serial

namespace parallel {

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_product(a, b, a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
  const bool wide = a.rows() * a.cols() * b.cols() >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t i = 0; i < rows; ++i) nn_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require_product(a, b, a.cols(), b.cols(), "matmul_nt");
  Matrix out(a.rows(), b.rows());
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
  const bool wide = a.rows() * a.cols() * b.rows() >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t i = 0; i < rows; ++i) nt_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require_product(a, b, a.rows(), b.rows(), "matmul_tn");
  Matrix out(a.cols(), b.cols());
  const auto rows = static_cast<std::ptrdiff_t>(a.cols());
  const bool wide = a.rows() * a.cols() * b.cols() >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t i = 0; i < rows; ++i) tn_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

}  // namespace parallel

Matrix matmul(const Matrix& a, const Matrix& b) { return parallel::matmul(a, b); }
Matrix matmul_nt(const Matrix& a, const Matrix& b) { return parallel::matmul_nt(a, b); }
Matrix matmul_tn(const Matrix& a, const Matrix& b) { return parallel::matmul_tn(a, b); }

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("add: shapes " + a.shape_string() + " and " + b.shape_string());
  }
  Matrix out = a;
  auto dst = out.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

Matrix scale(const Matrix& m, double factor) {
  Matrix out = m;
  for (double& v : out.data()) v *= factor;
  return out;
}

Matrix row_log_softmax(const Matrix& m) {
  if (m.empty()) throw DimensionError("row_log_softmax: empty matrix " + m.shape_string());
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto in = m.row(i);
    auto dst = out.row(i);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (double v : in) total += std::exp(v - peak);
    const double log_norm = peak + std::log(total);
    for (std::size_t j = 0; j < in.size(); ++j) dst[j] = in[j] - log_norm;
  }
  return out;
}

Matrix row_softmax(const Matrix& m) {
  if (m.empty()) throw DimensionError("row_softmax: empty matrix " + m.shape_string());
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto in = m.row(i);
    auto dst = out.row(i);
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      dst[j] = std::exp(in[j] - peak);
      total += dst[j];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

Matrix mean_rows(const Matrix& seq) {
  if (seq.rows() == 0) throw EmptySequenceError("mean_rows: sequence has no rows");
  Matrix out(1, seq.cols());
  auto dst = out.row(0);
  for (std::size_t t = 0; t < seq.rows(); ++t) {
    auto r = seq.row(t);
    for (std::size_t j = 0; j < r.size(); ++j) dst[j] += r[j];
  }
  const double inv = 1.0 / static_cast<double>(seq.rows());
  for (double& v : dst) v *= inv;
  return out;
}

Matrix first_row(const Matrix& seq) {
  if (seq.rows() == 0) throw EmptySequenceError("first_row: sequence has no rows");
  return Matrix::row_vector(seq.row(0));
}

Matrix stack_rows(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("stack_rows: column mismatch " + parts.front().shape_string() +
                           " vs " + p.shape_string());
    }
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return Matrix(rows, cols, std::move(data));
}

double sum(const Matrix& m) {
  double total = 0.0;
  for (double v : m.data()) total += v;
  return total;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_abs_diff: shapes " + a.shape_string() + " and " + b.shape_string());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

}  // namespace gemo
