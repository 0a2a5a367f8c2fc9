// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <string>

#include "gemo/numerics/matrix.hpp"

namespace gemo {

/// Nested row arrays. Doubles use shortest round-trip formatting, so a dump
/// followed by a parse reproduces every entry bit for bit.
nlohmann::json matrix_to_json(const Matrix& m);

/// Throws ParseError (mentioning `what`) on ragged, non-numeric or non-finite input.
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);

}  // namespace gemo
