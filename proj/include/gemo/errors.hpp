// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gemo {

/// Base of every error raised by the library. Commands print what() and exit nonzero.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class EmptySequenceError : public Error { using Error::Error; };

class ParseError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class LabelError : public Error { using Error::Error; };
class EmptyDatasetError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class BatchError : public Error { using Error::Error; };
class PromptError : public Error { using Error::Error; };
class CheckpointError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

}  // namespace gemo
