#pragma once

#include <stdexcept>

namespace qlstm {

/// Base type for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid bit-width or out-of-domain quantizer input.
struct QuantError : Error {
  using Error::Error;
};

/// Tensor or vector shape mismatch.
struct DimensionError : Error {
  using Error::Error;
};

/// Malformed file content (image, manifest, weight blob).
struct ParseError : Error {
  using Error::Error;
};

/// Dataset-level inconsistency: missing files, unknown symbols, empty set.
struct DatasetError : Error {
  using Error::Error;
};

/// Invalid precision or folding configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace qlstm
