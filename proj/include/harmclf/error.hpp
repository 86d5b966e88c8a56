#pragma once

#include <stdexcept>
#include <string>

namespace harmclf {

/// Base of every error the library raises. The CLI maps subclasses onto
/// its exit-code contract (config/usage -> 2, divergence -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: malformed records, invalid labels, misaligned files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint file that cannot be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A loss term became non-finite during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace harmclf
