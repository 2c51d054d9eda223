#pragma once

#include <stdexcept>
#include <string>

namespace mognm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Frame statistics are undefined (zero spread about the centre).
class DegenerateFrame : public Error {
 public:
  using Error::Error;
};

/// Power thresholds of the simple (b1,b2) detector are not strictly increasing.
class InvalidThresholds : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Monte Carlo fit too noisy for the requested analytic evaluation.
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mognm
