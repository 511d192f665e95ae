#pragma once

#include <stdexcept>

namespace fedkd {

// Base of every failure raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor or parameter extents that do not line up.
struct DimensionError : Error {
  using Error::Error;
};

// Scalar arguments outside their legal range (temperature <= 0, ...).
struct ParameterError : Error {
  using Error::Error;
};

// Invalid or empty data: labels out of range, empty datasets, non-finite values.
struct DataError : Error {
  using Error::Error;
};

// Bad experiment configuration: unknown keys, out-of-range values.
struct ConfigError : Error {
  using Error::Error;
};

// Round stages invoked out of order.
struct ProtocolError : Error {
  using Error::Error;
};

}  // namespace fedkd
