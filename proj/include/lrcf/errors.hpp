#pragma once

#include <stdexcept>
#include <string>

namespace lrcf {

//! Base class for all library errors.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Bad arguments: shape mismatches, out-of-range indices, malformed options.
class invalid_argument : public error {
public:
  using error::error;
};

//! Problems with the data itself: unreadable input, degenerate columns,
//! insufficient observations, coverage failures.
class data_error : public error {
public:
  using error::error;
};

//! Numerical failures: singular systems, diverging iterations,
//! degenerate mixture components.
class numerical_error : public error {
public:
  using error::error;
};

} // namespace lrcf
