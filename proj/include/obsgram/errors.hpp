#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obsgram {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, mismatched dimensions, malformed spec files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A simulation produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// An enumeration would exceed its configured evaluation budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace obsgram
