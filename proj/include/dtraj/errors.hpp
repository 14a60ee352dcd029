#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dtraj {

// Root of every error the library raises. The CLI maps each subclass onto
// a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or input files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A grid point violates joint or velocity limits.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// Corridor positions on or outside a wall, bad dimensions, and similar.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnknownState : public Error {
 public:
  using Error::Error;
};

class NumericalOverflow : public Error {
 public:
  using Error::Error;
};

// Configured search or enumeration cap was hit before completion.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Memory or term-count limits of a counting method.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class NoFeasibleTransition : public Error {
 public:
  NoFeasibleTransition(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace dtraj
