#pragma once

#include <stdexcept>
#include <string>

namespace jsde {

// Base of every error the library throws. The CLI maps the concrete type
// to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown catalog key or preset name.
class CatalogError : public Error {
 public:
  using Error::Error;
};

// Argument outside an operation's documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A coefficient or intermediate quantity became non-finite at a finite state.
class NumericalDomainError : public Error {
 public:
  NumericalDomainError(const std::string& what, double state)
      : Error(what), state_(state) {}
  double state() const noexcept { return state_; }

 private:
  double state_;
};

// A requested value lies outside a tabulated or invertible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Quadrature failed to reach its tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

// Experiment work budget exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Configuration file or override problems; carries a position when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what
                       : what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace jsde
