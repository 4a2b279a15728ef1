#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace popnet {

// Precondition violated by a caller (bad index, bad probability, bad shape).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A value that is structurally well formed but breaks a data invariant,
// e.g. an asymmetric adjacency matrix.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Text input that cannot be parsed. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Bad key=value configuration (missing seed, burn_in >= iterations, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Floating point failure inside the sampler (non-PD precision, all -inf weights).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace popnet
