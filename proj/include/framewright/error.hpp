#pragma once

#include <stdexcept>
#include <string>

namespace framewright {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, violated invariants, unknown names.
class ValidationError : public Error {
public:
  using Error::Error;
};

class ParseError : public ValidationError {
public:
  ParseError(const std::string &what, std::string field)
      : ValidationError(what), field_(std::move(field)) {}
  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

// Optimizers or fits that did not converge.
class NumericalError : public Error {
public:
  NumericalError(const std::string &what, double best = 0.0)
      : Error(what), best_(best) {}
  double best() const noexcept { return best_; }

private:
  double best_;
};

} // namespace framewright
