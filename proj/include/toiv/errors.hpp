#pragma once

#include <stdexcept>
#include <string>

namespace toiv {

//! Raised when the geometry or arithmetic of a step has no defined result
//! (coincident centers, division by zero, sqrt of a negative number).
class DegeneracyError : public std::runtime_error {
public:
  explicit DegeneracyError(const std::string& what, long step = -1)
      : std::runtime_error(step < 0 ? what : what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  long step() const noexcept { return step_; }

  DegeneracyError at_step(long step) const {
    DegeneracyError e(std::runtime_error::what(), step);
    return e;
  }

private:
  long step_;
};

//! Invalid configuration or malformed input document.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Loss or gradient became NaN/inf during optimization.
class NonFiniteError : public std::runtime_error {
public:
  NonFiniteError(const std::string& what, long iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

private:
  long iteration_;
};

} // namespace toiv
