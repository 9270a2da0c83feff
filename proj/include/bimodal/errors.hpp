#pragma once

#include <stdexcept>
#include <string>

namespace bimodal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical parameter or configuration value is outside its admissible range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A control input lies outside [u_min, u_max].
class BoundViolation : public Error {
 public:
  using Error::Error;
};

/// Euler extraction requested too close to |pitch| = pi/2.
class GimbalLockError : public Error {
 public:
  using Error::Error;
};

/// A flat-output sample cannot be mapped to a state/input pair that respects the model.
class InfeasibleReference : public Error {
 public:
  InfeasibleReference(const std::string& what, long sample_index = -1)
      : Error(sample_index >= 0 ? what + " (sample " + std::to_string(sample_index) + ")" : what),
        sample_index_(sample_index) {}

  long sample_index() const { return sample_index_; }

 private:
  long sample_index_;
};

/// Numerical integration produced non-finite or runaway values.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The receding-horizon controller could not produce a usable input for too long.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace bimodal
