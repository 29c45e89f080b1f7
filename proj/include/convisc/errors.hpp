#pragma once

#include <stdexcept>
#include <string>

namespace convisc {

/// A computed quantity left its physically admissible range (w <= 0, ...).
class PhysicalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The boundary lift alone does not fit in the correctness ball.
class InfeasibleConstraint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient descent diverged; the message suggests a smaller step.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace convisc
