#pragma once

#include <stdexcept>
#include <string>

namespace choq {

// Invalid (N, mu) or other parameter-domain violations.
class param_error : public std::domain_error {
 public:
  explicit param_error(const std::string& msg) : std::domain_error(msg) {}
};

// Grid construction / grid mismatch problems.
class grid_error : public std::invalid_argument {
 public:
  explicit grid_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Quadrature failed to converge or stabilize to the requested tolerance.
class quadrature_error : public std::runtime_error {
 public:
  explicit quadrature_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Nonlinear fit rejected its input or became singular.
class fit_error : public std::runtime_error {
 public:
  explicit fit_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solver diverged or ran out of iterations.  Carries a short
// diagnostic so callers can inspect the last iterate state.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& msg, double last_value, int iterations)
      : std::runtime_error(msg), last_value(last_value), iterations(iterations) {}
  double last_value;
  int iterations;
};

}  // namespace choq
