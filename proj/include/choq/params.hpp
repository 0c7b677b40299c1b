#pragma once

#include <string>

#include "choq/errors.hpp"

namespace choq {

// Global problem parameters: dimension N >= 3 and exponent mu in (0, N).
// The critical exponent 2N-mu over N-2 is always recomputed, never stored.
struct ProblemParams {
  int dim = 3;
  double mu = 2.0;

  ProblemParams() = default;
  ProblemParams(int dim_, double mu_) : dim(dim_), mu(mu_) { validate(); }

  void validate() const {
    if (dim < 3) throw param_error("ProblemParams: need N >= 3, got N = " + std::to_string(dim));
    if (!(mu > 0.0 && mu < dim))
      throw param_error("ProblemParams: need 0 < mu < N, got mu = " + std::to_string(mu) +
                        ", N = " + std::to_string(dim));
  }

  double two_star_mu() const { return (2.0 * dim - mu) / (dim - 2); }

  // Sobolev critical exponent 2N/(N-2); the mu -> N limit of two_star_mu.
  double two_star() const { return 2.0 * dim / (dim - 2.0); }

  // True when mu is within 1e-6 of the delta-kernel limit mu = N.
  bool near_delta_limit() const { return mu > dim - 1e-6; }
};

}  // namespace choq
