#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "choq/params.hpp"

// The explicit two-parameter solution family ("bubbles"), the extremal of
// the sharp convolution inequality, the tangent fields of the solution
// manifold, and a least-squares fit of the classification form
//   c ( t / (t^2 + |x - x0|^2) )^{(N-2)/2}
// to scattered positive samples.

namespace choq {

using VecN = Eigen::VectorXd;

struct BubbleParams {
  double amplitude = 1.0;  // c
  double width = 1.0;      // t
  VecN center;             // xi / x0, N components

  BubbleParams() = default;
  BubbleParams(double c, double t, VecN xi);
  int dim() const { return static_cast<int>(center.size()); }
  void validate() const;

  // [N(N-2)]^{(N-2)/4} -- the amplitude that makes the standard bubble a
  // solution of the local critical equation.
  static double standard_amplitude(int dim);
  static BubbleParams standard(int dim, double t = 1.0);
};

// amplitude * ( t / (t^2 + |x-xi|^2) )^{(N-2)/2}
double eval_U0(const BubbleParams& b, const VecN& x);
// radial profile of the same about the center
double eval_U0_radial(const BubbleParams& b, int dim, double rho);

// The minimizer-family member: standard bubble times bubble_amplitude(p);
// b.amplitude is ignored.
double eval_Umu(const ProblemParams& p, const BubbleParams& b, const VecN& x);
double eval_Umu_radial(const ProblemParams& p, const BubbleParams& b, double rho);
// amplitude actually applied by eval_Umu (cached per (N, mu))
double umu_amplitude(const ProblemParams& p);

// A (gamma^2 + |x-a|^2)^{-(2N-mu)/2}
double hls_extremal(double gamma, const VecN& a, double A, const VecN& x, const ProblemParams& p);

// Analytic partial derivatives of eval_Umu (hand-differentiated closed
// forms; no numeric differentiation here so they can serve as independent
// checks on the spectral solver).
double tangent_dt(const ProblemParams& p, const BubbleParams& b, const VecN& x);
double tangent_di(const ProblemParams& p, const BubbleParams& b, const VecN& x, int axis);

// Radial profiles of the tangent fields about the center:
//   d/dt U_mu (rho)    -- the ell = 0 direction
//   d/drho U_mu (rho)  -- the ell = 1 radial factor of grad U
double tangent_dt_radial(const ProblemParams& p, const BubbleParams& b, double rho);
double tangent_dr_radial(const ProblemParams& p, const BubbleParams& b, double rho);

struct BubbleFit {
  BubbleParams params;
  double residual = 0.0;  // RMS of log(sample) - log(model)
  int iterations = 0;
};

// Least-squares fit of (c, t, x0) in log space (Gauss-Newton with
// Levenberg damping).  Requires >= N+3 strictly positive samples.
BubbleFit fit_bubble(const std::vector<std::pair<VecN, double>>& samples);

}  // namespace choq
