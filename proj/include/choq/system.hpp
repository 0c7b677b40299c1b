#pragma once

#include "choq/params.hpp"
#include "choq/radial.hpp"

// The equivalent integral system, the weak-form residual of the
// differential equation, the energy functional, the constrained Rayleigh
// quotient and its minimization, and a gauge-fixed fixed-point solver.

namespace choq {

enum class SystemNorm { paper, green };

// Positive solution pair (u, v) of
//   u = |x|^{2-N} * ( v u^{2*_mu - 1} ),    v = |x|^{-mu} * u^{2*_mu}
// sampled on a shared grid.  `paper` keeps the kernels bare as displayed;
// `green` scales the u-equation kernel by the Green constant.
struct SolutionPair {
  RadialFunction u, v;
  ProblemParams params;
  SystemNorm normalization = SystemNorm::paper;

  SolutionPair(RadialFunction u_, RadialFunction v_, ProblemParams p,
               SystemNorm norm = SystemNorm::paper);
};

struct SystemResidual {
  double res_u = 0.0;  // ||u - K_{N-2}[v u^{q-1}]||_2 / ||u||_2
  double res_v = 0.0;  // ||v - K_mu[u^q]||_2 / ||v||_2
};

SystemResidual system_residual(const SolutionPair& sp);

// Amplitude b such that b (t/(t^2+r^2))^{(N-2)/2} closes the system in the
// paper normalization; solved from the two proportionality constants of
// the extremal convolution identities.
double system_bubble_amplitude(const ProblemParams& p);

// The exact discrete bubble pair with that amplitude.
SolutionPair system_bubble_pair(const ProblemParams& p, const GridPtr& grid, double t = 1.0);

// Scale-free weak-form residual of  -Lap u = (I_mu * u^{2*_mu}) u^{2*_mu-1}
// over a fixed family of radial bump test functions.
double pde_residual(const ProblemParams& p, const RadialFunction& u);

// (1/2) int |grad u|^2 - 1/(2 2*_mu) int (I_mu * u^{2*_mu}) u^{2*_mu}
double energy(const ProblemParams& p, const RadialFunction& u);

// int |grad u|^2 / ( int (I_mu * |u|^{2*_mu}) |u|^{2*_mu} )^{(N-2)/(2N-mu)}
double rayleigh_quotient(const ProblemParams& p, const RadialFunction& u);

struct MinimizeOptions {
  double step = 0.5;      // initial Sobolev-gradient step
  int max_iters = 4000;
  double tol = 1e-10;     // relative quotient decrease
};

struct MinimizeResult {
  RadialFunction minimizer;
  double value = 0.0;
  int iterations = 0;
};

// Projected Sobolev-gradient descent on the quotient over positive radial
// profiles, renormalized to unit Dirichlet norm each step.  Monotone by
// construction; throws convergence_error when the iteration budget runs
// out before the decrease tolerance is met.
MinimizeResult minimize_rayleigh(const ProblemParams& p, const RadialFunction& u0,
                                 const MinimizeOptions& opts = {});

struct FixedPointOptions {
  int max_sweeps = 100;
  double tol = 1e-8;      // sup-relative change of the gauge-fixed iterate
  double damping = 1.0;   // 1 = undamped sweep
};

// Iterate the composition of the two integral operators with an
// amplitude/dilation gauge fix (value 1 at the origin, half-height radius
// 1) each sweep, then rescale to the amplitude that closes the system.
SolutionPair fixed_point_solve(const ProblemParams& p, const RadialFunction& u0,
                               const FixedPointOptions& opts = {});

}  // namespace choq
