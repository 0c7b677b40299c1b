#pragma once

#include "choq/params.hpp"
#include "choq/radial.hpp"

// Every Gamma-function constant of the problem and the relations among
// them: the Riesz normalization, the sharp convolution-inequality constant
// in the conformal case, their product C*(N, mu), the Sobolev constant S
// (defined operationally as the bubble Rayleigh quotient), the combined
// best constant S*_{H,L} = S / C*^{(N-2)/(2N-mu)}, and the amplitude that
// turns the standard bubble into the minimizer family.

namespace choq {

struct ConstantBundle {
  double riesz_norm = 0;   // coefficient of |x|^{-mu} in the Riesz potential
  double hls_sharp = 0;    // C(N, mu) at t = r = 2N/(2N - mu)
  double c_star = 0;       // C*(N, mu)
  double sobolev = 0;      // S, bubble Rayleigh quotient
  double s_star_hl = 0;    // S / C*^{(N-2)/(2N-mu)}
  double bubble_amp = 0;   // scalar multiplying the standard bubble
};

// (2N - mu) / (N - 2)
double critical_exponent(const ProblemParams& p);

// Gamma(mu/2) / ( Gamma((N-mu)/2) pi^{N/2} 2^{N-mu} ).
// Emits a warning on stderr when mu is within 1e-6 of the delta limit.
double riesz_normalization(const ProblemParams& p);

// pi^{mu/2} Gamma((N-mu)/2)/Gamma(N-mu/2) * [Gamma(N)/Gamma(N/2)]^{(N-mu)/N}
double hls_sharp_constant(const ProblemParams& p);

// (1/(2 sqrt(pi)))^{N-mu} Gamma(mu/2)/Gamma(N-mu/2)
//   * [Gamma(N)/Gamma(N/2)]^{(N-mu)/N}
// Equals riesz_normalization * hls_sharp_constant.
double c_star(const ProblemParams& p);

// Sobolev constant as the Rayleigh quotient of the standard bubble,
// evaluated by quadrature (no closed form is assumed).  The default grid
// spans 12 decades up to R = 1e6; pass a grid to evaluate on a specific
// discretization.  Throws quadrature_error if refinement does not
// stabilize to 1e-8 relative.
double sobolev_constant(int dim);
double sobolev_constant(int dim, const GridPtr& grid);

// S / C*(N,mu)^{(N-2)/(2N-mu)}
double s_star_hl(const ProblemParams& p);
double s_star_hl(const ProblemParams& p, const GridPtr& grid);

// S^{(N-mu)(2-N)/(4(N-mu+2))} * C*^{(2-N)/(2(N-mu+2))}
double bubble_amplitude(const ProblemParams& p);
double bubble_amplitude(const ProblemParams& p, const GridPtr& grid);

ConstantBundle constant_bundle(const ProblemParams& p);

// pi^{N/2} Gamma((N-beta)/2) / Gamma(N - beta/2):  the proportionality
// constant in  |x|^{-beta} * (t/(t^2+|x|^2))^{(2N-beta)/2}
//            =  D(N,beta) (t/(t^2+|x|^2))^{beta/2}.
// This is the scalar identity behind the extremal self-similarity checks
// and the closed-system amplitude.
double power_convolution_constant(int dim, double beta);

}  // namespace choq
