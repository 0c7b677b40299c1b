#pragma once

#include <Eigen/Dense>
#include <memory>

#include "choq/params.hpp"
#include "choq/radial.hpp"

// Convolution of radial / single-sector functions with the power kernel
// |x-y|^{-beta}, realized per angular sector ell through the Funk-Hecke
// projection
//
//   K_ell(r,s) = (w_{N-2}/w_{N-1}) *
//       int_{-1}^{1} (r^2+s^2-2rst)^{-beta/2} Ghat_ell(t) (1-t^2)^{(N-3)/2} dt,
//
// Ghat_ell = Gegenbauer C_ell^{(N-2)/2} normalized to 1 at t = 1, so that
// for g(x) = f(r) Y_ell,   (|x|^{-beta} * g) = [w_{N-1} int K_ell f s^{N-1} ds] Y_ell.
//
// A SectorKernel stores the product-integration operator matrix
//   (V f)_i  ~=  w_{N-1} int_0^R K_ell(r_i, s) f(s) s^{N-1} ds ,
// assembled row by row with tanh-sinh panels across the diagonal
// singularity (K_ell ~ |r-s|^{N-1-beta} there, which carries almost all of
// the kernel mass as beta -> N) and native Gauss panels in the far field.

namespace choq {

struct SectorKernel {
  GridPtr grid;
  double exponent = 0.0;  // beta
  int ell = 0;
  Eigen::MatrixXd op;     // dense M x M product-integration operator

  // Pointwise kernel value K_ell(r, s).  Infinite on the diagonal when
  // beta >= N-1 (integrable singularity; the operator handles it).
  double point_value(double r, double s) const;

  // Off-grid convolution value at radius r (r may exceed the cutoff).
  double convolve_value(const RadialFunction& f, double r) const;
};

using KernelPtr = std::shared_ptr<const SectorKernel>;

// Assemble (or fetch from cache) the sector kernel operator.  Results are
// cached in memory by (grid hash, beta, ell); if the environment variable
// CHOQ_KERNEL_CACHE names a directory, assembled operators are also
// persisted there as binary files.
KernelPtr sector_kernel(const GridPtr& grid, double beta, int ell);

// Pointwise kernel evaluation without assembling an operator.
double sector_kernel_value(int dim, double beta, int ell, double r, double s);

// (I_mu * f) when normalized, (|x|^{-mu} * f) when not.
RadialFunction riesz_convolve(const ProblemParams& p, const RadialFunction& f,
                              bool normalized = true);

// Same with the sector-ell kernel; ell = 0 reduces to riesz_convolve.
RadialFunction sector_convolve(const ProblemParams& p, const RadialFunction& f, int ell,
                               bool normalized = true);

// |x|^{-(N-2)} * f  (the bare integral-equation kernel; no Green constant).
// With green_normalized the result is scaled by Gamma(N/2-1)/(4 pi^{N/2}),
// which makes -Laplacian(potential) recover f.
RadialFunction newtonian_potential(const RadialFunction& f, int dim,
                                   bool green_normalized = false);
double newtonian_green_constant(int dim);

// || I_mu * f - f ||_2 / || f ||_2
double riesz_identity_gap(const ProblemParams& p, const RadialFunction& f);

struct HlsCheckResult {
  double lhs = 0.0;  // double integral  f(x) h(y) |x-y|^{-mu}
  double rhs = 0.0;  // C(N,mu) |f|_t |h|_t  at  t = 2N/(2N-mu)
};
HlsCheckResult hls_check(const ProblemParams& p, const RadialFunction& f,
                         const RadialFunction& h);

// || I_mu * f ||_s / || f ||_r  with  1/r - 1/s = (N-mu)/N.
double prop41_check(const ProblemParams& p, const RadialFunction& f, double r_exp);

// Flush the in-memory kernel cache (used by benchmarks).
void clear_kernel_cache();

}  // namespace choq
