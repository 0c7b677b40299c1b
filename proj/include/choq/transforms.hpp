#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "choq/bubbles.hpp"
#include "choq/params.hpp"
#include "choq/radial.hpp"

// The symmetry group of the problem: Kelvin-type transforms, translations,
// dilations, reflections across hyperplanes x_1 = lambda, the half-space
// comparison sets of the moving-plane argument, and the reflection
// difference identity evaluated by quadrature.
//
// Field functions are closures over R^N so transforms compose lazily;
// nothing is resampled onto a grid until a residual check asks for it.

namespace choq {

using Field = std::function<double(const VecN&)>;

// x -> (2 lambda - x_1, x_2, ..., x_N)
VecN reflect_point(const VecN& x, double lambda);

// |x|^{2-N} u(x/|x|^2); throws param_error at x = 0.
Field kelvin_u(Field u, int dim);
// |x|^{-mu} v(x/|x|^2); throws param_error at x = 0.
Field kelvin_v(Field v, double mu);

// x -> u(x + a)
Field translate(Field u, VecN a);
// x -> k^{(N-2)/2} u(k x), k > 0
Field dilate(Field u, double k, int dim);

Field bubble_field(const BubbleParams& b);
Field umu_field(const ProblemParams& p, const BubbleParams& b);

// Sample a field that is radial about `center` back onto a radial grid
// (evaluated along the first coordinate axis).
RadialFunction resample_radial(const Field& f, const VecN& center, const GridPtr& grid);

// Axis-aligned midpoint sample of the half space {x_1 > lambda} (N = 3):
// box [lambda, lambda + extent] x [-extent/2, extent/2]^2 with n^3 cells.
struct HalfSpaceBox {
  double lambda = 0.0;
  double extent = 24.0;
  int n = 48;
  double spacing() const { return extent / n; }
};

// Point sample of Sigma_lambda with the comparison masks
//   sigma_s: s(x) > s(x^lambda),   sigma_t: t(x) > t(x^lambda),
// minus an epsilon-ball around the reflected origin 0^lambda.
struct HalfSpaceSets {
  double lambda = 0.0;
  double cell_volume = 0.0;
  double excluded_measure = 0.0;  // measure removed by the epsilon ball
  std::vector<VecN> points;
  std::vector<std::uint8_t> sigma_s_mask, sigma_t_mask;

  double sigma_s_fraction() const;
  double sigma_t_fraction() const;
  bool sigma_s_empty() const;
};

HalfSpaceSets make_halfspace_sets(const Field& s, const Field& t, double lambda,
                                  const HalfSpaceBox& box, double eps_exclude);

// Right-hand side of the reflection-difference identity
//   s(x) - s(x^l) = int_{Sigma_l} [ |x-y|^{2-N} - |x^l-y|^{2-N} ]
//                                 [ t s^{q-1}(y) - t_l s_l^{q-1}(y) ] dy,
// q = 2*_mu, evaluated by midpoint quadrature over the sampled half space
// with local refinement around the kernel singularity at y = x.  The
// epsilon-ball around 0^lambda defaults to zero (the identity degrades
// with any finite exclusion when the pair is regular there); pass a
// positive radius for genuinely singular Kelvin pairs.  The measure
// excluded is reported through *excluded if given.
double reflection_difference(const Field& s, const Field& t, const ProblemParams& p,
                             double lambda, const VecN& x, const HalfSpaceBox& box,
                             double eps_exclude = 0.0, double* excluded = nullptr);

struct Lemma22Result {
  double lhs = 0.0;      // || s - s_l ||_{L^{2*}} over sigma_s
  double bracket = 0.0;  // bracketed norm factor (without the constant C)
  double sigma_s_fraction = 0.0;
  double excluded_measure = 0.0;
  bool sigma_s_empty = true;
};

// Norm inequality data of the moving-plane comparison.  With mu4_variant
// the (N > 4, mu = 4) exponents ||t||_{N/2} and ||s|| ||s|| are used.
// eps_exclude is in units of the sample spacing (default 2 spacings).
Lemma22Result lemma22_norms(const Field& s, const Field& t, const ProblemParams& p,
                            double lambda, const HalfSpaceBox& box, bool mu4_variant = false,
                            double eps_exclude_spacings = 2.0);

}  // namespace choq
