#pragma once

#include <cmath>

#include "choq/errors.hpp"

// Gamma function on the positive real axis via the Lanczos approximation
// (g = 607/128, 15 terms).  Every constant in the toolkit flows through
// Gamma, so the evaluation is kept self-contained here and is validated in
// the unit tests against a 50-digit reference table
// (tests/fixtures/gamma_table.txt).

namespace choq {

namespace detail {
// Godfrey coefficient set for g = 607/128.
inline constexpr double kLanczosG = 607.0 / 128.0;
inline constexpr double kLanczos[15] = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4,
    0.15808870322491248884e-3,  -0.21026444172410488319e-3,
    0.21743961811521264320e-3,  -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4,
    0.36899182659531622704e-5};
}  // namespace detail

// log Gamma(x), x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw param_error("log_gamma: argument must be positive");
  // Series is least accurate for tiny x; shift up once via
  // Gamma(x) = Gamma(x+1)/x.
  if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);
  double a = detail::kLanczos[0];
  const double t = x + detail::kLanczosG - 0.5;
  for (int k = 1; k < 15; ++k) a += detail::kLanczos[k] / (x - 1.0 + k);
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return half_log_two_pi + (x - 0.5) * std::log(t) - t + std::log(a);
}

// Gamma(x), x > 0.  Overflows to +inf past x ~ 171.6 like tgamma does.
inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw param_error("gamma_fn: argument must be positive");
  if (x >= 0.5 && x < 15.0) {
    // Direct rational form avoids the exp(log) rounding for the small
    // arguments every constant formula actually uses.
    double a = detail::kLanczos[0];
    const double t = x + detail::kLanczosG - 0.5;
    for (int k = 1; k < 15; ++k) a += detail::kLanczos[k] / (x - 1.0 + k);
    constexpr double sqrt_two_pi = 2.5066282746310005024;
    return sqrt_two_pi * std::pow(t, x - 0.5) * std::exp(-t) * a;
  }
  if (x < 0.5) return gamma_fn(x + 1.0) / x;
  return std::exp(log_gamma(x));
}

// Surface area of the unit sphere S^{N-1} in R^N.
inline double unit_sphere_area(int dim) {
  return 2.0 * std::pow(M_PI, 0.5 * dim) / gamma_fn(0.5 * dim);
}

}  // namespace choq
