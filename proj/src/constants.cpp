#include "choq/constants.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <mutex>

#include "choq/gammafn.hpp"

namespace choq {

double critical_exponent(const ProblemParams& p) {
  p.validate();
  return p.two_star_mu();
}

double riesz_normalization(const ProblemParams& p) {
  p.validate();
  if (p.near_delta_limit())
    std::cerr << "[choq] warning: mu = " << p.mu << " is within 1e-6 of N = " << p.dim
              << "; the Riesz potential is close to its delta-kernel limit\n";
  const double N = p.dim, mu = p.mu;
  return gamma_fn(0.5 * mu) /
         (gamma_fn(0.5 * (N - mu)) * std::pow(M_PI, 0.5 * N) * std::pow(2.0, N - mu));
}

double hls_sharp_constant(const ProblemParams& p) {
  p.validate();
  const double N = p.dim, mu = p.mu;
  return std::pow(M_PI, 0.5 * mu) * gamma_fn(0.5 * (N - mu)) / gamma_fn(N - 0.5 * mu) *
         std::pow(gamma_fn(N) / gamma_fn(0.5 * N), (N - mu) / N);
}

double c_star(const ProblemParams& p) {
  p.validate();
  const double N = p.dim, mu = p.mu;
  return std::pow(0.5 / std::sqrt(M_PI), N - mu) * gamma_fn(0.5 * mu) / gamma_fn(N - 0.5 * mu) *
         std::pow(gamma_fn(N) / gamma_fn(0.5 * N), (N - mu) / N);
}

namespace {

// Rayleigh quotient of the standard bubble (t = 1, centered) on one grid.
double bubble_rayleigh(int dim, const RadialGrid& g) {
  const double nu = 0.5 * (dim - 2);
  const double a0 = std::pow(static_cast<double>(dim) * (dim - 2), 0.25 * (dim - 2));
  const double tstar = 2.0 * dim / (dim - 2);
  double dirich = 0.0, mass = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double r = g.nodes()[i];
    const double base = 1.0 / (1.0 + r * r);
    const double u = a0 * std::pow(base, nu);
    const double du = -2.0 * nu * r * base * u;  // dU/dr
    dirich += g.weights()[i] * du * du;
    mass += g.weights()[i] * std::pow(u, tstar);
  }
  dirich *= g.omega();
  mass *= g.omega();
  return dirich / std::pow(mass, 2.0 / tstar);
}

double sobolev_cached(int dim) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(dim);
  if (it != cache.end()) return it->second;

  // Wide default grid: 12 decades up to 1e6 keeps the slowly decaying
  // gradient tail below 1e-5 even at N = 3.
  const auto g1 = make_grid(dim, 1e6, 1024, GridMapping::log_map);
  const auto g2 = make_grid(dim, 1e6, 2048, GridMapping::log_map);
  const double s1 = bubble_rayleigh(dim, *g1);
  const double s2 = bubble_rayleigh(dim, *g2);
  if (std::abs(s1 - s2) > 1e-8 * std::abs(s2))
    throw quadrature_error("sobolev_constant: quadrature did not stabilize under refinement");
  cache[dim] = s2;
  return s2;
}

}  // namespace

double sobolev_constant(int dim) {
  if (dim < 3) throw param_error("sobolev_constant: need N >= 3");
  return sobolev_cached(dim);
}

double sobolev_constant(int dim, const GridPtr& grid) {
  if (!grid) return sobolev_constant(dim);
  if (grid->dim() != dim) throw grid_error("sobolev_constant: grid dimension mismatch");
  return bubble_rayleigh(dim, *grid);
}

double s_star_hl(const ProblemParams& p) { return s_star_hl(p, nullptr); }

double s_star_hl(const ProblemParams& p, const GridPtr& grid) {
  p.validate();
  const double N = p.dim, mu = p.mu;
  const double S = grid ? sobolev_constant(p.dim, grid) : sobolev_constant(p.dim);
  return S / std::pow(c_star(p), (N - 2.0) / (2.0 * N - mu));
}

double bubble_amplitude(const ProblemParams& p) { return bubble_amplitude(p, nullptr); }

double bubble_amplitude(const ProblemParams& p, const GridPtr& grid) {
  p.validate();
  const double N = p.dim, mu = p.mu;
  const double S = grid ? sobolev_constant(p.dim, grid) : sobolev_constant(p.dim);
  return std::pow(S, (N - mu) * (2.0 - N) / (4.0 * (N - mu + 2.0))) *
         std::pow(c_star(p), (2.0 - N) / (2.0 * (N - mu + 2.0)));
}

ConstantBundle constant_bundle(const ProblemParams& p) {
  ConstantBundle b;
  b.riesz_norm = riesz_normalization(p);
  b.hls_sharp = hls_sharp_constant(p);
  b.c_star = c_star(p);
  b.sobolev = sobolev_constant(p.dim);
  b.s_star_hl = b.sobolev / std::pow(b.c_star, (p.dim - 2.0) / (2.0 * p.dim - p.mu));
  b.bubble_amp = bubble_amplitude(p);
  return b;
}

double power_convolution_constant(int dim, double beta) {
  if (!(beta > 0.0 && beta < dim)) throw param_error("power_convolution_constant: need 0 < beta < N");
  return std::pow(M_PI, 0.5 * dim) * gamma_fn(0.5 * (dim - beta)) / gamma_fn(dim - 0.5 * beta);
}

}  // namespace choq
