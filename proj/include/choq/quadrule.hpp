#pragma once

#include <cmath>
#include <vector>

// 1-D quadrature building blocks: Gauss-Legendre nodes by Newton iteration
// on the Legendre recurrence, and truncated tanh-sinh rules for panels with
// an integrable endpoint singularity of unknown strength.

namespace choq {

struct QuadRule {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
  std::size_t size() const { return x.size(); }
};

// n-point Gauss-Legendre rule on [-1, 1].
inline QuadRule gauss_legendre(int n) {
  QuadRule q;
  q.x.resize(n);
  q.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    q.x[i] = -z;
    q.x[n - 1 - i] = z;
    q.w[i] = q.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return q;
}

// Gauss-Legendre rule mapped to [a, b].
inline QuadRule gauss_legendre_ab(int n, double a, double b) {
  QuadRule q = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    q.x[i] = mid + half * q.x[i];
    q.w[i] *= half;
  }
  return q;
}

// Tanh-sinh rule on (0, 1) tolerating an integrable singularity at 0.
// Nodes cluster double-exponentially at both endpoints; `levels` controls
// the step h = u_max / levels of the trapezoid in the transformed variable.
// The node position is computed as exp(2s)/(1+exp(2s)) so the approach to
// the singular endpoint is resolved to ~1e-21 instead of saturating at
// double rounding of 0.5*(1+tanh(s)).
inline QuadRule tanh_sinh(int levels = 28, double u_max = 3.45) {
  QuadRule q;
  const double h = u_max / levels;
  for (int k = -levels; k <= levels; ++k) {
    const double u = k * h;
    const double s = 0.5 * M_PI * std::sinh(u);
    const double e2s = std::exp(2.0 * s);
    const double x = e2s / (1.0 + e2s);
    const double c = std::cosh(s);
    const double w = h * 0.25 * M_PI * std::cosh(u) / (c * c);
    if (x <= 0.0 || x >= 1.0 || w < 1e-300) continue;
    q.x.push_back(x);
    q.w.push_back(w);
  }
  return q;
}

}  // namespace choq
