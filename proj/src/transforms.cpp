#include "choq/transforms.hpp"

#include <cmath>

#include "choq/par.hpp"

namespace choq {

VecN reflect_point(const VecN& x, double lambda) {
  VecN y = x;
  y[0] = 2.0 * lambda - x[0];
  return y;
}

Field kelvin_u(Field u, int dim) {
  return [u = std::move(u), dim](const VecN& x) {
    const double r2 = x.squaredNorm();
    if (r2 == 0.0) throw param_error("kelvin_u: x = 0 is the singular point of the transform");
    return std::pow(r2, -0.5 * (dim - 2)) * u(x / r2);
  };
}

Field kelvin_v(Field v, double mu) {
  return [v = std::move(v), mu](const VecN& x) {
    const double r2 = x.squaredNorm();
    if (r2 == 0.0) throw param_error("kelvin_v: x = 0 is the singular point of the transform");
    return std::pow(r2, -0.5 * mu) * v(x / r2);
  };
}

Field translate(Field u, VecN a) {
  return [u = std::move(u), a = std::move(a)](const VecN& x) { return u(x + a); };
}

Field dilate(Field u, double k, int dim) {
  if (!(k > 0.0)) throw param_error("dilate: need k > 0");
  const double amp = std::pow(k, 0.5 * (dim - 2));
  return [u = std::move(u), k, amp](const VecN& x) { return amp * u(k * x); };
}

Field bubble_field(const BubbleParams& b) {
  return [b](const VecN& x) { return eval_U0(b, x); };
}

Field umu_field(const ProblemParams& p, const BubbleParams& b) {
  return [p, b](const VecN& x) { return eval_Umu(p, b, x); };
}

RadialFunction resample_radial(const Field& f, const VecN& center, const GridPtr& grid) {
  Eigen::VectorXd vals(grid->size());
  VecN x = center;
  for (int i = 0; i < grid->size(); ++i) {
    x = center;
    x[0] += grid->nodes()[i];
    vals[i] = f(x);
  }
  return RadialFunction(grid, std::move(vals));
}

double HalfSpaceSets::sigma_s_fraction() const {
  if (points.empty()) return 0.0;
  std::size_t c = 0;
  for (auto m : sigma_s_mask) c += m;
  return static_cast<double>(c) / points.size();
}

double HalfSpaceSets::sigma_t_fraction() const {
  if (points.empty()) return 0.0;
  std::size_t c = 0;
  for (auto m : sigma_t_mask) c += m;
  return static_cast<double>(c) / points.size();
}

bool HalfSpaceSets::sigma_s_empty() const {
  for (auto m : sigma_s_mask)
    if (m) return false;
  return true;
}

HalfSpaceSets make_halfspace_sets(const Field& s, const Field& t, double lambda,
                                  const HalfSpaceBox& box, double eps_exclude) {
  HalfSpaceSets out;
  out.lambda = lambda;
  const double h = box.spacing();
  out.cell_volume = h * h * h;
  VecN origin_l(3);
  origin_l << 2.0 * lambda, 0.0, 0.0;  // reflection of the origin
  out.points.reserve(static_cast<std::size_t>(box.n) * box.n * box.n);
  for (int i = 0; i < box.n; ++i) {
    for (int j = 0; j < box.n; ++j) {
      for (int k = 0; k < box.n; ++k) {
        VecN y(3);
        y << lambda + (i + 0.5) * h, -0.5 * box.extent + (j + 0.5) * h,
            -0.5 * box.extent + (k + 0.5) * h;
        if (eps_exclude > 0.0 && (y - origin_l).norm() < eps_exclude) {
          out.excluded_measure += out.cell_volume;
          continue;
        }
        out.points.push_back(std::move(y));
      }
    }
  }
  const std::size_t m = out.points.size();
  out.sigma_s_mask.assign(m, 0);
  out.sigma_t_mask.assign(m, 0);
  par::for_index(static_cast<std::ptrdiff_t>(m), [&](std::ptrdiff_t idx) {
    const VecN& y = out.points[idx];
    const VecN yl = reflect_point(y, lambda);
    out.sigma_s_mask[idx] = s(y) > s(yl) ? 1 : 0;
    out.sigma_t_mask[idx] = t(y) > t(yl) ? 1 : 0;
  });
  return out;
}

namespace {

// integrand of the reflection-difference identity at y
struct ReflectionIntegrand {
  const Field& s;
  const Field& t;
  double q;           // 2*_mu - 1
  double kernel_pow;  // N - 2
  double lambda;
  const VecN& x;
  VecN xl;

  double bracket(const VecN& y) const {
    const VecN yl = reflect_point(y, lambda);
    return t(y) * std::pow(s(y), q) - t(yl) * std::pow(s(yl), q);
  }

  double operator()(const VecN& y) const {
    const double dx = (x - y).norm();
    const double dxl = (xl - y).norm();
    if (dx == 0.0 || dxl == 0.0) return 0.0;
    return (std::pow(dx, -kernel_pow) - std::pow(dxl, -kernel_pow)) * bracket(y);
  }
};

// int_{[-1/2,1/2]^3} |z|^{-p} dz: analytic over the inscribed ball plus a
// midpoint sweep over the corner complement.
double unit_cube_kernel_integral(double p) {
  double total = 4.0 * M_PI * std::pow(0.5, 3.0 - p) / (3.0 - p);
  const int m = 24;
  const double h = 1.0 / m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const double zx = -0.5 + (i + 0.5) * h;
        const double zy = -0.5 + (j + 0.5) * h;
        const double zz = -0.5 + (k + 0.5) * h;
        const double r = std::sqrt(zx * zx + zy * zy + zz * zz);
        if (r >= 0.5) total += std::pow(r, -p) * h * h * h;
      }
  return total;
}

// Midpoint contribution of one cell, recursively refined when the kernel
// singularity at x is within a few cell widths.
double cell_contribution(const ReflectionIntegrand& f, const VecN& c, double h, int depth,
                         double cube_const) {
  const double d = (f.x - c).norm();
  if (d > 3.0 * h || depth == 0) {
    if (d == 0.0) return 0.0;
    return f(c) * h * h * h;
  }
  if (d < 0.75 * h && depth == 1) {
    // innermost cell: singular kernel integrated analytically against the
    // locally constant bracket; the reflected kernel is regular here
    const double reg = -std::pow((f.xl - c).norm(), -f.kernel_pow);
    return (cube_const * std::pow(h, 3.0 - f.kernel_pow) + reg * h * h * h) * f.bracket(f.x);
  }
  double acc = 0.0;
  const double hh = 0.5 * h;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2) {
        VecN cc = c;
        cc[0] += 0.25 * h * sx;
        cc[1] += 0.25 * h * sy;
        cc[2] += 0.25 * h * sz;
        acc += cell_contribution(f, cc, hh, depth - 1, cube_const);
      }
  return acc;
}

}  // namespace

double reflection_difference(const Field& s, const Field& t, const ProblemParams& p,
                             double lambda, const VecN& x, const HalfSpaceBox& box,
                             double eps_exclude, double* excluded) {
  p.validate();
  if (p.dim != 3) throw param_error("reflection_difference: box quadrature implemented for N = 3");
  if (!(x[0] > lambda)) throw param_error("reflection_difference: x must lie in Sigma_lambda");
  ReflectionIntegrand f{s,      t, p.two_star_mu() - 1.0, static_cast<double>(p.dim - 2),
                        lambda, x, reflect_point(x, lambda)};
  const double cube_const = unit_cube_kernel_integral(f.kernel_pow);
  const double h = box.spacing();
  VecN origin_l(3);
  origin_l << 2.0 * lambda, 0.0, 0.0;

  const int n = box.n;
  std::vector<double> row_sums(static_cast<std::size_t>(n), 0.0);
  std::vector<double> row_excl(static_cast<std::size_t>(n), 0.0);
  par::for_index(n, [&](std::ptrdiff_t i) {
    double acc = 0.0, excl = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        VecN y(3);
        y << lambda + (i + 0.5) * h, -0.5 * box.extent + (j + 0.5) * h,
            -0.5 * box.extent + (k + 0.5) * h;
        if (eps_exclude > 0.0 && (y - origin_l).norm() < eps_exclude) {
          excl += h * h * h;
          continue;
        }
        acc += cell_contribution(f, y, h, 4, cube_const);
      }
    row_sums[static_cast<std::size_t>(i)] = acc;
    row_excl[static_cast<std::size_t>(i)] = excl;
  });
  double total = 0.0, excluded_measure = 0.0;
  for (int i = 0; i < n; ++i) {
    total += row_sums[static_cast<std::size_t>(i)];
    excluded_measure += row_excl[static_cast<std::size_t>(i)];
  }
  if (excluded) *excluded = excluded_measure;
  return total;
}

namespace {

double masked_lp(const HalfSpaceSets& sets, const std::vector<std::uint8_t>& mask,
                 const std::vector<double>& vals, double q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (mask[i]) acc += std::pow(std::abs(vals[i]), q);
  return std::pow(acc * sets.cell_volume, 1.0 / q);
}

}  // namespace

Lemma22Result lemma22_norms(const Field& s, const Field& t, const ProblemParams& p,
                            double lambda, const HalfSpaceBox& box, bool mu4_variant,
                            double eps_exclude_spacings) {
  p.validate();
  if (p.dim != 3 && !mu4_variant)
    throw param_error("lemma22_norms: box sampling implemented for N = 3");
  if (!(lambda > 0.0)) throw param_error("lemma22_norms: need lambda > 0");
  const double eps = eps_exclude_spacings * box.spacing();
  HalfSpaceSets sets = make_halfspace_sets(s, t, lambda, box, eps);

  const std::size_t m = sets.points.size();
  std::vector<double> sv(m), tv(m), dv(m);
  par::for_index(static_cast<std::ptrdiff_t>(m), [&](std::ptrdiff_t i) {
    const VecN& y = sets.points[static_cast<std::size_t>(i)];
    const VecN yl = reflect_point(y, lambda);
    sv[i] = s(y);
    tv[i] = t(y);
    dv[i] = sv[i] - s(yl);
  });

  Lemma22Result out;
  out.sigma_s_fraction = sets.sigma_s_fraction();
  out.excluded_measure = sets.excluded_measure;
  out.sigma_s_empty = sets.sigma_s_empty();

  const double two_star = p.two_star();
  const double tsm = p.two_star_mu();
  out.lhs = out.sigma_s_empty ? 0.0 : masked_lp(sets, sets.sigma_s_mask, dv, two_star);

  if (!mu4_variant) {
    const double t_norm = masked_lp(sets, sets.sigma_s_mask, tv, 2.0 * p.dim / p.mu);
    const double s_on_s = masked_lp(sets, sets.sigma_s_mask, sv, two_star);
    const double s_on_t = masked_lp(sets, sets.sigma_t_mask, sv, two_star);
    out.bracket = t_norm * std::pow(s_on_s, tsm - 2.0) +
                  std::pow(s_on_t, tsm - 1.0) * std::pow(s_on_s, tsm - 1.0);
  } else {
    const double t_norm = masked_lp(sets, sets.sigma_s_mask, tv, 0.5 * p.dim);
    const double s_on_s = masked_lp(sets, sets.sigma_s_mask, sv, two_star);
    const double s_on_t = masked_lp(sets, sets.sigma_t_mask, sv, two_star);
    out.bracket = t_norm + s_on_t * s_on_s;
  }
  return out;
}

}  // namespace choq
