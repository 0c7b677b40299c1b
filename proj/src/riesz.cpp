#include "choq/riesz.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>
#include <vector>

#include "choq/constants.hpp"
#include "choq/gammafn.hpp"
#include "choq/par.hpp"
#include "choq/quadrule.hpp"

namespace choq {

namespace {

// ---------------------------------------------------------------------------
// pointwise kernel evaluation
// ---------------------------------------------------------------------------

// Gegenbauer C_ell^{alpha}(t) / C_ell^{alpha}(1) by the three-term
// recurrence; alpha = (N-2)/2 > 0.
struct GegenbauerRatio {
  int ell;
  double alpha;
  double inv_norm;  // 1 / C_ell(1)

  GegenbauerRatio(int ell_, int dim) : ell(ell_), alpha(0.5 * (dim - 2)) {
    inv_norm = 1.0 / raw(1.0);
  }

  double raw(double t) const {
    if (ell == 0) return 1.0;
    double cm1 = 1.0;
    double c0 = 2.0 * alpha * t;
    for (int k = 2; k <= ell; ++k) {
      const double c = (2.0 * t * (k + alpha - 1.0) * c0 - (k + 2.0 * alpha - 2.0) * cm1) / k;
      cm1 = c0;
      c0 = c;
    }
    return c0;
  }

  double operator()(double t) const { return ell == 0 ? 1.0 : raw(t) * inv_norm; }
};

const QuadRule& rule_gl20() {
  static const QuadRule q = gauss_legendre(20);
  return q;
}
const QuadRule& rule_gl14() {
  static const QuadRule q = gauss_legendre(14);
  return q;
}
const QuadRule& rule_gl24() {
  static const QuadRule q = gauss_legendre(24);
  return q;
}
const QuadRule& rule_ts() {
  static const QuadRule q = tanh_sinh(24, 3.4);
  return q;
}

// int_0^2 (eps + u)^{-beta/2} Ghat(1-u) [u(2-u)]^{(N-3)/2} du
// eps = rho^2 / (2 r s) >= 0.  The u -> 0 endpoint is the sphere-diagonal
// direction; for eps = 0 the integrand behaves like u^{(N-3)/2 - beta/2}.
double angular_integral(int dim, double beta, const GegenbauerRatio& G, double eps) {
  const double ap = 0.5 * (dim - 3);  // exponent of u(2-u)
  double total = 0.0;

  // --- u in [0, u1]:  u = y^2 regularizes the half-integer weight -------
  const bool near = eps < 1.0 / 16.0;
  const double u1 = near ? 16.0 * eps : 1.0;
  const double y1 = std::sqrt(u1);
  if (eps == 0.0 && beta >= dim - 1) return INFINITY;
  {
    // integrand in y:  2 (eps+y^2)^{-beta/2} Ghat(1-y^2) y^{N-2} (2-y^2)^{ap}
    auto f = [&](double y) {
      const double u = y * y;
      return 2.0 * std::pow(eps + u, -0.5 * beta) * G(1.0 - u) * std::pow(y, dim - 2) *
             std::pow(2.0 - u, ap);
    };
    if (y1 > 0.0) {
      if (near || eps == 0.0) {
        // tanh-sinh: uniform accuracy down to eps = 0
        const QuadRule& q = rule_ts();
        double s = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) s += q.w[k] * f(y1 * q.x[k]);
        total += y1 * s;
      } else {
        const QuadRule& q = rule_gl20();
        double s = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) s += q.w[k] * f(0.5 * y1 * (1.0 + q.x[k]));
        total += 0.5 * y1 * s;
      }
    }
  }

  // --- u in [u1, 1]: log panels across the scales -----------------------
  if (u1 < 1.0) {
    auto g = [&](double x) {  // x = ln u
      const double u = std::exp(x);
      return u * std::pow(eps + u, -0.5 * beta) * G(1.0 - u) * std::pow(u, ap) *
             std::pow(2.0 - u, ap);
    };
    const double x_lo = std::log(u1);
    const int npan = static_cast<int>(std::ceil(-x_lo / 1.5));
    const double wpan = -x_lo / npan;
    const QuadRule& q = rule_gl14();
    for (int pnl = 0; pnl < npan; ++pnl) {
      const double a = x_lo + pnl * wpan;
      double s = 0.0;
      for (std::size_t k = 0; k < q.size(); ++k) s += q.w[k] * g(a + 0.5 * wpan * (1.0 + q.x[k]));
      total += 0.5 * wpan * s;
    }
  }

  // --- u in [1, 2]:  2-u = y^2 regularizes the antipodal endpoint -------
  {
    auto f = [&](double y) {
      const double u = 2.0 - y * y;
      return 2.0 * std::pow(eps + u, -0.5 * beta) * G(1.0 - u) * std::pow(u, ap) *
             std::pow(y, dim - 2);
    };
    const QuadRule& q = rule_gl24();
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) s += q.w[k] * f(0.5 * (1.0 + q.x[k]));
    total += 0.5 * s;
  }
  return total;
}

// K_ell(r, s) with the diagonal offset rho = |r - s| supplied exactly by
// the caller (the product-integration nodes know rho to full precision
// even when r + rho rounds to r).
double kernel_point(int dim, double beta, const GegenbauerRatio& G, double r, double s,
                    double rho) {
  const double two_rs = 2.0 * r * s;
  const double eps = rho * rho / two_rs;
  const double pref =
      unit_sphere_area(dim - 1) / unit_sphere_area(dim) * std::pow(two_rs, -0.5 * beta);
  return pref * angular_integral(dim, beta, G, eps);
}

// Diagonal asymptotics K_ell(r, r +- rho) ~ C_sing(r) rho^{N-1-beta} for
// beta > N-1 (independent of ell: the singularity sits at the coincidence
// direction where the Gegenbauer factor is 1).  Matches the N = 3 closed
// forms exactly.
double kernel_diag_coefficient(int dim, double beta, double r) {
  const double bcoef = std::exp(log_gamma(0.5 * (dim - 1)) + log_gamma(0.5 * (beta - dim + 1)) -
                                log_gamma(0.5 * beta));
  return unit_sphere_area(dim - 1) / unit_sphere_area(dim) * 0.5 * std::pow(r, 1 - dim) * bcoef;
}

// Defect of the tanh-sinh rule on the pure power rho^nu over [0, 1]:
// exact integral minus the rule's value.  Adding C_sing(r) g(r) times this
// defect (scaled to the panel) makes the power-law head of the kernel
// integrate exactly; as beta -> N that head carries nearly all of the
// kernel mass, so dropping it would lose an O((rho_min)^{N-beta}) share.
double ts_power_defect(const QuadRule& ts, double nu) {
  double s = 0.0;
  for (std::size_t q = 0; q < ts.size(); ++q) s += ts.w[q] * std::pow(ts.x[q], nu);
  return 1.0 / (nu + 1.0) - s;
}

// ---------------------------------------------------------------------------
// operator assembly
// ---------------------------------------------------------------------------

Eigen::MatrixXd build_operator(const RadialGrid& g, double beta, int ell) {
  const int n = g.size();
  const int npp = RadialGrid::kNodesPerPanel;
  const int P = g.panels();
  const double omega = g.omega();
  const GegenbauerRatio G(ell, g.dim());
  Eigen::MatrixXd V(n, n);
  V.setZero();

  const QuadRule& ts = rule_ts();
  const double nu_diag = g.dim() - 1 - beta;
  const bool need_diag_model = beta > g.dim() - 1 + 1e-9;
  const double ts_defect = need_diag_model ? ts_power_defect(ts, nu_diag) : 0.0;

  par::for_index(n, [&](std::ptrdiff_t i) {
    const double r = g.nodes()[i];
    const int pi = g.panel_of_x(g.xcoord()[i]);
    const int p_lo = std::max(0, pi - 1);
    const int p_hi = std::min(P - 1, pi + 1);

    // far field: the grid's own Lobatto panels are the quadrature
    // (panel weights carry s^{N-1} and the map Jacobian)
    for (int p = 0; p < P; ++p) {
      if (p >= p_lo && p <= p_hi) continue;
      for (int k = 0; k < npp; ++k) {
        const int j = g.node_id(p, k);
        const double s = g.nodes()[j];
        V(i, j) +=
            omega * kernel_point(g.dim(), beta, G, r, s, std::abs(r - s)) * g.panel_weight(p, k);
      }
    }

    // near field: tanh-sinh panels on [a, r] and [r, b] with the
    // singularity pinned at r; f values enter through panel interpolation
    const double xb = g.x_min() + (p_hi + 1) * g.panel_width_x();
    // rows in the first panel integrate the diagonal band down to s = 0
    // (the density is panel-0 extrapolated there); otherwise the band
    // starts at the near-region panel edge
    const double a = p_lo == 0 ? 0.0 : g.r_of_x(g.x_min() + p_lo * g.panel_width_x());
    const double b = std::min(g.r_of_x(xb), g.cutoff());
    double interp[RadialGrid::kNodesPerPanel];
    for (int side = 0; side < 2; ++side) {
      const double len = side == 0 ? r - a : b - r;
      if (!(len > 0.0)) continue;
      for (std::size_t q = 0; q < ts.size(); ++q) {
        const double rho = len * ts.x[q];
        if (rho == 0.0) continue;
        const double s = side == 0 ? r - rho : r + rho;
        if (!(s > 0.0)) continue;
        const double wq = len * ts.w[q];
        const double kv = kernel_point(g.dim(), beta, G, r, s, rho);
        const double val = omega * kv * std::pow(s, g.dim() - 1) * wq;
        double xs = g.x_of_r(s);
        xs = std::max(xs, g.x_min() - g.panel_width_x());  // clamp the extrapolation depth
        int pp = g.panel_of_x(xs);
        pp = std::min(std::max(pp, std::max(p_lo, 0)), p_hi);
        PanelInterp::weights(g, pp, xs, interp);
        for (int k = 0; k < npp; ++k) V(i, g.node_id(pp, k)) += val * interp[k];
      }
      if (need_diag_model)
        V(i, i) += omega * kernel_diag_coefficient(g.dim(), beta, r) *
                   std::pow(r, g.dim() - 1) * std::pow(len, nu_diag + 1.0) * ts_defect;
    }
  });
  return V;
}

// ---------------------------------------------------------------------------
// caching
// ---------------------------------------------------------------------------

struct CacheKey {
  std::uint64_t grid_hash;
  double beta;
  int ell;
  bool operator<(const CacheKey& o) const {
    return std::tie(grid_hash, beta, ell) < std::tie(o.grid_hash, o.beta, o.ell);
  }
};

std::mutex g_cache_mutex;
std::map<CacheKey, KernelPtr> g_cache;

struct DiskHeader {
  char magic[8];
  std::int32_t dim;
  double beta;
  std::int32_t ell;
  std::int32_t size;
  std::uint64_t grid_hash;
};
constexpr char kMagic[8] = {'C', 'H', 'O', 'Q', 'K', 'R', 'N', '1'};

std::string cache_path(const RadialGrid& g, double beta, int ell) {
  const char* dir = std::getenv("CHOQ_KERNEL_CACHE");
  if (!dir || !*dir) return {};
  std::ostringstream name;
  char betahex[32];
  std::snprintf(betahex, sizeof betahex, "%a", beta);
  std::string bh = betahex;
  for (auto& c : bh)
    if (c == '.' || c == '+' || c == '-') c = '_';
  name << dir << "/kern_N" << g.dim() << "_b" << bh << "_l" << ell << "_M" << g.size() << "_h"
       << std::hex << g.hash() << ".bin";
  return name.str();
}

bool load_disk(const std::string& path, const RadialGrid& g, double beta, int ell,
               Eigen::MatrixXd& out) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return false;
  DiskHeader h{};
  bool ok = std::fread(&h, sizeof h, 1, f) == 1 && std::memcmp(h.magic, kMagic, 8) == 0 &&
            h.dim == g.dim() && h.beta == beta && h.ell == ell && h.size == g.size() &&
            h.grid_hash == g.hash();
  if (ok) {
    out.resize(g.size(), g.size());
    ok = std::fread(out.data(), sizeof(double), out.size(), f) ==
         static_cast<std::size_t>(out.size());
  }
  std::fclose(f);
  return ok;
}

void store_disk(const std::string& path, const RadialGrid& g, double beta, int ell,
                const Eigen::MatrixXd& op) {
  std::error_code ec;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return;
  DiskHeader h{};
  std::memcpy(h.magic, kMagic, 8);
  h.dim = g.dim();
  h.beta = beta;
  h.ell = ell;
  h.size = g.size();
  h.grid_hash = g.hash();
  std::fwrite(&h, sizeof h, 1, f);
  std::fwrite(op.data(), sizeof(double), op.size(), f);
  std::fclose(f);
}

}  // namespace

double SectorKernel::point_value(double r, double s) const {
  const GegenbauerRatio G(ell, grid->dim());
  return kernel_point(grid->dim(), exponent, G, r, s, std::abs(r - s));
}

double SectorKernel::convolve_value(const RadialFunction& f, double r) const {
  if (!f.grid || f.grid->hash() != grid->hash())
    throw grid_error("convolve_value: grid mismatch");
  const RadialGrid& g = *grid;
  const GegenbauerRatio G(ell, g.dim());
  const int npp = RadialGrid::kNodesPerPanel;
  const double omega = g.omega();
  double acc = 0.0;
  if (r >= g.cutoff()) {
    // entirely far field
    for (int j = 0; j < g.size(); ++j) {
      const double s = g.nodes()[j];
      acc += omega * kernel_point(g.dim(), exponent, G, r, s, std::abs(r - s)) * g.weights()[j] *
             f.values[j];
    }
    return acc;
  }
  const int pi = g.panel_of_x(g.x_of_r(r));
  const int p_lo = std::max(0, pi - 1);
  const int p_hi = std::min(g.panels() - 1, pi + 1);
  for (int p = 0; p < g.panels(); ++p) {
    if (p >= p_lo && p <= p_hi) continue;
    for (int k = 0; k < npp; ++k) {
      const int j = g.node_id(p, k);
      const double s = g.nodes()[j];
      acc += omega * kernel_point(g.dim(), exponent, G, r, s, std::abs(r - s)) *
             g.panel_weight(p, k) * f.values[j];
    }
  }
  const QuadRule& ts = rule_ts();
  const double a = p_lo == 0 ? 0.0 : g.r_of_x(g.x_min() + p_lo * g.panel_width_x());
  const double b = std::min(g.r_of_x(g.x_min() + (p_hi + 1) * g.panel_width_x()), g.cutoff());
  for (int side = 0; side < 2; ++side) {
    const double len = side == 0 ? r - a : b - r;
    if (!(len > 0.0)) continue;
    for (std::size_t q = 0; q < ts.size(); ++q) {
      const double rho = len * ts.x[q];
      if (rho == 0.0) continue;
      const double s = side == 0 ? r - rho : r + rho;
      if (!(s > 0.0)) continue;
      acc += omega * kernel_point(g.dim(), exponent, G, r, s, rho) * std::pow(s, g.dim() - 1) *
             len * ts.w[q] * f.eval(s);
    }
    if (exponent > g.dim() - 1 + 1e-9)
      acc += omega * kernel_diag_coefficient(g.dim(), exponent, r) *
             std::pow(r, g.dim() - 1) * std::pow(len, g.dim() - exponent) *
             ts_power_defect(ts, g.dim() - 1 - exponent) * f.eval(r);
  }
  return acc;
}

KernelPtr sector_kernel(const GridPtr& grid, double beta, int ell) {
  if (!grid) throw grid_error("sector_kernel: null grid");
  if (!(beta > 0.0 && beta < grid->dim()))
    throw param_error("sector_kernel: need 0 < beta < N");
  if (ell < 0) throw param_error("sector_kernel: need ell >= 0");
  const CacheKey key{grid->hash(), beta, ell};
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
  }
  auto kern = std::make_shared<SectorKernel>();
  kern->grid = grid;
  kern->exponent = beta;
  kern->ell = ell;
  const std::string path = cache_path(*grid, beta, ell);
  if (path.empty() || !load_disk(path, *grid, beta, ell, kern->op)) {
    kern->op = build_operator(*grid, beta, ell);
    if (!path.empty()) store_disk(path, *grid, beta, ell, kern->op);
  }
  KernelPtr out = kern;
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_cache.emplace(key, out);
  return out;
}

double sector_kernel_value(int dim, double beta, int ell, double r, double s) {
  const GegenbauerRatio G(ell, dim);
  return kernel_point(dim, beta, G, r, s, std::abs(r - s));
}

void clear_kernel_cache() {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_cache.clear();
}

RadialFunction riesz_convolve(const ProblemParams& p, const RadialFunction& f, bool normalized) {
  return sector_convolve(p, f, 0, normalized);
}

RadialFunction sector_convolve(const ProblemParams& p, const RadialFunction& f, int ell,
                               bool normalized) {
  p.validate();
  if (f.grid->dim() != p.dim) throw grid_error("sector_convolve: grid dimension mismatch");
  KernelPtr k = sector_kernel(f.grid, p.mu, ell);
  Eigen::VectorXd out = k->op * f.values;
  if (normalized) out *= riesz_normalization(p);
  return RadialFunction(f.grid, std::move(out));
}

double newtonian_green_constant(int dim) {
  return gamma_fn(0.5 * dim - 1.0) / (4.0 * std::pow(M_PI, 0.5 * dim));
}

RadialFunction newtonian_potential(const RadialFunction& f, int dim, bool green_normalized) {
  if (f.grid->dim() != dim) throw grid_error("newtonian_potential: grid dimension mismatch");
  KernelPtr k = sector_kernel(f.grid, static_cast<double>(dim - 2), 0);
  Eigen::VectorXd out = k->op * f.values;
  if (green_normalized) out *= newtonian_green_constant(dim);
  return RadialFunction(f.grid, std::move(out));
}

double riesz_identity_gap(const ProblemParams& p, const RadialFunction& f) {
  RadialFunction conv = riesz_convolve(p, f, true);
  RadialFunction diff(f.grid, conv.values - f.values);
  const double denom = lp_norm(f, 2.0);
  if (denom == 0.0) throw param_error("riesz_identity_gap: zero function");
  return lp_norm(diff, 2.0) / denom;
}

HlsCheckResult hls_check(const ProblemParams& p, const RadialFunction& f,
                         const RadialFunction& h) {
  p.validate();
  f.check_same_grid(h, "hls_check");
  if ((f.values.array() < 0.0).any() || (h.values.array() < 0.0).any())
    throw param_error("hls_check: f, h must be nonnegative");
  const double t = 2.0 * p.dim / (2.0 * p.dim - p.mu);
  RadialFunction conv = riesz_convolve(p, f, /*normalized=*/false);
  HlsCheckResult res;
  res.lhs = l2_inner(conv, h);
  res.rhs = hls_sharp_constant(p) * lp_norm(f, t) * lp_norm(h, t);
  return res;
}

double prop41_check(const ProblemParams& p, const RadialFunction& f, double r_exp) {
  p.validate();
  if (!(r_exp >= 1.0)) throw param_error("prop41_check: need r >= 1");
  const double gap = (p.dim - p.mu) / p.dim;
  if (!(1.0 / r_exp > gap))
    throw param_error("prop41_check: exponent relation 1/r - 1/s = (N-mu)/N requires 1/r > (N-mu)/N");
  const double s_exp = 1.0 / (1.0 / r_exp - gap);
  RadialFunction conv = riesz_convolve(p, f, true);
  const double denom = lp_norm(f, r_exp);
  if (denom == 0.0) throw param_error("prop41_check: zero function");
  return lp_norm(conv, s_exp) / denom;
}

}  // namespace choq
