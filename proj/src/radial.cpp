#include "choq/radial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "choq/gammafn.hpp"
#include "choq/quadrule.hpp"
#include "json.hpp"

namespace choq {

GridMapping parse_mapping(const std::string& name) {
  if (name == "log") return GridMapping::log_map;
  if (name == "algebraic") return GridMapping::algebraic;
  throw grid_error("unknown grid mapping '" + name + "' (expected 'log' or 'algebraic')");
}

std::string mapping_name(GridMapping m) {
  return m == GridMapping::log_map ? "log" : "algebraic";
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// Fornberg finite-difference weights for derivative `m` at point z over
// arbitrary nodes xs[0..n-1].
void fornberg(double z, const double* xs, int n, int m, double* out) {
  std::vector<double> c(static_cast<std::size_t>(n) * (m + 1), 0.0);
  auto C = [&](int i, int j) -> double& { return c[static_cast<std::size_t>(i) * (m + 1) + j]; };
  double c1 = 1.0;
  double c4 = xs[0] - z;
  C(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  for (int i = 0; i < n; ++i) out[i] = C(i, m);
}

// Gauss-Lobatto-Legendre nodes and weights on [-1, 1].
QuadRule gauss_lobatto(int n) {
  QuadRule q;
  q.x.resize(n);
  q.w.resize(n);
  const int m = n - 1;  // interior nodes are roots of P_m'
  auto legendre = [&](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = m * (p0 - x * p1) / (1.0 - x * x);
  };
  q.x[0] = -1.0;
  q.x[n - 1] = 1.0;
  for (int i = 1; i < n - 1; ++i) {
    // Newton on P_m' from a Chebyshev-like start
    double x = std::cos(M_PI * (m - i) / m);
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      legendre(x, p, dp);
      // d/dx P_m' from the Legendre ODE: (1-x^2) P'' = 2x P' - m(m+1) P
      const double ddp = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.x[i] = x;
  }
  std::sort(q.x.begin(), q.x.end());
  for (int i = 0; i < n; ++i) {
    double p, dp;
    legendre(q.x[i], p, dp);
    if (i == 0 || i == n - 1) p = (i == 0 && (m % 2)) ? -1.0 : 1.0;  // P_m(+-1) = (+-1)^m
    q.w[i] = 2.0 / (m * (m + 1.0) * p * p);
  }
  return q;
}

const QuadRule& lobatto8() {
  static const QuadRule q = gauss_lobatto(RadialGrid::kNodesPerPanel);
  return q;
}

// dphi_a/dxi at the Lobatto nodes (reference element)
const Eigen::Matrix<double, 8, 8>& lobatto8_diff() {
  static const Eigen::Matrix<double, 8, 8> D = [] {
    Eigen::Matrix<double, 8, 8> d;
    const QuadRule& q = lobatto8();
    double w[8];
    for (int i = 0; i < 8; ++i) {
      fornberg(q.x[i], q.x.data(), 8, 1, w);
      for (int a = 0; a < 8; ++a) d(i, a) = w[a];
    }
    return d;
  }();
  return D;
}

}  // namespace

RadialGrid::RadialGrid(int dim, double cutoff, int size, GridMapping mapping)
    : dim_(dim), cutoff_(cutoff), mapping_(mapping) {
  if (dim < 3) throw grid_error("RadialGrid: need N >= 3");
  if (!(cutoff > 0.0)) throw grid_error("RadialGrid: cutoff must be positive");
  if (size < 16) throw grid_error("RadialGrid: need at least 16 nodes");
  panels_ = std::max(3, static_cast<int>(std::lround(static_cast<double>(size) / kStride)));
  build();
}

double RadialGrid::r_of_x(double x) const {
  if (mapping_ == GridMapping::log_map) return std::exp(x);
  return cutoff_ * x * x * x;
}

double RadialGrid::x_of_r(double r) const {
  if (mapping_ == GridMapping::log_map) return std::log(r);
  return std::cbrt(r / cutoff_);
}

double RadialGrid::jacobian(double x) const {
  if (mapping_ == GridMapping::log_map) return std::exp(x);
  return 3.0 * cutoff_ * x * x;
}

int RadialGrid::panel_of_x(double x) const {
  const double w = panel_width_x();
  int p = static_cast<int>(std::floor((x - x_lo_) / w));
  return std::clamp(p, 0, panels_ - 1);
}

void RadialGrid::build() {
  omega_ = unit_sphere_area(dim_);
  if (mapping_ == GridMapping::log_map) {
    x_hi_ = std::log(cutoff_);
    x_lo_ = x_hi_ - kLogDecades * std::log(10.0);
  } else {
    x_lo_ = 0.0;
    x_hi_ = 1.0;
  }
  const int n = panels_ * kStride + 1;
  nodes_.resize(n);
  xcoord_.resize(n);
  weights_ = Eigen::VectorXd::Zero(n);
  panel_weights_.resize(panels_, kNodesPerPanel);
  const double w = (x_hi_ - x_lo_) / panels_;
  const QuadRule& lob = lobatto8();
  for (int p = 0; p < panels_; ++p) {
    const double a = x_lo_ + p * w;
    for (int k = 0; k < kNodesPerPanel; ++k) {
      const int i = node_id(p, k);
      const double x = a + 0.5 * w * (1.0 + lob.x[k]);
      const double r = r_of_x(x);
      xcoord_[i] = x;
      nodes_[i] = r;
      const double wk = 0.5 * w * lob.w[k] * jacobian(x) * std::pow(r, dim_ - 1);
      panel_weights_(p, k) = wk;
      weights_[i] += wk;
    }
  }
  std::uint64_t h = 1469598103934665603ull;
  h = fnv1a(&dim_, sizeof dim_, h);
  const int m = static_cast<int>(mapping_);
  h = fnv1a(&m, sizeof m, h);
  h = fnv1a(&cutoff_, sizeof cutoff_, h);
  h = fnv1a(&n, sizeof n, h);
  h = fnv1a(nodes_.data(), sizeof(double) * n, h);
  hash_ = h;
}

const Eigen::MatrixXd& RadialGrid::diff_matrix() const {
  if (diff_) return *diff_;
  const int n = size();
  auto D = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n));
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n);
  const auto& Dref = lobatto8_diff();
  const double half_w = 0.5 * panel_width_x();
  for (int p = 0; p < panels_; ++p) {
    for (int i = 0; i < kNodesPerPanel; ++i) {
      const int gi = node_id(p, i);
      const double inv_jac = 1.0 / (jacobian(xcoord_[gi]) * half_w);
      for (int a = 0; a < kNodesPerPanel; ++a)
        (*D)(gi, node_id(p, a)) += Dref(i, a) * inv_jac;
      count[gi] += 1.0;
    }
  }
  for (int i = 0; i < n; ++i)
    if (count[i] > 1.0) D->row(i) /= count[i];  // average one-sided edge derivatives
  diff_ = D;
  return *diff_;
}

double RadialGrid::radial_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  return (weights_.array() * f.array() * g.array()).sum();
}

std::string RadialGrid::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["cutoff"] = cutoff_;
  j["size"] = size();
  j["mapping"] = mapping_name(mapping_);
  return j.dump();
}

std::shared_ptr<const RadialGrid> RadialGrid::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  return make_grid(j.at("dim").get<int>(), j.at("cutoff").get<double>(),
                   j.at("size").get<int>(), j.at("mapping").get<std::string>());
}

GridPtr make_grid(int dim, double cutoff, int size, GridMapping mapping) {
  return std::make_shared<const RadialGrid>(dim, cutoff, size, mapping);
}

GridPtr make_grid(int dim, double cutoff, int size, const std::string& mapping) {
  return make_grid(dim, cutoff, size, parse_mapping(mapping));
}

RadialFunction::RadialFunction(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) throw grid_error("RadialFunction: value/node count mismatch");
  if (!values.allFinite()) throw grid_error("RadialFunction: non-finite values");
}

RadialFunction RadialFunction::sample(GridPtr g, const std::function<double(double)>& f) {
  Eigen::VectorXd v(g->size());
  for (int i = 0; i < g->size(); ++i) v[i] = f(g->nodes()[i]);
  return RadialFunction(std::move(g), std::move(v));
}

void RadialFunction::check_same_grid(const RadialFunction& other, const char* what) const {
  if (!grid || !other.grid || grid->hash() != other.grid->hash())
    throw grid_error(std::string(what) + ": grid mismatch");
}

double RadialFunction::eval(double r) const {
  if (r >= grid->cutoff()) return 0.0;
  double x;
  int p;
  if (r <= grid->r_min()) {
    // panel-0 polynomial extrapolation, clamped to one panel width below
    // the grid (r_min is ~1e-12 of the cutoff, smooth profiles are flat)
    p = 0;
    x = (r > 0.0) ? grid->x_of_r(r) : grid->x_min() - grid->panel_width_x();
    x = std::max(x, grid->x_min() - grid->panel_width_x());
  } else {
    x = grid->x_of_r(r);
    p = grid->panel_of_x(x);
  }
  double w[RadialGrid::kNodesPerPanel];
  PanelInterp::weights(*grid, p, x, w);
  double s = 0.0;
  for (int k = 0; k < RadialGrid::kNodesPerPanel; ++k)
    s += w[k] * values[grid->node_id(p, k)];
  return s;
}

void PanelInterp::weights(const RadialGrid& g, int panel, double x,
                          double out[RadialGrid::kNodesPerPanel]) {
  constexpr int npp = RadialGrid::kNodesPerPanel;
  double xs[npp];
  for (int k = 0; k < npp; ++k) xs[k] = g.xcoord()[g.node_id(panel, k)];
  double bw[npp];
  for (int k = 0; k < npp; ++k) {
    double b = 1.0;
    for (int j = 0; j < npp; ++j)
      if (j != k) b *= (xs[k] - xs[j]);
    bw[k] = 1.0 / b;
  }
  double denom = 0.0;
  for (int k = 0; k < npp; ++k) {
    const double d = x - xs[k];
    if (d == 0.0) {
      for (int j = 0; j < npp; ++j) out[j] = (j == k) ? 1.0 : 0.0;
      return;
    }
    out[k] = bw[k] / d;
    denom += out[k];
  }
  for (int k = 0; k < npp; ++k) out[k] /= denom;
}

double integrate(const RadialFunction& f) {
  return f.grid->omega() * f.grid->weights().dot(f.values);
}

double lp_norm(const RadialFunction& f, double p) {
  if (!(p >= 1.0)) throw param_error("lp_norm: need p >= 1");
  const auto& w = f.grid->weights();
  double s = (w.array() * f.values.array().abs().pow(p)).sum();
  return std::pow(f.grid->omega() * s, 1.0 / p);
}

double l2_inner(const RadialFunction& f, const RadialFunction& g) {
  f.check_same_grid(g, "l2_inner");
  return f.grid->omega() * f.grid->radial_dot(f.values, g.values);
}

namespace {

// per-grid memo of assembled sector forms
struct FormCache {
  std::mutex mutex;
  std::map<std::pair<std::uint64_t, int>, std::shared_ptr<const Eigen::MatrixXd>> map;
};

FormCache& form_cache() {
  static FormCache c;
  return c;
}

std::shared_ptr<const Eigen::MatrixXd> dirichlet_matrix_cached(const RadialGrid& grid, int ell) {
  auto& c = form_cache();
  const auto key = std::make_pair(grid.hash(), ell);
  {
    std::lock_guard<std::mutex> lock(c.mutex);
    auto it = c.map.find(key);
    if (it != c.map.end()) return it->second;
  }
  auto B = std::make_shared<Eigen::MatrixXd>(sector_dirichlet_matrix(grid, ell));
  std::lock_guard<std::mutex> lock(c.mutex);
  c.map.emplace(key, B);
  return B;
}

}  // namespace

double sector_laplacian_form(const RadialFunction& f, const RadialFunction& g, int ell) {
  f.check_same_grid(g, "sector_laplacian_form");
  const auto B = dirichlet_matrix_cached(*f.grid, ell);
  return f.values.dot(*B * g.values);
}

Eigen::MatrixXd sector_dirichlet_matrix(const RadialGrid& grid, int ell) {
  const int n = grid.size();
  constexpr int npp = RadialGrid::kNodesPerPanel;
  const auto& Dref = lobatto8_diff();
  const QuadRule& lob = lobatto8();
  const double half_w = 0.5 * grid.panel_width_x();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  // elementwise stiffness: int f'(r) g'(r) r^{N-1} dr
  //   = sum_q [lob_w * half_w * r^{N-1} / jac] (f_xi/half_w)(g_xi/half_w)
  for (int p = 0; p < grid.panels(); ++p) {
    for (int q = 0; q < npp; ++q) {
      const int gq = grid.node_id(p, q);
      const double x = grid.xcoord()[gq];
      const double wq = lob.w[q] * half_w * std::pow(grid.nodes()[gq], grid.dim() - 1) /
                        (grid.jacobian(x) * half_w * half_w);
      for (int a = 0; a < npp; ++a) {
        const double da = Dref(q, a);
        if (da == 0.0) continue;
        for (int b = 0; b < npp; ++b)
          B(grid.node_id(p, a), grid.node_id(p, b)) += wq * da * Dref(q, b);
      }
    }
  }
  if (ell > 0) {
    const double cent = static_cast<double>(ell) * (ell + grid.dim() - 2);
    for (int i = 0; i < n; ++i)
      B(i, i) += cent * grid.weights()[i] / (grid.nodes()[i] * grid.nodes()[i]);
  }
  B *= grid.omega();
  // homogeneous Dirichlet at r = cutoff: pin the last DOF
  B.row(n - 1).setZero();
  B.col(n - 1).setZero();
  B(n - 1, n - 1) = 1.0;
  B = 0.5 * (B + B.transpose()).eval();
  return B;
}

AngularSector::AngularSector(int ell_, int dim) : ell(ell_) {
  if (ell < 0 || dim < 3) throw param_error("AngularSector: need ell >= 0, N >= 3");
  // (2 ell + N - 2) (ell + N - 3)! / (ell! (N - 2)!)
  //   = (2 ell + N - 2) * prod_{k=1..N-3} (ell + k) / (N - 2)!
  long double m = 2.0L * ell + dim - 2;
  for (int k = 1; k <= dim - 3; ++k) m *= static_cast<long double>(ell + k);
  for (int k = 2; k <= dim - 2; ++k) m /= static_cast<long double>(k);
  multiplicity = static_cast<long long>(std::llroundl(m));
}

}  // namespace choq
