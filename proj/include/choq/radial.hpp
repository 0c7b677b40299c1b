#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "choq/errors.hpp"

// Radial grids, quadrature, norms and per-sector differential forms --- the
// discretization substrate shared by every other module.
//
// A grid is a conforming spectral-element mesh of P panels, uniform in a
// mapped coordinate x, with 8 Gauss-Lobatto nodes per panel and shared
// panel-edge nodes (7P + 1 nodes in total):
//   mapping "log":        r = exp(x), 12 decades below the cutoff R
//   mapping "algebraic":  r = R y^3 with y in (0, 1]
// Lobatto panels make the Dirichlet stiffness the exact elementwise
// Galerkin form of the continuous piecewise-polynomial space, so the
// (A, B) eigen-pencils downstream carry no spurious near-null modes.
//
// Quadrature weights carry the map Jacobian and the r^{N-1} volume factor,
// so sum(w_i f_i) ~ int_0^R f(r) r^{N-1} dr.  integrate() additionally
// multiplies by the unit-sphere area, so module-level formulas read like
// full-space integrals.  The homogeneous Dirichlet condition at r = R is
// imposed inside the form matrices (last DOF pinned), not on the samples.

namespace choq {

enum class GridMapping { log_map, algebraic };

GridMapping parse_mapping(const std::string& name);
std::string mapping_name(GridMapping m);

class RadialGrid {
 public:
  static constexpr int kNodesPerPanel = 8;  // Lobatto nodes, endpoints shared
  static constexpr int kStride = kNodesPerPanel - 1;
  // Dynamic range of the log mapping: r_min = R * 10^{-kLogDecades}.
  static constexpr double kLogDecades = 12.0;
  // Exponent of the algebraic mapping r = R y^a.
  static constexpr int kAlgebraicPower = 3;

  // `size` is a requested node count; the actual grid has 7P + 1 nodes for
  // the nearest panel count P.
  RadialGrid(int dim, double cutoff, int size, GridMapping mapping);

  int dim() const { return dim_; }
  double cutoff() const { return cutoff_; }
  GridMapping mapping() const { return mapping_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int panels() const { return panels_; }
  std::uint64_t hash() const { return hash_; }
  double omega() const { return omega_; }  // area of S^{N-1}

  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }  // accumulated
  const Eigen::VectorXd& xcoord() const { return xcoord_; }
  // quadrature weight of local node k of panel p (shared nodes split)
  double panel_weight(int panel, int k) const { return panel_weights_(panel, k); }

  double r_min() const { return nodes_[0]; }

  double r_of_x(double x) const;
  double x_of_r(double r) const;
  double jacobian(double x) const;  // dr/dx
  double x_min() const { return x_lo_; }
  double x_max() const { return x_hi_; }
  double panel_width_x() const { return (x_hi_ - x_lo_) / panels_; }
  int panel_of_x(double x) const;
  int node_id(int panel, int k) const { return panel * kStride + k; }

  // Global first-derivative matrix d/dr (panel-spectral differentiation,
  // averaged at shared nodes).  For forms prefer sector_dirichlet_matrix.
  const Eigen::MatrixXd& diff_matrix() const;

  // sum of w_i f_i g_i  ==  int f g r^{N-1} dr   (no sphere factor)
  double radial_dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

  std::string to_json() const;
  static std::shared_ptr<const RadialGrid> from_json(const std::string& text);

 private:
  void build();

  int dim_;
  double cutoff_;
  GridMapping mapping_;
  int panels_ = 0;
  double x_lo_ = 0.0, x_hi_ = 1.0;
  double omega_ = 0.0;
  Eigen::VectorXd nodes_, weights_, xcoord_;
  Eigen::MatrixXd panel_weights_;
  std::uint64_t hash_ = 0;
  mutable std::shared_ptr<Eigen::MatrixXd> diff_;  // lazy, immutable after
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int dim, double cutoff, int size, GridMapping mapping = GridMapping::log_map);
GridPtr make_grid(int dim, double cutoff, int size, const std::string& mapping);

// Samples of a radial profile on a grid, with panel-local polynomial
// interpolation for off-node evaluation.
struct RadialFunction {
  GridPtr grid;
  Eigen::VectorXd values;

  RadialFunction() = default;
  RadialFunction(GridPtr g, Eigen::VectorXd v);

  static RadialFunction sample(GridPtr g, const std::function<double(double)>& f);

  int size() const { return static_cast<int>(values.size()); }

  // Interpolated value; 0 beyond the cutoff, panel-0 extrapolation below
  // the first node.
  double eval(double r) const;

  void check_same_grid(const RadialFunction& other, const char* what) const;
};

// int_{R^N} f(|x|) dx truncated at the cutoff (sphere factor included).
double integrate(const RadialFunction& f);

// (int |f|^p dx)^{1/p} on the truncated domain, p >= 1.
double lp_norm(const RadialFunction& f, double p);

// L2(R^N) inner product of two radial profiles.
double l2_inner(const RadialFunction& f, const RadialFunction& g);

// Dirichlet form of the sector-ell Laplacian:
//   omega * int [ f' g' + ell(ell+N-2) f g / r^2 ] r^{N-1} dr
double sector_laplacian_form(const RadialFunction& f, const RadialFunction& g, int ell);

// Matrix of the form above on the collocation values: exact spectral-
// element stiffness plus the centrifugal mass, symmetric positive
// definite, with the r = R Dirichlet DOF pinned to a unit diagonal.
Eigen::MatrixXd sector_dirichlet_matrix(const RadialGrid& grid, int ell);

// Number of degree-ell spherical harmonics in dimension N.
struct AngularSector {
  int ell = 0;
  long long multiplicity = 1;
  AngularSector(int ell, int dim);
};

// Lagrange interpolation weights of panel nodes at an off-node point.
struct PanelInterp {
  static void weights(const RadialGrid& g, int panel, double x,
                      double out[RadialGrid::kNodesPerPanel]);
};

}  // namespace choq
