#include "choq/linearize.hpp"

#include <cmath>
#include <iostream>

#include "choq/constants.hpp"
#include "choq/riesz.hpp"

namespace choq {

namespace {

Eigen::VectorXd umu_values(const ProblemParams& p, const BubbleParams& b, const RadialGrid& g) {
  Eigen::VectorXd u(g.size());
  for (int i = 0; i < g.size(); ++i) u[i] = eval_Umu_radial(p, b, g.nodes()[i]);
  return u;
}

struct ScaledPencil {
  Eigen::MatrixXd A, B;
  Eigen::VectorXd d;  // congruence scaling, x = d .* y
};

ScaledPencil jacobi_scale(const SectorOperator& op) {
  ScaledPencil s;
  const int n = static_cast<int>(op.B.rows());
  s.d.resize(n);
  for (int i = 0; i < n; ++i) s.d[i] = 1.0 / std::sqrt(std::max(op.B(i, i), 1e-300));
  s.A = s.d.asDiagonal() * op.A * s.d.asDiagonal();
  s.B = s.d.asDiagonal() * op.B * s.d.asDiagonal();
  return s;
}

}  // namespace

SectorOperator assemble_sector(const ProblemParams& p, const BubbleParams& b, int ell,
                               const GridPtr& grid) {
  p.validate();
  if (ell < 0) throw param_error("assemble_sector: need ell >= 0");
  if (p.dim != 3 && p.dim != 4)
    std::cerr << "[choq] warning: nondegeneracy analysis is stated for N in {3,4}; N = " << p.dim
              << " is exploratory\n";
  SectorOperator op;
  op.params = p;
  op.grid = grid;
  op.ell = ell;
  op.B = sector_dirichlet_matrix(*grid, ell);

  const double q = p.two_star_mu();  // 2*_mu
  const double a_mu = riesz_normalization(p);
  const double omega = grid->omega();
  const Eigen::VectorXd u = umu_values(p, b, *grid);
  const Eigen::VectorXd uq1 = u.array().pow(q - 1.0).matrix();  // U^{2*_mu - 1}

  // nonlocal coupling  W(f,g) = a_mu w^2 int int K_ell (U^{q-1} f)(s) (U^{q-1} g)(r)
  const auto kern = sector_kernel(grid, p.mu, ell);
  Eigen::MatrixXd M = (grid->weights().array() * uq1.array()).matrix().asDiagonal() *
                      kern->op * uq1.asDiagonal();
  M *= a_mu * omega;
  const double scale = M.norm();
  Eigen::MatrixXd W = 0.5 * (M + M.transpose());
  op.asymmetry = scale > 0.0 ? (M - M.transpose()).norm() / scale : 0.0;

  // local potential  P(f,g) = int (I_mu * U^q) U^{q-2} f g
  const auto kern0 = sector_kernel(grid, p.mu, 0);
  const Eigen::VectorXd conv = a_mu * (kern0->op * u.array().pow(q).matrix());
  Eigen::VectorXd pot = omega * (grid->weights().array() * conv.array() *
                                 u.array().pow(q - 2.0))
                                    .matrix();

  // the r = cutoff DOF is pinned in B; keep A consistent there
  const int n = grid->size();
  W.row(n - 1).setZero();
  W.col(n - 1).setZero();
  pot[n - 1] = 0.0;

  op.A = op.B - q * W - (q - 1.0) * Eigen::MatrixXd(pot.asDiagonal());
  op.A = 0.5 * (op.A + op.A.transpose()).eval();
  return op;
}

SectorSpectrum sector_spectrum(const SectorOperator& op, int k) {
  if (k < 1 || k > op.A.rows()) throw param_error("sector_spectrum: bad eigenpair count");
  const ScaledPencil s = jacobi_scale(op);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.A, s.B,
                                                                   Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw quadrature_error("sector_spectrum: generalized eigensolver failed");
  SectorSpectrum out;
  out.eigenvalues = solver.eigenvalues().head(k);
  out.eigenvectors = s.d.asDiagonal() * solver.eigenvectors().leftCols(k);
  return out;
}

namespace {

// Sampled tangent profile in the Dirichlet space of the truncated domain.
// The ell = 0 dilation direction decays like r^{2-N} and is nonzero at the
// cutoff; subtracting its boundary value (a zero-Dirichlet-energy shift)
// removes the artificial kink the pinned DOF would otherwise create.
Eigen::VectorXd tangent_sample(const ProblemParams& p, const BubbleParams& b,
                               const RadialGrid& grid, int ell) {
  Eigen::VectorXd psi(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes()[i];
    psi[i] = ell == 0 ? tangent_dt_radial(p, b, r) : tangent_dr_radial(p, b, r);
  }
  if (ell == 0) psi.array() -= psi[grid.size() - 1];
  psi[grid.size() - 1] = 0.0;
  return psi;
}

}  // namespace

TangentResidual tangent_residual(const ProblemParams& p, const BubbleParams& b,
                                 const GridPtr& grid) {
  TangentResidual res;
  for (int ell = 0; ell <= 1; ++ell) {
    SectorOperator op = assemble_sector(p, b, ell, grid);
    Eigen::VectorXd psi = tangent_sample(p, b, *grid, ell);
    const ScaledPencil s = jacobi_scale(op);
    Eigen::VectorXd psis = psi.array() / s.d.array();  // y = d^{-1} x
    Eigen::VectorXd apsi = s.A * psis;
    Eigen::LDLT<Eigen::MatrixXd> bf(s.B);
    const double num = apsi.dot(bf.solve(apsi));
    const double den = psis.dot(s.B * psis);
    const double r = std::sqrt(std::max(num, 0.0) / den);
    (ell == 0 ? res.res_t : res.res_x) = r;
  }
  return res;
}

std::string verdict_name(SpectrumVerdict v) {
  switch (v) {
    case SpectrumVerdict::nondegenerate: return "nondegenerate";
    case SpectrumVerdict::degenerate: return "degenerate";
    default: return "inconclusive";
  }
}

SpectrumReport nondegeneracy_report(const ProblemParams& p, const BubbleParams& b, int ell_max,
                                    double tau, const GridPtr& grid, int eigs_per_sector) {
  p.validate();
  if (ell_max < 2) throw param_error("nondegeneracy_report: need ell_max >= 2");
  SpectrumReport rep;
  rep.params = p;
  rep.grid_json = grid->to_json();
  rep.experimental = (p.dim != 3);
  rep.tangent = tangent_residual(p, b, grid);
  rep.tau = tau > 0.0 ? tau : 10.0 * std::max(rep.tangent.res_t, rep.tangent.res_x);

  // analytic tangent profiles for the similarity scores
  const Eigen::VectorXd psi_t = tangent_sample(p, b, *grid, 0);
  const Eigen::VectorXd psi_x = tangent_sample(p, b, *grid, 1);

  rep.sectors.resize(ell_max + 1);
  for (int ell = 0; ell <= ell_max; ++ell) {
    SectorOperator op = assemble_sector(p, b, ell, grid);
    SectorSpectrum sp = sector_spectrum(op, eigs_per_sector);
    SectorReport& sr = rep.sectors[ell];
    sr.ell = ell;
    sr.multiplicity = AngularSector(ell, p.dim).multiplicity;
    sr.eigenvalues.assign(sp.eigenvalues.data(), sp.eigenvalues.data() + sp.eigenvalues.size());
    for (int k = 0; k < sp.eigenvalues.size(); ++k) {
      const double a = std::abs(sp.eigenvalues[k]);
      if (a < rep.tau) ++sr.zero_modes;
      else if (a < 3.0 * rep.tau) sr.ambiguous = true;
    }
    if (ell <= 1) {
      const Eigen::VectorXd& psi = ell == 0 ? psi_t : psi_x;
      const double psi_b = std::sqrt(psi.dot(op.B * psi));
      double best = 0.0;
      for (int k = 0; k < sp.eigenvalues.size(); ++k) {
        if (std::abs(sp.eigenvalues[k]) >= rep.tau) continue;
        const Eigen::VectorXd v = sp.eigenvectors.col(k);
        const double c = std::abs(v.dot(op.B * psi)) / (std::sqrt(v.dot(op.B * v)) * psi_b);
        best = std::max(best, c);
      }
      sr.tangent_similarity = best;
    }
  }

  rep.kernel_dimension = 0;
  bool ambiguous = false, higher_sector_modes = false;
  for (const auto& sr : rep.sectors) {
    rep.kernel_dimension += static_cast<long long>(sr.zero_modes) * sr.multiplicity;
    ambiguous = ambiguous || sr.ambiguous;
    if (sr.ell >= 2 && sr.zero_modes > 0) higher_sector_modes = true;
  }
  if (ambiguous) {
    rep.verdict = SpectrumVerdict::inconclusive;
  } else {
    const bool ok = rep.kernel_dimension == p.dim + 1 && !higher_sector_modes &&
                    rep.sectors[0].zero_modes == 1 && rep.sectors[1].zero_modes == 1;
    rep.verdict = ok ? SpectrumVerdict::nondegenerate : SpectrumVerdict::degenerate;
  }
  rep.nondegenerate = rep.verdict == SpectrumVerdict::nondegenerate;
  return rep;
}

}  // namespace choq
