#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "choq/bubbles.hpp"
#include "choq/params.hpp"
#include "choq/radial.hpp"

// Sector-by-sector assembly and spectral analysis of the operator
// linearized at the minimizer-family bubble:
//   A_mu(psi) = -Lap psi - 2*_mu ( I_mu * (U^{2*_mu-1} psi) ) U^{2*_mu-1}
//               - (2*_mu - 1) ( I_mu * U^{2*_mu} ) U^{2*_mu-2} psi .
// On sector ell the quadratic form is  A = B - 2*_mu W_ell - (2*_mu-1) P
// with B the sector Dirichlet form, W_ell the nonlocal coupling through
// the sector kernel, and P the local potential term.  Zero modes of the
// (A, B) pencil are counted per sector against a tolerance calibrated on
// the analytic tangent fields; the kernel dimension tally decides the
// nondegeneracy verdict (expected N+1: one dilation + N translations).

namespace choq {

struct SectorOperator {
  ProblemParams params;
  GridPtr grid;
  int ell = 0;
  Eigen::MatrixXd A;   // linearized quadratic form (symmetrized)
  Eigen::MatrixXd B;   // sector Dirichlet Gram, positive definite
  double asymmetry = 0.0;  // relative defect of W before symmetrization
};

SectorOperator assemble_sector(const ProblemParams& p, const BubbleParams& b, int ell,
                               const GridPtr& grid);

struct SectorSpectrum {
  Eigen::VectorXd eigenvalues;   // k smallest, ascending
  Eigen::MatrixXd eigenvectors;  // matching columns, B-orthonormal
};

// k smallest eigenpairs of A x = lambda B x (Jacobi-rescaled congruence
// keeps the Cholesky of B well conditioned on wide grids).
SectorSpectrum sector_spectrum(const SectorOperator& op, int k);

struct TangentResidual {
  double res_t = 0.0;  // d/dt U direction, sector 0
  double res_x = 0.0;  // d/dx_i U direction, sector 1
};

// || A psi ||_{B^{-1}} / || psi ||_B for the sampled analytic tangents.
TangentResidual tangent_residual(const ProblemParams& p, const BubbleParams& b,
                                 const GridPtr& grid);

enum class SpectrumVerdict { nondegenerate, degenerate, inconclusive };
std::string verdict_name(SpectrumVerdict v);

struct SectorReport {
  int ell = 0;
  long long multiplicity = 1;
  std::vector<double> eigenvalues;  // smallest few, ascending
  int zero_modes = 0;               // |lambda| < tau
  bool ambiguous = false;           // some |lambda| in [tau, 3 tau)
  double tangent_similarity = 0.0;  // |<v, psi>_B| cosine vs analytic tangent
};

struct SpectrumReport {
  ProblemParams params;
  std::string grid_json;
  double tau = 0.0;
  TangentResidual tangent;
  std::vector<SectorReport> sectors;
  long long kernel_dimension = 0;
  SpectrumVerdict verdict = SpectrumVerdict::inconclusive;
  bool nondegenerate = false;
  bool experimental = false;  // N != 3 (beyond the proof's default scope)
};

// Aggregate sector spectra for ell = 0..ell_max.  tau <= 0 selects the
// self-calibrated tolerance 10 x tangent_residual.  An eigenvalue falling
// in [tau, 3 tau) marks the report inconclusive rather than being rounded
// either way.
SpectrumReport nondegeneracy_report(const ProblemParams& p, const BubbleParams& b, int ell_max,
                                    double tau, const GridPtr& grid, int eigs_per_sector = 6);

}  // namespace choq
