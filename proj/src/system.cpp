#include "choq/system.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "choq/bubbles.hpp"
#include "choq/constants.hpp"
#include "choq/riesz.hpp"

namespace choq {

namespace {

void require_positive(const RadialFunction& f, const char* what) {
  if ((f.values.array() <= 0.0).any())
    throw param_error(std::string(what) + ": profile must be strictly positive");
}

Eigen::VectorXd pow_vec(const Eigen::VectorXd& v, double e) {
  return v.array().abs().pow(e).matrix();
}

// int (I_mu * |u|^{2*_mu}) |u|^{2*_mu} dx  via the ell = 0 operator
double nonlocal_energy_integral(const ProblemParams& p, const RadialFunction& u) {
  const auto kern = sector_kernel(u.grid, p.mu, 0);
  const Eigen::VectorXd h = pow_vec(u.values, p.two_star_mu());
  const Eigen::VectorXd conv = kern->op * h;
  const double a_mu = riesz_normalization(p);
  return a_mu * u.grid->omega() * u.grid->radial_dot(conv, h);
}

double dirichlet_product(const RadialFunction& f, const RadialFunction& g) {
  return sector_laplacian_form(f, g, 0);
}

// half-height radius of a decaying profile (bisection on the interpolant)
double half_height_radius(const RadialFunction& u) {
  const double u0 = u.eval(0.0);
  if (!(u0 > 0.0)) return 1.0;
  const auto& r = u.grid->nodes();
  int hi = -1;
  for (int i = 0; i < u.size(); ++i) {
    if (u.values[i] < 0.5 * u0) {
      hi = i;
      break;
    }
  }
  if (hi <= 0) return r[u.size() - 1];
  double a = hi > 0 ? r[hi - 1] : u.grid->r_min();
  double b = r[hi];
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (a + b);
    if (u.eval(m) > 0.5 * u0)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

SolutionPair::SolutionPair(RadialFunction u_, RadialFunction v_, ProblemParams p, SystemNorm norm)
    : u(std::move(u_)), v(std::move(v_)), params(p), normalization(norm) {
  u.check_same_grid(v, "SolutionPair");
  require_positive(u, "SolutionPair u");
  require_positive(v, "SolutionPair v");
}

SystemResidual system_residual(const SolutionPair& sp) {
  const ProblemParams& p = sp.params;
  const double q = p.two_star_mu();
  // u-equation
  Eigen::VectorXd dens = sp.v.values.array() * pow_vec(sp.u.values, q - 1.0).array();
  RadialFunction densf(sp.u.grid, std::move(dens));
  RadialFunction pu = newtonian_potential(densf, p.dim, /*green_normalized=*/false);
  if (sp.normalization == SystemNorm::green) pu.values *= newtonian_green_constant(p.dim);
  // v-equation
  RadialFunction h(sp.u.grid, pow_vec(sp.u.values, q));
  const auto kern = sector_kernel(sp.u.grid, p.mu, 0);
  RadialFunction pv(sp.u.grid, kern->op * h.values);

  SystemResidual res;
  RadialFunction du(sp.u.grid, pu.values - sp.u.values);
  RadialFunction dv(sp.u.grid, pv.values - sp.v.values);
  res.res_u = lp_norm(du, 2.0) / lp_norm(sp.u, 2.0);
  res.res_v = lp_norm(dv, 2.0) / lp_norm(sp.v, 2.0);
  return res;
}

double system_bubble_amplitude(const ProblemParams& p) {
  p.validate();
  const double N = p.dim;
  const double d1 = power_convolution_constant(p.dim, p.mu);
  const double d2 = power_convolution_constant(p.dim, N - 2.0);
  return std::pow(d1 * d2, -(N - 2.0) / (2.0 * (N - p.mu + 2.0)));
}

SolutionPair system_bubble_pair(const ProblemParams& p, const GridPtr& grid, double t) {
  const double b = system_bubble_amplitude(p);
  const double nu = 0.5 * (p.dim - 2);
  const double q = p.two_star_mu();
  const double d1 = power_convolution_constant(p.dim, p.mu);
  RadialFunction u = RadialFunction::sample(
      grid, [&](double r) { return b * std::pow(t / (t * t + r * r), nu); });
  RadialFunction v = RadialFunction::sample(grid, [&](double r) {
    return std::pow(b, q) * d1 * std::pow(t / (t * t + r * r), 0.5 * p.mu);
  });
  return SolutionPair(std::move(u), std::move(v), p);
}

double pde_residual(const ProblemParams& p, const RadialFunction& u) {
  p.validate();
  require_positive(u, "pde_residual");
  const double q = p.two_star_mu();
  const double a_mu = riesz_normalization(p);
  const auto kern = sector_kernel(u.grid, p.mu, 0);
  const Eigen::VectorXd conv = a_mu * (kern->op * pow_vec(u.values, q));
  // (I_mu * u^q) u^{q-1} as a node vector
  const Eigen::VectorXd rhs_density = conv.array() * pow_vec(u.values, q - 1.0).array();

  const double u_norm = std::sqrt(dirichlet_product(u, u));
  const double scale = u_norm + std::pow(u_norm, 2.0 * q - 1.0);

  const double th = half_height_radius(u);
  const std::vector<double> centers = {0.0, 0.5 * th, th, 2.0 * th, 4.0 * th};
  double worst = 0.0;
  for (const double c : centers) {
    const double sigma = std::max(0.5 * c, 0.5 * th);
    RadialFunction bump = RadialFunction::sample(u.grid, [&](double r) {
      const double z = (r - c) / sigma;
      return std::exp(-z * z);
    });
    const double lhs = dirichlet_product(u, bump);
    const double rhs = u.grid->omega() * u.grid->radial_dot(rhs_density, bump.values);
    const double bump_norm = std::sqrt(dirichlet_product(bump, bump));
    worst = std::max(worst, std::abs(lhs - rhs) / (bump_norm * scale));
  }
  return worst;
}

double energy(const ProblemParams& p, const RadialFunction& u) {
  p.validate();
  const double dir = dirichlet_product(u, u);
  if (dir == 0.0) return 0.0;
  return 0.5 * dir - nonlocal_energy_integral(p, u) / (2.0 * p.two_star_mu());
}

double rayleigh_quotient(const ProblemParams& p, const RadialFunction& u) {
  p.validate();
  const double dir = dirichlet_product(u, u);
  if (dir == 0.0) throw param_error("rayleigh_quotient: zero function");
  const double theta = (p.dim - 2.0) / (2.0 * p.dim - p.mu);
  return dir / std::pow(nonlocal_energy_integral(p, u), theta);
}

MinimizeResult minimize_rayleigh(const ProblemParams& p, const RadialFunction& u0,
                                 const MinimizeOptions& opts) {
  p.validate();
  if ((u0.values.array() > 0.0).count() == 0)
    throw param_error("minimize_rayleigh: u0 must be positive somewhere");
  const GridPtr grid = u0.grid;
  const auto kern = sector_kernel(grid, p.mu, 0);
  const double a_mu = riesz_normalization(p);
  const double q = p.two_star_mu();
  const double theta = (p.dim - 2.0) / (2.0 * p.dim - p.mu);
  const double omega = grid->omega();
  const Eigen::VectorXd& w = grid->weights();

  Eigen::MatrixXd B0 = sector_dirichlet_matrix(*grid, 0);
  Eigen::LDLT<Eigen::MatrixXd> B0f(B0);

  auto quotient_parts = [&](const Eigen::VectorXd& u, double& K, double& J,
                            Eigen::VectorXd& h, Eigen::VectorXd& conv) {
    K = u.dot(B0 * u);
    h = u.array().abs().pow(q).matrix();
    conv = kern->op * h;
    J = a_mu * omega * (w.array() * conv.array() * h.array()).sum();
  };

  Eigen::VectorXd u = u0.values;
  double K, J;
  Eigen::VectorXd h, conv;
  quotient_parts(u, K, J, h, conv);
  if (!(J > 0.0)) throw param_error("minimize_rayleigh: nonlocal term vanishes for u0");
  u /= std::sqrt(K);
  K = 1.0;
  h = u.array().abs().pow(q).matrix();
  conv = kern->op * h;
  J = a_mu * omega * (w.array() * conv.array() * h.array()).sum();
  double Q = K / std::pow(J, theta);

  int iter = 0;
  double step = opts.step;
  for (iter = 1; iter <= opts.max_iters; ++iter) {
    // Euclidean gradient of the discrete quotient
    Eigen::VectorXd gradJ =
        q * u.array().sign() * u.array().abs().pow(q - 1.0) *
        (a_mu * omega) *
        (w.array() * conv.array() + (kern->op.transpose() * (w.array() * h.array()).matrix()).array());
    Eigen::VectorXd gradQ = (2.0 * (B0 * u) - (K * theta / J) * gradJ) / std::pow(J, theta);
    Eigen::VectorXd dir = B0f.solve(gradQ);  // Sobolev gradient

    bool accepted = false;
    double alpha = step;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::VectorXd cand = u - alpha * dir;
      double Kc, Jc;
      Eigen::VectorXd hc, convc;
      quotient_parts(cand, Kc, Jc, hc, convc);
      if (Kc > 0.0 && Jc > 0.0) {
        cand /= std::sqrt(Kc);
        quotient_parts(cand, Kc, Jc, hc, convc);
        const double Qc = Kc / std::pow(Jc, theta);
        if (Qc < Q) {
          const double rel_drop = (Q - Qc) / Q;
          u = std::move(cand);
          K = Kc;
          J = Jc;
          h = std::move(hc);
          conv = std::move(convc);
          Q = Qc;
          accepted = true;
          step = std::min(alpha * 2.0, opts.step);
          if (rel_drop < opts.tol) {
            return {RadialFunction(grid, u), Q, iter};
          }
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // no descent direction at line-search resolution: stationary
      return {RadialFunction(grid, u), Q, iter};
    }
  }
  throw convergence_error("minimize_rayleigh: iteration budget exhausted", Q, iter);
}

SolutionPair fixed_point_solve(const ProblemParams& p, const RadialFunction& u0,
                               const FixedPointOptions& opts) {
  p.validate();
  require_positive(u0, "fixed_point_solve u0");
  const GridPtr grid = u0.grid;
  const double q = p.two_star_mu();
  const auto kern_mu = sector_kernel(grid, p.mu, 0);
  const auto kern_newton = sector_kernel(grid, static_cast<double>(p.dim - 2), 0);

  auto sweep_raw = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const Eigen::VectorXd h = u.array().pow(q).matrix();
    const Eigen::VectorXd v = kern_mu->op * h;
    const Eigen::VectorXd dens = v.array() * u.array().pow(q - 1.0);
    return kern_newton->op * dens;
  };

  auto gauge_fix = [&](const RadialFunction& f) -> Eigen::VectorXd {
    const double f0 = f.eval(0.0);
    if (!(f0 > 0.0)) throw convergence_error("fixed_point_solve: iterate lost positivity", f0, 0);
    const double rh = half_height_radius(f);
    const double edge = 0.98 * grid->cutoff();
    const double edge_val = f.eval(edge);
    Eigen::VectorXd out(grid->size());
    for (int i = 0; i < grid->size(); ++i) {
      const double rr = rh * grid->nodes()[i];
      double val;
      if (rr < edge)
        val = f.eval(rr);
      else  // power-law tail continuation past the cutoff
        val = edge_val * std::pow(edge / rr, p.dim - 2);
      out[i] = val / f0;
    }
    return out;
  };

  // gauge-fix the start as well so successive iterates are comparable
  Eigen::VectorXd u = gauge_fix(u0);
  double prev_change = std::numeric_limits<double>::max();
  int grow = 0;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    RadialFunction tu(grid, sweep_raw(u));
    if (!tu.values.allFinite())
      throw convergence_error("fixed_point_solve: iterate diverged", NAN, sweep);
    Eigen::VectorXd next = gauge_fix(tu);
    if (opts.damping < 1.0) next = (1.0 - opts.damping) * u + opts.damping * next;
    const double change = (next - u).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff();
    u = std::move(next);
    if (change < opts.tol || sweep == opts.max_sweeps) {
      if (change >= opts.tol)
        throw convergence_error("fixed_point_solve: no convergence in sweep budget", change, sweep);
      break;
    }
    if (change > prev_change * 1.5) {
      if (++grow >= 4)
        throw convergence_error("fixed_point_solve: oscillation detected", change, sweep);
    } else {
      grow = 0;
    }
    prev_change = change;
  }

  // rescale the gauge-fixed shape to the amplitude that closes the system:
  // T(alpha u) = alpha^{2q-1} T(u), so alpha^{2(q-1)} <T(u),u>/<u,u> = 1.
  const Eigen::VectorXd tu = sweep_raw(u);
  const double beta = grid->radial_dot(tu, u) / grid->radial_dot(u, u);
  const double alpha = std::pow(beta, -1.0 / (2.0 * (q - 1.0)));
  Eigen::VectorXd ustar = alpha * u;
  Eigen::VectorXd vstar = kern_mu->op * ustar.array().pow(q).matrix();
  return SolutionPair(RadialFunction(grid, std::move(ustar)),
                      RadialFunction(grid, std::move(vstar)), p);
}

}  // namespace choq
