#include "choq/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "choq/constants.hpp"

namespace choq {

BubbleParams::BubbleParams(double c, double t, VecN xi)
    : amplitude(c), width(t), center(std::move(xi)) {
  validate();
}

void BubbleParams::validate() const {
  if (!(amplitude > 0.0)) throw param_error("BubbleParams: amplitude must be positive");
  if (!(width > 0.0)) throw param_error("BubbleParams: width must be positive");
  if (center.size() < 3) throw param_error("BubbleParams: center needs N >= 3 components");
}

double BubbleParams::standard_amplitude(int dim) {
  return std::pow(static_cast<double>(dim) * (dim - 2), 0.25 * (dim - 2));
}

BubbleParams BubbleParams::standard(int dim, double t) {
  return BubbleParams(standard_amplitude(dim), t, VecN::Zero(dim));
}

double eval_U0(const BubbleParams& b, const VecN& x) {
  if (x.size() != b.center.size()) throw param_error("eval_U0: point dimension mismatch");
  return eval_U0_radial(b, b.dim(), (x - b.center).norm());
}

double eval_U0_radial(const BubbleParams& b, int dim, double rho) {
  const double t = b.width;
  return b.amplitude * std::pow(t / (t * t + rho * rho), 0.5 * (dim - 2));
}

double umu_amplitude(const ProblemParams& p) {
  static std::mutex mtx;
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(p.dim, p.mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double a = bubble_amplitude(p) * BubbleParams::standard_amplitude(p.dim);
  cache[key] = a;
  return a;
}

double eval_Umu(const ProblemParams& p, const BubbleParams& b, const VecN& x) {
  if (x.size() != b.center.size()) throw param_error("eval_Umu: point dimension mismatch");
  return eval_Umu_radial(p, b, (x - b.center).norm());
}

double eval_Umu_radial(const ProblemParams& p, const BubbleParams& b, double rho) {
  const double t = b.width;
  return umu_amplitude(p) * std::pow(t / (t * t + rho * rho), 0.5 * (p.dim - 2));
}

double hls_extremal(double gamma, const VecN& a, double A, const VecN& x, const ProblemParams& p) {
  if (gamma == 0.0) throw param_error("hls_extremal: gamma must be nonzero");
  const double q2 = gamma * gamma + (x - a).squaredNorm();
  return A * std::pow(q2, -0.5 * (2.0 * p.dim - p.mu));
}

double tangent_dt(const ProblemParams& p, const BubbleParams& b, const VecN& x) {
  return tangent_dt_radial(p, b, (x - b.center).norm());
}

double tangent_dt_radial(const ProblemParams& p, const BubbleParams& b, double rho) {
  // d/dt [ t/(t^2+rho^2) ]^nu = U * nu (rho^2 - t^2) / ( t (t^2 + rho^2) )
  const double t = b.width;
  const double nu = 0.5 * (p.dim - 2);
  const double u = eval_Umu_radial(p, b, rho);
  return u * nu * (rho * rho - t * t) / (t * (t * t + rho * rho));
}

double tangent_di(const ProblemParams& p, const BubbleParams& b, const VecN& x, int axis) {
  if (axis < 1 || axis > p.dim) throw param_error("tangent_di: axis out of range");
  const VecN d = x - b.center;
  const double rho = d.norm();
  if (rho == 0.0) return 0.0;
  return tangent_dr_radial(p, b, rho) * d[axis - 1] / rho;
}

double tangent_dr_radial(const ProblemParams& p, const BubbleParams& b, double rho) {
  const double t = b.width;
  const double nu = 0.5 * (p.dim - 2);
  const double u = eval_Umu_radial(p, b, rho);
  return -2.0 * nu * rho / (t * t + rho * rho) * u;
}

namespace {

struct FitWork {
  const std::vector<std::pair<VecN, double>>& s;
  int dim;
  double nu;

  double rms(double logc, double t, const VecN& x0) const {
    double acc = 0.0;
    for (const auto& [x, u] : s) {
      const double rho2 = (x - x0).squaredNorm();
      const double model = logc + nu * std::log(t) - nu * std::log(t * t + rho2);
      const double r = std::log(u) - model;
      acc += r * r;
    }
    return std::sqrt(acc / s.size());
  }
};

}  // namespace

BubbleFit fit_bubble(const std::vector<std::pair<VecN, double>>& samples) {
  if (samples.empty()) throw fit_error("fit_bubble: no samples");
  const int dim = static_cast<int>(samples[0].first.size());
  if (dim < 3) throw fit_error("fit_bubble: need N >= 3 sample coordinates");
  if (static_cast<int>(samples.size()) < dim + 3)
    throw fit_error("fit_bubble: need at least N+3 samples");
  for (const auto& [x, u] : samples) {
    if (x.size() != dim) throw fit_error("fit_bubble: inconsistent sample dimensions");
    if (!(u > 0.0)) throw fit_error("fit_bubble: samples must be strictly positive");
  }
  const double nu = 0.5 * (dim - 2);
  FitWork work{samples, dim, nu};

  // Initial guess: center at the peak sample, amplitude from the peak
  // value, width from the half-maximum radius.
  std::size_t peak = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].second > samples[peak].second) peak = i;
  VecN x0 = samples[peak].first;
  const double umax = samples[peak].second;
  double rho_half = 0.0, best = std::numeric_limits<double>::max();
  for (const auto& [x, u] : samples) {
    const double d = std::abs(u - 0.5 * umax);
    if (d < best) {
      best = d;
      rho_half = (x - x0).norm();
    }
  }
  double t = rho_half > 0.0 ? rho_half / std::sqrt(std::pow(2.0, 1.0 / nu) - 1.0) : 1.0;
  t = std::max(t, 1e-8);
  double logc = std::log(umax) + nu * std::log(t);

  const int n = static_cast<int>(samples.size());
  const int npar = dim + 2;
  Eigen::VectorXd resid(n);
  Eigen::MatrixXd J(n, npar);
  double lambda = 0.0;  // Levenberg damping, engaged only on failed steps
  double prev_rms = work.rms(logc, t, x0);
  int iter = 0;
  for (; iter < 200; ++iter) {
    for (int i = 0; i < n; ++i) {
      const auto& [x, u] = samples[i];
      const VecN d = x - x0;
      const double rho2 = d.squaredNorm();
      const double q = t * t + rho2;
      resid[i] = std::log(u) - (logc + nu * std::log(t) - nu * std::log(q));
      J(i, 0) = -1.0;                                // d/dlogc
      J(i, 1) = -nu / t + 2.0 * nu * t / q;          // d/dt
      for (int k = 0; k < dim; ++k) J(i, 2 + k) = -2.0 * nu * d[k] / q;
    }
    Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * resid;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd Hd = H;
      if (lambda > 0.0) Hd.diagonal().array() += lambda * H.diagonal().array().abs().maxCoeff();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hd);
      if (ldlt.info() != Eigen::Success)
        throw fit_error("fit_bubble: singular normal equations (degenerate sample set)");
      Eigen::VectorXd step = ldlt.solve(-g);
      if (!step.allFinite())
        throw fit_error("fit_bubble: singular normal equations (degenerate sample set)");
      const double new_logc = logc - step[0];
      const double new_t = t - step[1];
      VecN new_x0 = x0;
      for (int k = 0; k < dim; ++k) new_x0[k] -= step[2 + k];
      if (new_t > 0.0) {
        const double new_rms = work.rms(new_logc, new_t, new_x0);
        if (new_rms <= prev_rms * (1.0 + 1e-14)) {
          logc = new_logc;
          t = new_t;
          x0 = new_x0;
          lambda = lambda > 0.0 ? lambda * 0.25 : 0.0;
          prev_rms = new_rms;
          break;
        }
      }
      lambda = lambda > 0.0 ? lambda * 8.0 : 1e-4;
      if (attempt == 11) {
        // no further progress possible
        BubbleFit out;
        out.params = BubbleParams(std::exp(logc), t, x0);
        out.residual = prev_rms;
        out.iterations = iter;
        return out;
      }
    }
    if (iter > 0 && std::abs(prev_rms) < 1e-15) break;
    // step-size based stop
    if (prev_rms < 1e-13) break;
    if (iter > 2 && lambda == 0.0) {
      // quadratic convergence plateau: stop when the gradient is tiny
      if (g.norm() < 1e-12 * std::max(1.0, prev_rms * std::sqrt(static_cast<double>(n)))) break;
    }
  }
  BubbleFit out;
  out.params = BubbleParams(std::exp(logc), t, x0);
  out.residual = prev_rms;
  out.iterations = iter;
  return out;
}

}  // namespace choq
