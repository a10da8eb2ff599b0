#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "arda/core_math.hpp"
#include "arda/params.hpp"

namespace arda {

/// Raised when a subproblem solver exhausts its iteration cap.
class SubsolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrustRegionSolution {
  Vector d_star;
  double value = 0.0;  // g'd + d'Hd/2, the model decrease is -value
  double lambda = 0.0;
  bool hard_case = false;
  bool interior = false;
  int iterations = 0;
  double kkt_residual = 0.0;  // ||(H + lambda I) d + g||
  double min_eig_shifted = 0.0;  // lambda_min(H + lambda I)
};

struct CubicSolution {
  Vector s_star;
  double lambda = 0.0;       // sigma/2 ||s||
  double model_value = 0.0;  // g's + s'Hs/2 + sigma/6 ||s||^3
  bool hard_case = false;
  int iterations = 0;
  double kkt_residual = 0.0;
  double min_eig_shifted = 0.0;
};

struct PhiResult {
  double phi_bar = 0.0;
  Vector d_k;
  double delta_used = 1.0;
  double increment = 0.0;  // Taylor increment at d_k, before clamping at 0
};

namespace detail {

constexpr int kSecularMaxIter = 200;
constexpr double kSecularRelTol = 1e-12;

/// H = Q diag(e) Q' with eigenvalues ascending.
struct Spectral {
  Vector eig;
  Matrix Q;
};

inline Spectral decompose(const Matrix& H) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()));
  if (es.info() != Eigen::Success) throw SubsolverError("eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Shifted secular system ||s(t)||, s_i(t) = -c_i / (e_i + t), e_i >= 0.
struct Secular {
  const Vector& e;
  const Vector& c;

  double norm(double t) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      if (c[i] == 0.0) continue;
      const double r = c[i] / (e[i] + t);
      acc += r * r;
    }
    return std::sqrt(acc);
  }
  // d||s||/dt
  double dnorm(double t, double nrm) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      if (c[i] == 0.0) continue;
      const double den = e[i] + t;
      acc += c[i] * c[i] / (den * den * den);
    }
    return nrm > 0.0 ? -acc / nrm : 0.0;
  }
  Vector step(double t) const {
    Vector s = Vector::Zero(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i)
      if (c[i] != 0.0) s[i] = -c[i] / (e[i] + t);
    return s;
  }
};

/// Root of F(t) = ||s(t)|| - (a + b t) on (0, hi], F decreasing, F(0+) > 0 >= F(hi).
/// Safeguarded Newton with bisection fallback.
inline double secular_root(const Secular& sec, double a, double b, double hi, int& iters) {
  double lo = 0.0;
  double t = 0.5 * hi;
  for (iters = 1; iters <= kSecularMaxIter; ++iters) {
    const double nrm = sec.norm(t);
    const double f = nrm - (a + b * t);
    if (f == 0.0) return t;
    if (f > 0.0) lo = t; else hi = t;
    const double target = a + b * t;
    if (std::abs(f) <= 1e-15 * std::max(target, std::numeric_limits<double>::min())) return t;
    if (hi - lo <= kSecularRelTol * hi) return t;
    const double fp = sec.dnorm(t, nrm) - b;
    double next = fp < 0.0 ? t - f / fp : -1.0;
    if (!(next > lo && next < hi)) {
      // bisect, geometrically once the bracket spans several orders of magnitude
      next = (lo > 0.0 && hi > 16.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
      if (lo == 0.0 && hi > 0.0) next = 0.5 * hi;
    }
    t = next;
  }
  throw SubsolverError("secular equation did not converge within " + std::to_string(kSecularMaxIter) +
                       " iterations (bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "])");
}

inline double leftmost_tolerance(const Vector& eig) {
  return 1e-12 * std::max(1.0, eig.cwiseAbs().maxCoeff());
}

}  // namespace detail

/// Global minimizer of g'd + d'Hd/2 subject to ||d|| <= delta, hard case included.
inline TrustRegionSolution trust_region_global_min(const Vector& g, const Matrix& H, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("trust_region_global_min: delta must be positive");
  if (H.rows() != g.size() || H.cols() != g.size())
    throw std::invalid_argument("trust_region_global_min: dimension mismatch");
  const auto n = g.size();
  TrustRegionSolution out;
  if (n == 0) {
    out.d_star = Vector::Zero(0);
    return out;
  }
  const auto sp = detail::decompose(H);
  const Vector c = sp.Q.transpose() * g;
  const double lmin = sp.eig[0];
  const double tol_e = detail::leftmost_tolerance(sp.eig);
  const double tol_c = 1e-12 * std::max(1.0, g.norm());

  Vector y;  // solution in eigen-coordinates
  double lambda = 0.0;
  if (lmin > tol_e) {
    // Try the interior Newton point first.
    const detail::Secular sec{sp.eig, c};
    if (sec.norm(0.0) <= delta) {
      y = sec.step(0.0);
      out.interior = true;
    } else {
      const double hi = c.norm() / delta;
      lambda = detail::secular_root(sec, delta, 0.0, hi, out.iterations);
      y = sec.step(lambda);
    }
  } else {
    // lambda >= -lmin; work in t = lambda + lmin with shifted eigenvalues.
    Vector e = sp.eig.array() - lmin;
    Vector cc = c;
    double c_left = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (e[i] <= tol_e) {
        e[i] = 0.0;
        c_left += c[i] * c[i];
      }
    c_left = std::sqrt(c_left);
    bool hard = false;
    if (c_left <= tol_c) {
      for (Eigen::Index i = 0; i < n; ++i)
        if (e[i] == 0.0) cc[i] = 0.0;
      const detail::Secular sec{e, cc};
      const double base = sec.norm(0.0);
      if (base < delta) {
        hard = true;
        y = sec.step(0.0);
        y[0] = std::sqrt(std::max(0.0, delta * delta - base * base));
        lambda = -lmin;
      }
    }
    if (!hard) {
      const detail::Secular sec{e, cc};
      const double hi = std::max(cc.norm() / delta, std::numeric_limits<double>::min());
      const double t = detail::secular_root(sec, delta, 0.0, hi, out.iterations);
      y = sec.step(t);
      lambda = t - lmin;
    }
    out.hard_case = hard;
    if (lambda < 0.0) lambda = 0.0;
  }
  out.d_star = sp.Q * y;
  // clip tiny overshoot of the boundary
  const double dn = out.d_star.norm();
  if (dn > delta) out.d_star *= delta / dn;
  out.lambda = lambda;
  out.value = g.dot(out.d_star) + 0.5 * out.d_star.dot(H * out.d_star);
  out.kkt_residual = (H * out.d_star + lambda * out.d_star + g).norm();
  out.min_eig_shifted = lmin + lambda;
  return out;
}

/// Global minimizer of g's + s'Hs/2 + sigma/6 ||s||^3.
inline CubicSolution cubic_global_min(const Vector& g, const Matrix& H, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("cubic_global_min: sigma must be positive");
  if (H.rows() != g.size() || H.cols() != g.size())
    throw std::invalid_argument("cubic_global_min: dimension mismatch");
  const auto n = g.size();
  CubicSolution out;
  if (n == 0) {
    out.s_star = Vector::Zero(0);
    return out;
  }
  const auto sp = detail::decompose(H);
  const Vector c = sp.Q.transpose() * g;
  const double lmin = sp.eig[0];
  const double tol_e = detail::leftmost_tolerance(sp.eig);
  const double tol_c = 1e-12 * std::max(1.0, g.norm());
  // lambda = base + t with base = max(0, -lmin); ||s|| = 2 lambda / sigma.
  const double base = std::max(0.0, -lmin);
  Vector e = sp.eig.array() + base;
  Vector cc = c;
  double c_left = 0.0;
  if (lmin <= tol_e) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (sp.eig[i] - lmin <= tol_e) {
        e[i] = std::max(0.0, lmin + base);
        c_left += c[i] * c[i];
      }
  }
  c_left = std::sqrt(c_left);
  const double a = 2.0 * base / sigma;
  const double b = 2.0 / sigma;
  Vector y;
  bool hard = false;
  if (c.norm() == 0.0 && lmin >= 0.0) {
    y = Vector::Zero(n);
  } else {
    if (lmin <= tol_e && c_left <= tol_c) {
      for (Eigen::Index i = 0; i < n; ++i)
        if (sp.eig[i] - lmin <= tol_e) cc[i] = 0.0;
      const detail::Secular sec{e, cc};
      const double nrm0 = sec.norm(0.0);
      if (nrm0 <= a) {
        hard = true;
        y = sec.step(0.0);
        y[0] = std::sqrt(std::max(0.0, a * a - nrm0 * nrm0));
      }
    }
    if (!hard) {
      const detail::Secular sec{e, cc};
      // ||s(t)|| <= ||c|| / t <= a + b t once t >= sqrt(||c|| / b)
      const double hi = std::max(std::sqrt(cc.norm() / b), std::numeric_limits<double>::min());
      const double t = detail::secular_root(sec, a, b, hi, out.iterations);
      y = sec.step(t);
    }
  }
  out.s_star = sp.Q * y;
  out.hard_case = hard;
  out.lambda = 0.5 * sigma * out.s_star.norm();
  const double r = out.s_star.norm();
  out.model_value = g.dot(out.s_star) + 0.5 * out.s_star.dot(H * out.s_star) + sigma / 6.0 * r * r * r;
  out.kkt_residual = (H * out.s_star + out.lambda * out.s_star + g).norm();
  out.min_eig_shifted = lmin + out.lambda;
  return out;
}

/// Inexact optimality measure: largest order-q Taylor decrease within radius delta.
inline PhiResult phi_measure(const DerivativeBundle& b, double delta, int q) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("phi_measure: delta must lie in (0,1]");
  PhiResult r;
  r.delta_used = delta;
  if (q == 1) {
    const double gn = b.grad.norm();
    r.d_k = gn > 0.0 ? Vector(-delta / gn * b.grad) : Vector(Vector::Zero(b.grad.size()));
    r.phi_bar = gn * delta;
    r.increment = r.phi_bar;
    return r;
  }
  if (q != 2) throw std::invalid_argument("phi_measure: q must be 1 or 2");
  if (!b.hess) throw std::invalid_argument("phi_measure: q = 2 needs a Hessian");
  const auto tr = trust_region_global_min(b.grad, *b.hess, delta);
  r.d_k = tr.d_star;
  r.increment = -tr.value;
  r.phi_bar = std::max(0.0, r.increment);
  return r;
}

/// Step engine output.
struct StepResult {
  Vector s;
  double delta_T = 0.0;  // inexact Taylor increment of order p at s
  double delta_k = 1.0;
  bool zero_step = false;
  bool global = false;   // s is the global model minimizer
  int mterm_clause = 0;  // 1: long step, 2: model measure small, 0: neither
  double model_decrease = 0.0;  // m(0) - m(s)
  std::optional<PhiResult> model_phi;  // order-q measure of the model at s
  std::optional<DerivativeBundle> model_derivs;
};

/// Radius grid {1, 1/2, ..., 2^-20} for the model measure.
inline constexpr int kDeltaGridSize = 21;

/// Computes a step satisfying the descent and model-termination conditions.
/// p = 1 uses the closed-form model minimizer, p = 2 the global cubic minimizer.
inline StepResult descend_model(const DerivativeBundle& b, double sigma, const AlgoParams& params,
                                const Orders& o, double eps) {
  StepResult out;
  const auto n = b.grad.size();
  const double long_step = params.mu * std::pow(eps, o.step_exponent());
  if (o.p == 1) {
    const double gn = b.grad.norm();
    if (gn == 0.0) {
      out.s = Vector::Zero(n);
      out.zero_step = true;
      out.global = true;
      return out;
    }
    // minimizer of g's + sigma/(1+beta) ||s||^{1+beta}; -g/sigma when beta = 1
    const double r = std::pow(gn / sigma, 1.0 / o.beta);
    out.s = (-r / gn) * b.grad;
    out.delta_T = gn * r;
    out.model_decrease = out.delta_T - sigma / holder_factorial(1, o.beta) * std::pow(r, 1.0 + o.beta);
    out.global = true;
    out.delta_k = 1.0;
    if (r >= long_step) {
      out.mterm_clause = 1;
    } else {
      // the model gradient vanishes at its minimizer
      PhiResult ph;
      ph.d_k = Vector::Zero(n);
      ph.delta_used = 1.0;
      out.model_phi = ph;
      out.mterm_clause = 2;
    }
    return out;
  }

  if (!b.hess) throw std::invalid_argument("descend_model: p = 2 needs a Hessian");
  const auto cs = cubic_global_min(b.grad, *b.hess, sigma);
  out.s = cs.s_star;
  out.global = true;
  out.model_decrease = -cs.model_value;
  if (out.s.norm() == 0.0 || !(cs.model_value < 0.0)) {
    out.s = Vector::Zero(n);
    out.zero_step = true;
    return out;
  }
  out.delta_T = taylor_increment(b, out.s, 2);
  const double r = out.s.norm();
  if (r >= long_step) {
    out.mterm_clause = 1;
    out.delta_k = 1.0;
    return out;
  }
  DerivativeBundle mb = model_taylor_derivs(b, out.s, sigma, o);
  const double rhs_scale = params.theta * std::pow(r, o.gap()) / holder_factorial_gap(o);
  double delta = 1.0;
  for (int i = 0; i < kDeltaGridSize; ++i, delta *= 0.5) {
    PhiResult ph = phi_measure(mb, delta, o.q);
    const bool ok = ph.phi_bar <= rhs_scale * chi(o.q, delta);
    if (ok || i == kDeltaGridSize - 1) {
      out.delta_k = delta;
      out.model_phi = std::move(ph);
      out.mterm_clause = ok ? 2 : 0;
      break;
    }
  }
  out.model_derivs = std::move(mb);
  return out;
}

}  // namespace arda
