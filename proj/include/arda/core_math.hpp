#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace arda {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Model degree p, optimality order q and Hölder exponent beta.
struct Orders {
  int p = 2;
  int q = 1;
  double beta = 1.0;

  bool operator==(const Orders&) const = default;

  void validate() const {
    if (p < 1 || p > 2) throw std::invalid_argument("orders: p must be 1 or 2");
    if (q < 1 || q > 2) throw std::invalid_argument("orders: q must be 1 or 2");
    if (q > p) throw std::invalid_argument("orders: q must not exceed p");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("orders: beta must lie in (0,1]");
    if (p == 2 && beta != 1.0) throw std::invalid_argument("orders: p = 2 requires beta = 1");
  }

  /// p - q + beta, the exponent denominator of every complexity bound.
  double gap() const { return p - q + beta; }
  /// 1/(p - q + beta).
  double step_exponent() const { return 1.0 / gap(); }
  /// (p + beta)/(p - q + beta).
  double complexity_exponent() const { return (p + beta) / gap(); }
};

/// Inexact value/derivatives at a point. `acc[j]` is the absolute accuracy
/// promised for order j (0 = value).
struct DerivativeBundle {
  Vector origin;
  std::optional<double> value;
  Vector grad;
  std::optional<Matrix> hess;
  std::array<double, 3> acc{0.0, 0.0, 0.0};

  int dimension() const { return static_cast<int>(grad.size()); }
  int max_order() const { return hess ? 2 : 1; }
};

/// prod_{l=1}^{i} (l + beta); 1 for i = 0.
inline double holder_factorial(int i, double beta) {
  double r = 1.0;
  for (int l = 1; l <= i; ++l) r *= l + beta;
  return r;
}

/// Same product for a real "index" p - q + beta written as (i + beta) with
/// integer i = p - q.
inline double holder_factorial_gap(const Orders& o) { return holder_factorial(o.p - o.q, o.beta); }

/// sum_{l=1}^{q} delta^l / l!
inline double chi(int q, double delta) {
  double term = 1.0;
  double sum = 0.0;
  for (int l = 1; l <= q; ++l) {
    term *= delta / l;
    sum += term;
  }
  return sum;
}

namespace detail {
inline void check_dims(const DerivativeBundle& b, const Vector& s) {
  if (s.size() != b.grad.size())
    throw std::invalid_argument("dimension mismatch: step has " + std::to_string(s.size()) +
                                " entries, bundle has " + std::to_string(b.grad.size()));
  if (b.hess && (b.hess->rows() != b.grad.size() || b.hess->cols() != b.grad.size()))
    throw std::invalid_argument("dimension mismatch: Hessian shape does not match gradient");
}
}  // namespace detail

/// T(x,0) - T(x,s) for the Taylor polynomial of the given order built from
/// the bundle's derivatives.
inline double taylor_increment(const DerivativeBundle& b, const Vector& s, int order) {
  detail::check_dims(b, s);
  if (order < 1 || order > 2) throw std::invalid_argument("taylor_increment: order must be 1 or 2");
  double lin = b.grad.dot(s);
  if (order == 1) return -lin;
  if (!b.hess) throw std::invalid_argument("taylor_increment: order 2 needs a Hessian");
  return -(lin + 0.5 * s.dot(*b.hess * s));
}

/// Regularized Taylor model m(s) = f - dT_p(s) + sigma/(p+beta)! ||s||^{p+beta}.
inline double model_value(const DerivativeBundle& b, const Vector& s, double sigma, const Orders& o) {
  if (!b.value) throw std::invalid_argument("model_value: bundle has no function value");
  double reg = sigma / holder_factorial(o.p, o.beta) * std::pow(s.norm(), o.p + o.beta);
  return *b.value - taylor_increment(b, s, o.p) + reg;
}

/// Derivatives of the p = 2, beta = 1 model at s_k, packaged as a bundle
/// centred at s_k. Regularizer derivatives are exact; the Taylor part inherits
/// the bundle's errors, so the promised accuracies are tripled.
inline DerivativeBundle model_taylor_derivs(const DerivativeBundle& b, const Vector& sk, double sigma,
                                            const Orders& o) {
  detail::check_dims(b, sk);
  if (o.p != 2 || o.beta != 1.0 || !b.hess)
    throw std::invalid_argument("model_taylor_derivs: requires p = 2, beta = 1 and a Hessian");
  const Matrix& H = *b.hess;
  const double r = sk.norm();
  DerivativeBundle m;
  m.origin = sk;
  if (b.value) m.value = model_value(b, sk, sigma, o);
  m.grad = b.grad + H * sk + 0.5 * sigma * r * sk;
  Matrix Hm = H;
  if (r > 0.0) {
    Hm.diagonal().array() += 0.5 * sigma * r;
    Hm += (0.5 * sigma / r) * sk * sk.transpose();
  }
  m.hess = 0.5 * (Hm + Hm.transpose());
  for (int j = 0; j < 3; ++j) m.acc[j] = 3.0 * b.acc[j];
  return m;
}

}  // namespace arda
