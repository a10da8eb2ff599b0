#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library routine it is used to check.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace ref {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// T(0) - T(s) written out term by term.
inline double poly_increment(const Vec& g, const Mat* H, const Vec& s) {
  double lin = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) lin += g[i] * s[i];
  double quad = 0.0;
  if (H)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      for (Eigen::Index j = 0; j < s.size(); ++j) quad += s[i] * (*H)(i, j) * s[j];
  return -(lin + 0.5 * quad);
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, double h = 1e-5) {
  const auto n = x.size();
  Mat J(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (g(xp) - g(xm)) / (2.0 * h);
  }
  return J;
}

inline double max_abs(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

/// Minimum of q(d) = g'd + d'Hd/2 over a uniform grid of the disk of radius delta (n = 2).
inline double grid_min_trust_region(const Vec& g, const Mat& H, double delta, int pts = 400) {
  double best = 0.0;
  for (int i = 0; i < pts; ++i)
    for (int j = 0; j < pts; ++j) {
      const double a = -delta + 2.0 * delta * i / (pts - 1);
      const double b = -delta + 2.0 * delta * j / (pts - 1);
      if (a * a + b * b > delta * delta) continue;
      const double v = g[0] * a + g[1] * b + 0.5 * (H(0, 0) * a * a + 2.0 * H(0, 1) * a * b + H(1, 1) * b * b);
      best = std::min(best, v);
    }
  return best;
}

/// Minimum of g's + s'Hs/2 + sigma/6 ||s||^3 over a uniform grid of [-R,R]^2,
/// R large enough to contain every global minimizer.
inline double grid_min_cubic(const Vec& g, const Mat& H, double sigma, int pts = 400) {
  const double hn = H.cwiseAbs().rowwise().sum().maxCoeff();
  const double R = std::max(6.0 * hn / sigma, std::sqrt(12.0 * g.norm() / sigma)) + 1e-12;
  double best = 0.0;
  for (int i = 0; i < pts; ++i)
    for (int j = 0; j < pts; ++j) {
      const double a = -R + 2.0 * R * i / (pts - 1);
      const double b = -R + 2.0 * R * j / (pts - 1);
      const double r = std::sqrt(a * a + b * b);
      const double v = g[0] * a + g[1] * b + 0.5 * (H(0, 0) * a * a + 2.0 * H(0, 1) * a * b + H(1, 1) * b * b) +
                       sigma / 6.0 * r * r * r;
      best = std::min(best, v);
    }
  return best;
}

inline Mat random_symmetric(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Mat A(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) A(i, j) = A(j, i) = scale * nd(rng);
  return A;
}

inline Vec random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (auto& x : v) x = scale * nd(rng);
  return v;
}

/// Uniform point in the ball of radius r.
inline Vec random_in_ball(std::mt19937_64& rng, int n, double r) {
  Vec u = random_vector(rng, n);
  while (u.norm() == 0.0) u = random_vector(rng, n);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  return (r * std::pow(U(rng), 1.0 / n) / u.norm()) * u;
}

inline double min_eig(const Mat& A) {
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly).eigenvalues()[0];
}

inline double spectral_norm(const Mat& A) {
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

}  // namespace ref
