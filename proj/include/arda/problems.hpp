#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "arda/core_math.hpp"

namespace arda {

/// Finite-sum data for the sigmoid least-squares loss. Column i of
/// `features` holds the feature vector a_i (n x N storage).
struct Dataset {
  Matrix features;
  Vector labels;
  std::array<double, 3> kappa{0.0, 0.0, 0.0};  // uniform bounds on |psi_i|, ||grad psi_i||, ||hess psi_i||

  long size() const { return static_cast<long>(labels.size()); }
  int dim() const { return static_cast<int>(features.rows()); }
  bool operator==(const Dataset& o) const {
    return features.rows() == o.features.rows() && features.cols() == o.features.cols() &&
           features == o.features && labels == o.labels && kappa == o.kappa;
  }
};

struct SigmoidTerms {
  double value = 0.0;
  double grad_coeff = 0.0;  // gradient = grad_coeff * a
  double hess_coeff = 0.0;  // hessian = hess_coeff * a a'
};

inline constexpr double kSigmoidClamp = 1e-12;

/// Scalar coefficients of one sigmoid least-squares component at z = a'x.
inline SigmoidTerms sigmoid_ls_terms(double z, double b) {
  double v = 1.0 / (1.0 + std::exp(-z));
  v = std::clamp(v, kSigmoidClamp, 1.0 - kSigmoidClamp);
  SigmoidTerms t;
  const double r = b - v;
  t.value = 0.5 * r * r;
  t.grad_coeff = -r * (1.0 - v) * v;
  t.hess_coeff = -v * (1.0 - v) * (3.0 * v * v - 2.0 * v * (1.0 + b) + b);
  return t;
}

struct ComponentDerivs {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// psi(x) = (b - 1/(1+exp(-a'x)))^2 / 2 with its gradient and Hessian. The
/// factor 1/2 keeps the derivatives within the bounds of psi_bounds.
inline ComponentDerivs sigmoid_ls_derivs(const Vector& a, double b, const Vector& x) {
  if (a.size() != x.size()) throw std::invalid_argument("sigmoid_ls_derivs: dimension mismatch");
  const auto t = sigmoid_ls_terms(a.dot(x), b);
  return {t.value, t.grad_coeff * a, t.hess_coeff * a * a.transpose()};
}

/// Uniform bounds (1, max ||a_i||/5, max ||a_i||^2/10).
inline std::array<double, 3> psi_bounds(const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("psi_bounds: empty dataset");
  const double amax = ds.features.colwise().norm().maxCoeff();
  return {1.0, amax / 5.0, amax * amax / 10.0};
}

namespace detail {

/// Full-batch sums with a fixed sequential summation order.
inline double sigmoid_value_sum(const Dataset& ds, const Vector& x, const long* idx, long m) {
  double acc = 0.0;
  for (long k = 0; k < m; ++k) {
    const long i = idx ? idx[k] : k;
    acc += sigmoid_ls_terms(ds.features.col(i).dot(x), ds.labels[i]).value;
  }
  return acc / static_cast<double>(m);
}

inline Vector sigmoid_grad_sum(const Dataset& ds, const Vector& x, const long* idx, long m) {
  Vector acc = Vector::Zero(ds.dim());
  for (long k = 0; k < m; ++k) {
    const long i = idx ? idx[k] : k;
    const auto a = ds.features.col(i);
    acc += sigmoid_ls_terms(a.dot(x), ds.labels[i]).grad_coeff * a;
  }
  return acc / static_cast<double>(m);
}

inline Matrix sigmoid_hess_sum(const Dataset& ds, const Vector& x, const long* idx, long m) {
  const int n = ds.dim();
  Matrix acc = Matrix::Zero(n, n);
  for (long k = 0; k < m; ++k) {
    const long i = idx ? idx[k] : k;
    const auto a = ds.features.col(i);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(a, sigmoid_ls_terms(a.dot(x), ds.labels[i]).hess_coeff);
  }
  acc = acc.selfadjointView<Eigen::Lower>();
  return acc / static_cast<double>(m);
}

}  // namespace detail

/// Objective with exact derivatives and the constants the complexity
/// checks need.
struct Problem {
  std::string name;
  int n = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  // Hölder (beta = 1) constant of the p-th derivative, indexed by p.
  std::array<std::optional<double>, 3> lipschitz{};
  std::optional<double> f_low;
  std::optional<Vector> known_minimizer;
  Vector x0;
  std::shared_ptr<const Dataset> dataset;  // set for finite-sum problems

  std::optional<double> L(int p) const { return (p == 1 || p == 2) ? lipschitz[p] : std::nullopt; }
};

/// f(x) = x'Ax/2 with A symmetric positive semidefinite.
inline Problem make_quadratic(const Matrix& A, const Vector& x0) {
  if (A.rows() != A.cols() || A.rows() != x0.size()) throw std::invalid_argument("make_quadratic: shape mismatch");
  Problem p;
  p.name = "quadratic";
  p.n = static_cast<int>(x0.size());
  const Matrix S = 0.5 * (A + A.transpose());
  p.value = [S](const Vector& x) { return 0.5 * x.dot(S * x); };
  p.gradient = [S](const Vector& x) -> Vector { return S * x; };
  p.hessian = [S](const Vector&) -> Matrix { return S; };
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  p.lipschitz[1] = es.eigenvalues().cwiseAbs().maxCoeff();
  p.lipschitz[2] = 0.0;
  p.f_low = std::min(0.0, es.eigenvalues().minCoeff()) < 0.0 ? std::optional<double>{} : std::optional<double>{0.0};
  p.known_minimizer = Vector::Zero(p.n);
  p.x0 = x0;
  return p;
}

/// diag(1, ..., 10) scaled across n coordinates, x0 = ones.
inline Problem make_default_quadratic(int n) {
  if (n < 1) throw std::invalid_argument("make_default_quadratic: n must be positive");
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = n == 1 ? 1.0 : 1.0 + 9.0 * i / (n - 1);
  return make_quadratic(d.asDiagonal(), Vector::Ones(n));
}

/// 100 (y - x^2)^2 + (1 - x)^2 from (-1.2, 1).
inline Problem make_rosenbrock() {
  Problem p;
  p.name = "rosenbrock";
  p.n = 2;
  p.value = [](const Vector& x) {
    const double a = x[1] - x[0] * x[0], b = 1.0 - x[0];
    return 100.0 * a * a + b * b;
  };
  p.gradient = [](const Vector& x) -> Vector {
    const double a = x[1] - x[0] * x[0];
    Vector g(2);
    g << -400.0 * x[0] * a - 2.0 * (1.0 - x[0]), 200.0 * a;
    return g;
  };
  p.hessian = [](const Vector& x) -> Matrix {
    Matrix H(2, 2);
    H << 1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0, -400.0 * x[0], -400.0 * x[0], 200.0;
    return H;
  };
  p.f_low = 0.0;
  p.known_minimizer = Vector::Ones(2);
  p.x0 = Vector(2);
  p.x0 << -1.2, 1.0;
  return p;
}

/// f(x) = sum x_i^4 / 4. Its derivatives are not globally Lipschitz; the
/// recorded constants hold on the box |x_i| <= 2r, r = (4 f(x0))^{1/4},
/// which contains the sublevel set of x0 and every step taken once sigma
/// exceeds (L + 3)/(1 - eta2) (for n up to a few thousand).
inline Problem make_quartic(const Vector& x0) {
  Problem p;
  p.name = "quartic";
  p.n = static_cast<int>(x0.size());
  p.value = [](const Vector& x) { return 0.25 * x.array().pow(4).sum(); };
  p.gradient = [](const Vector& x) -> Vector { return x.array().cube(); };
  p.hessian = [](const Vector& x) -> Matrix { return Vector(3.0 * x.array().square()).asDiagonal(); };
  const double r = std::pow(4.0 * p.value(x0), 0.25);
  p.lipschitz[1] = 12.0 * r * r;
  p.lipschitz[2] = 12.0 * r;
  p.f_low = 0.0;
  p.known_minimizer = Vector::Zero(p.n);
  p.x0 = x0;
  return p;
}

/// f(x) = (1/N) sum psi_i(x), full-batch evaluation.
inline Problem make_sigmoid_ls(std::shared_ptr<const Dataset> ds) {
  if (!ds || ds->size() == 0) throw std::invalid_argument("make_sigmoid_ls: empty dataset");
  Problem p;
  p.name = "sigmoid-ls";
  p.n = ds->dim();
  const long N = ds->size();
  p.value = [ds, N](const Vector& x) { return detail::sigmoid_value_sum(*ds, x, nullptr, N); };
  p.gradient = [ds, N](const Vector& x) { return detail::sigmoid_grad_sum(*ds, x, nullptr, N); };
  p.hessian = [ds, N](const Vector& x) { return detail::sigmoid_hess_sum(*ds, x, nullptr, N); };
  p.f_low = 0.0;
  p.x0 = Vector::Zero(p.n);
  p.dataset = std::move(ds);
  return p;
}

/// Gaussian features with ||a_i|| near 1, labels from a planted linear
/// separator with 10% of them flipped.
inline Dataset make_synthetic_dataset(long N, int n, std::uint64_t seed) {
  if (N < 1 || n < 1) throw std::invalid_argument("make_synthetic_dataset: N and n must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution flip(0.1);
  Vector planted(n);
  for (int j = 0; j < n; ++j) planted[j] = 4.0 / std::sqrt(static_cast<double>(n)) * normal(rng);
  Dataset ds;
  ds.features.resize(n, N);
  ds.labels.resize(N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (long i = 0; i < N; ++i) {
    for (int j = 0; j < n; ++j) ds.features(j, i) = scale * normal(rng);
    bool label = ds.features.col(i).dot(planted) > 0.0;
    if (flip(rng)) label = !label;
    ds.labels[i] = label ? 1.0 : 0.0;
  }
  ds.kappa = psi_bounds(ds);
  return ds;
}

/// Raised by load_dataset; carries the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

namespace detail {
inline double parse_double(std::string_view tok, long line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("malformed number '" + std::string(tok) + "'", line);
  return v;
}
}  // namespace detail

/// Parses `label,feat_1,...,feat_n` records (no header).
inline Dataset parse_dataset(std::istream& in) {
  std::vector<double> labels;
  std::vector<double> feats;
  int n = -1;
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view sv(raw);
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = sv.find(',', start);
      row.push_back(detail::parse_double(sv.substr(start, comma - start), line));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.size() < 2) throw ParseError("record needs a label and at least one feature", line);
    if (row[0] != 0.0 && row[0] != 1.0) throw ParseError("label must be 0 or 1", line);
    const int width = static_cast<int>(row.size()) - 1;
    if (n < 0) n = width;
    if (width != n)
      throw ParseError("expected " + std::to_string(n) + " features, found " + std::to_string(width), line);
    labels.push_back(row[0]);
    feats.insert(feats.end(), row.begin() + 1, row.end());
  }
  if (labels.empty()) throw ParseError("dataset is empty", line);
  Dataset ds;
  const long N = static_cast<long>(labels.size());
  ds.features = Eigen::Map<const Matrix>(feats.data(), n, N);
  ds.labels = Eigen::Map<const Vector>(labels.data(), N);
  ds.kappa = psi_bounds(ds);
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

inline void write_dataset(std::ostream& out, const Dataset& ds) {
  out << std::setprecision(17);
  for (long i = 0; i < ds.size(); ++i) {
    out << static_cast<int>(ds.labels[i]);
    for (int j = 0; j < ds.dim(); ++j) out << ',' << ds.features(j, i);
    out << '\n';
  }
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset '" + path + "'");
  write_dataset(out, ds);
}

}  // namespace arda
