#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "arda/core_math.hpp"
#include "arda/params.hpp"
#include "arda/problems.hpp"

namespace arda {

/// Absolute accuracy thresholds eps_1, eps_2 and the shrink counter.
struct AccuracyLadder {
  std::array<double, 3> eps{0.0, 1.0, 1.0};  // index 0 unused
  long i_eps = 0;         // shrinks since the last reset
  long total_shrinks = 0;
  double gamma_eps = 0.1;
  double kappa_eps = 1.0;
  Schedule mode = Schedule::Flexible;

  static AccuracyLadder from(const AlgoParams& prm) {
    AccuracyLadder l;
    l.gamma_eps = prm.gamma_eps;
    l.kappa_eps = prm.kappa_eps;
    l.mode = prm.schedule;
    l.eps = {0.0, prm.kappa_eps, prm.kappa_eps};
    return l;
  }

  /// Start of an outer iteration: flexible restarts at kappa_eps, monotonic keeps going.
  void reset() {
    i_eps = 0;
    if (mode == Schedule::Flexible) eps[1] = eps[2] = kappa_eps;
  }

  void shrink() {
    eps[1] *= gamma_eps;
    eps[2] *= gamma_eps;
    ++i_eps;
    ++total_shrinks;
    if (!(eps[1] > std::numeric_limits<double>::min()) || !(eps[2] > std::numeric_limits<double>::min()))
      throw std::runtime_error("accuracy ladder underflow after " + std::to_string(total_shrinks) + " shrinks");
  }

  std::vector<double> zetas(int upto, double scale = 1.0) const {
    std::vector<double> z;
    for (int j = 1; j <= upto; ++j) z.push_back(scale * eps[j]);
    return z;
  }
};

struct EvalCounters {
  long fun_evals = 0;
  std::array<long, 3> deriv_evals{0, 0, 0};  // index j = order, index 0 unused
  long component_evals = 0;

  long total_deriv_evals() const { return deriv_evals[1] + deriv_evals[2]; }
};

struct FunctionEstimate {
  double value = 0.0;
  double accuracy = 0.0;  // recorded absolute accuracy of this estimate
  bool cached = false;
};

struct StochasticConfig {
  double t_bar = 0.1;
  double t = 0.05;
  std::uint64_t seed = 0;

  /// min(0.1, t_bar eps^{(p+beta)/(p-q+beta)} / (p+q+2)), constant 1.
  static double auto_t(double t_bar, double eps, const Orders& o) {
    return std::min(0.1, t_bar * std::pow(eps, o.complexity_exponent()) / (o.p + o.q + 2));
  }
};

/// Evaluation provider honoring requested absolute accuracies. The base
/// class owns caching and counting; subclasses only compute.
class Oracle {
 public:
  explicit Oracle(int n) : n_(n) {}
  virtual ~Oracle() = default;
  Oracle(const Oracle&) = delete;
  Oracle& operator=(const Oracle&) = delete;

  int dimension() const { return n_; }
  const EvalCounters& counters() const { return counters_; }
  virtual const char* kind() const = 0;

  /// Serves a cached estimate at x when its recorded accuracy is <= eps0.
  FunctionEstimate request_function(const Vector& x, double eps0) {
    if (!(eps0 > 0.0)) throw std::invalid_argument("request_function: eps0 must be positive");
    check_point(x);
    for (const auto& e : fcache_)
      if (e.x == x && e.est.accuracy <= eps0) {
        FunctionEstimate out = e.est;
        out.cached = true;
        return out;
      }
    FunctionEstimate est = compute_value(x, eps0);
    ++counters_.fun_evals;
    fcache_.push_front({x, est});
    if (fcache_.size() > kFunctionCacheSize) fcache_.pop_back();
    return est;
  }

  /// Derivatives up to `upto` with errors bounded by the ladder. An order is
  /// recomputed (and counted) only when the ladder asks for a strictly smaller
  /// accuracy than the one last served at the same point.
  DerivativeBundle request_derivatives(const Vector& x, const AccuracyLadder& ladder, int upto) {
    if (upto < 1 || upto > 2) throw std::invalid_argument("request_derivatives: upto must be 1 or 2");
    check_point(x);
    if (!dcache_.origin.size() || dcache_.origin != x) {
      dcache_ = DerivCache{};
      dcache_.origin = x;
    }
    for (int j = 1; j <= upto; ++j) {
      const double want = ladder.eps[j];
      if (!(want > 0.0)) throw std::invalid_argument("request_derivatives: accuracies must be positive");
      if (dcache_.served[j] && want >= dcache_.requested[j]) continue;
      if (j == 1) {
        auto [g, acc] = compute_gradient(x, want);
        dcache_.grad = std::move(g);
        dcache_.acc[1] = acc;
      } else {
        auto [H, acc] = compute_hessian(x, want);
        dcache_.hess = 0.5 * (H + H.transpose());
        dcache_.acc[2] = acc;
      }
      dcache_.served[j] = true;
      dcache_.requested[j] = want;
      ++counters_.deriv_evals[j];
    }
    DerivativeBundle b;
    b.origin = x;
    b.grad = dcache_.grad;
    if (upto == 2) b.hess = dcache_.hess;
    b.acc = {0.0, dcache_.acc[1], upto == 2 ? dcache_.acc[2] : 0.0};
    return b;
  }

  /// Sample sizes of the most recent request per order (0 = value); N for exact sums.
  virtual std::array<long, 3> last_sample_sizes() const { return {0, 0, 0}; }
  /// True when the last requests of every order all used the full data set.
  virtual bool full_batch() const { return false; }

 protected:
  virtual FunctionEstimate compute_value(const Vector& x, double eps0) = 0;
  virtual std::pair<Vector, double> compute_gradient(const Vector& x, double eps1) = 0;
  virtual std::pair<Matrix, double> compute_hessian(const Vector& x, double eps2) = 0;

  EvalCounters counters_;

 private:
  static constexpr std::size_t kFunctionCacheSize = 4;

  void check_point(const Vector& x) const {
    if (x.size() != n_)
      throw std::invalid_argument("oracle: point has " + std::to_string(x.size()) + " entries, expected " +
                                  std::to_string(n_));
  }

  struct FEntry {
    Vector x;
    FunctionEstimate est;
  };
  struct DerivCache {
    Vector origin;
    Vector grad;
    Matrix hess;
    std::array<bool, 3> served{false, false, false};
    std::array<double, 3> requested{0.0, 0.0, 0.0};
    std::array<double, 3> acc{0.0, 0.0, 0.0};
  };

  int n_;
  std::deque<FEntry> fcache_;
  DerivCache dcache_;
};

/// Exact values and derivatives; recorded accuracy 0.
class ExactOracle : public Oracle {
 public:
  explicit ExactOracle(std::shared_ptr<const Problem> p) : Oracle(p->n), p_(std::move(p)) {}
  const char* kind() const override { return "exact"; }

 protected:
  FunctionEstimate compute_value(const Vector& x, double) override { return {p_->value(x), 0.0, false}; }
  std::pair<Vector, double> compute_gradient(const Vector& x, double) override { return {p_->gradient(x), 0.0}; }
  std::pair<Matrix, double> compute_hessian(const Vector& x, double) override { return {p_->hessian(x), 0.0}; }

 private:
  std::shared_ptr<const Problem> p_;
};

/// Exact data plus an error of norm exactly fraction * eps in a pseudo-random
/// direction that depends only on (seed, order, eps, x).
class NoisyOracle : public Oracle {
 public:
  NoisyOracle(std::shared_ptr<const Problem> p, double fraction, std::uint64_t seed)
      : Oracle(p->n), p_(std::move(p)), fraction_(fraction), seed_(seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("noise fraction must lie in [0,1]");
  }
  const char* kind() const override { return "noisy"; }
  double fraction() const { return fraction_; }

 protected:
  FunctionEstimate compute_value(const Vector& x, double eps0) override {
    auto rng = stream(0, eps0, x);
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    return {p_->value(x) + sign * fraction_ * eps0, eps0, false};
  }
  std::pair<Vector, double> compute_gradient(const Vector& x, double eps1) override {
    auto rng = stream(1, eps1, x);
    std::normal_distribution<double> nd;
    Vector u(x.size());
    do {
      for (auto& v : u) v = nd(rng);
    } while (u.norm() == 0.0);
    return {p_->gradient(x) + (fraction_ * eps1 / u.norm()) * u, eps1};
  }
  std::pair<Matrix, double> compute_hessian(const Vector& x, double eps2) override {
    auto rng = stream(2, eps2, x);
    std::normal_distribution<double> nd;
    const auto n = x.size();
    Matrix S(n, n);
    double nrm = 0.0;
    do {
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) S(i, j) = S(j, i) = nd(rng);
      nrm = Eigen::SelfAdjointEigenSolver<Matrix>(S, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
    } while (nrm == 0.0);
    return {p_->hessian(x) + (fraction_ * eps2 / nrm) * S, eps2};
  }

 private:
  std::mt19937_64 stream(int order, double eps, const Vector& x) const {
    std::vector<std::uint32_t> key;
    auto push64 = [&key](std::uint64_t v) {
      key.push_back(static_cast<std::uint32_t>(v));
      key.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push64(seed_);
    push64(static_cast<std::uint64_t>(order));
    push64(std::bit_cast<std::uint64_t>(eps));
    for (double v : x) push64(std::bit_cast<std::uint64_t>(v));
    std::seed_seq seq(key.begin(), key.end());
    return std::mt19937_64(seq);
  }

  std::shared_ptr<const Problem> p_;
  double fraction_;
  std::uint64_t seed_;
};

/// min{N, max(1, ceil((4 kappa/eps)(2 kappa/eps + 1/3) ln(d/t)))}.
inline long sample_size(double kappa, double eps_j, double t, long d, long N) {
  if (!(eps_j > 0.0)) throw std::invalid_argument("sample_size: eps must be positive");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("sample_size: t must lie in (0,1)");
  if (kappa < 0.0 || d < 1 || N < 1) throw std::invalid_argument("sample_size: invalid kappa, d or N");
  const double r = kappa / eps_j;
  const double raw = std::ceil(4.0 * r * (2.0 * r + 1.0 / 3.0) * std::log(static_cast<double>(d) / t));
  if (!(raw < static_cast<double>(N))) return N;
  return std::max(1L, static_cast<long>(raw));
}

/// Dimension parameter of the sampling bound for order j.
inline long sample_dim(int j, int n) { return j == 0 ? 2 : (j == 1 ? n + 1 : 2L * n); }

/// Order-j estimate of the finite sum: the mean over m indices drawn with
/// replacement, or the exact sum when m = N. Returned as a 1x1, n x 1 or
/// n x n matrix.
inline Matrix subsampled_eval(const Dataset& ds, const Vector& x, int j, long m, std::mt19937_64& rng,
                              long* component_evals = nullptr) {
  const long N = ds.size();
  if (m < 1 || m > N) throw std::invalid_argument("subsampled_eval: need 1 <= m <= N");
  if (j < 0 || j > 2) throw std::invalid_argument("subsampled_eval: order must be 0, 1 or 2");
  std::vector<long> idx;
  const long* ip = nullptr;
  if (m < N) {
    std::uniform_int_distribution<long> pick(0, N - 1);
    idx.resize(m);
    for (auto& i : idx) i = pick(rng);
    ip = idx.data();
  }
  if (component_evals) *component_evals += m;
  if (j == 0) return Matrix::Constant(1, 1, detail::sigmoid_value_sum(ds, x, ip, m));
  if (j == 1) return detail::sigmoid_grad_sum(ds, x, ip, m);
  return detail::sigmoid_hess_sum(ds, x, ip, m);
}

/// Norm used by the accuracy contracts: |.|, Euclidean, spectral.
inline double tensor_norm(const Matrix& T) {
  if (T.size() == 1) return std::abs(T(0, 0));
  if (T.cols() == 1) return T.norm();
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

/// Subsampled finite-sum oracle for the sigmoid least-squares loss.
class SubsampledOracle : public Oracle {
 public:
  SubsampledOracle(std::shared_ptr<const Dataset> ds, double t, std::uint64_t seed)
      : Oracle(ds->dim()), ds_(std::move(ds)), t_(t), rng_(seed) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("SubsampledOracle: t must lie in (0,1)");
  }
  const char* kind() const override { return "subsampled"; }
  double t() const { return t_; }
  std::array<long, 3> last_sample_sizes() const override { return last_m_; }
  bool full_batch() const override {
    const long N = ds_->size();
    return last_m_[0] == N && last_m_[1] == N && last_m_[2] == N;
  }

 protected:
  FunctionEstimate compute_value(const Vector& x, double eps0) override {
    const long m = size_for(0, eps0);
    const double v = subsampled_eval(*ds_, x, 0, m, rng_, &counters_.component_evals)(0, 0);
    return {v, m == ds_->size() ? 0.0 : eps0, false};
  }
  std::pair<Vector, double> compute_gradient(const Vector& x, double eps1) override {
    const long m = size_for(1, eps1);
    Vector g = subsampled_eval(*ds_, x, 1, m, rng_, &counters_.component_evals);
    return {std::move(g), m == ds_->size() ? 0.0 : eps1};
  }
  std::pair<Matrix, double> compute_hessian(const Vector& x, double eps2) override {
    const long m = size_for(2, eps2);
    Matrix H = subsampled_eval(*ds_, x, 2, m, rng_, &counters_.component_evals);
    return {std::move(H), m == ds_->size() ? 0.0 : eps2};
  }

 private:
  long size_for(int j, double eps) {
    const long m = sample_size(ds_->kappa[j], eps, t_, sample_dim(j, ds_->dim()), ds_->size());
    last_m_[j] = m;
    return m;
  }

  std::shared_ptr<const Dataset> ds_;
  double t_;
  std::mt19937_64 rng_;
  std::array<long, 3> last_m_{0, 0, 0};
};

}  // namespace arda
