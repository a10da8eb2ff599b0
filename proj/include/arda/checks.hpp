#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "arda/driver.hpp"
#include "arda/oracles.hpp"

namespace arda {

/// Outcome of a library-level check; `detail` names the first violation.
struct CheckResult {
  bool ok = true;
  std::string detail;

  explicit operator bool() const { return ok; }
  void fail(const std::string& what) {
    if (ok) detail = what;
    ok = false;
  }
};

inline double observed_sigma_max(const RunReport& rep, double sigma0) {
  double s = sigma0;
  for (const auto& r : rep.trace) s = std::max({s, r.sigma, r.sigma_next});
  return s;
}

inline double observed_omega_min(const RunReport& rep, double omega0) {
  double w = omega0;
  for (const auto& r : rep.trace) w = std::min(w, r.omega);
  return w;
}

/// Ladder shrinks after which every VERIFY call of an iteration is certain
/// to return a nonzero flag, given a lower bound on omega_k.
inline double nu_max(const AlgoParams& prm, double omega_min, double eps) {
  return shrink_limit(prm, omega_min, eps);
}

/// Completed iterations <= |S|(1 + |log g1|/log g2) + log(sigma_max/sigma0)/log g2,
/// with sigma_max the largest regularization weight the run produced.
inline CheckResult check_counting(const RunReport& rep, const AlgoParams& prm) {
  CheckResult c;
  const double smax = observed_sigma_max(rep, prm.sigma0);
  const double bound = rep.successful() * (1.0 + std::abs(std::log(prm.gamma1)) / std::log(prm.gamma2)) +
                       std::log(smax / prm.sigma0) / std::log(prm.gamma2);
  const double iters = static_cast<double>(rep.iterations());
  if (iters > bound * (1.0 + 1e-12) + 1e-9) {
    std::ostringstream os;
    os << "iterations " << iters << " exceed counting bound " << bound;
    c.fail(os.str());
  }
  return c;
}

/// At most two function evaluations and at most 1 + shrinks derivative
/// evaluations per order in every iteration.
inline CheckResult check_per_iteration_evals(const RunReport& rep) {
  CheckResult c;
  for (const auto& r : rep.trace) {
    if (r.fun_evals > 2) c.fail("iteration " + std::to_string(r.k) + " used " + std::to_string(r.fun_evals) +
                                " function evaluations");
    for (int j = 1; j <= 2; ++j)
      if (r.deriv_evals[j] > 1 + r.shrinks)
        c.fail("iteration " + std::to_string(r.k) + " recomputed order " + std::to_string(j) + " " +
               std::to_string(r.deriv_evals[j]) + " times with " + std::to_string(r.shrinks) + " shrinks");
  }
  return c;
}

/// Flexible: shrinks per iteration <= nu_max. Monotonic: total shrinks <= nu_max.
inline CheckResult check_shrinks(const RunReport& rep, const AlgoParams& prm, double nu) {
  CheckResult c;
  if (prm.schedule == Schedule::Monotonic) {
    if (static_cast<double>(rep.total_shrinks) > nu)
      c.fail("total shrinks " + std::to_string(rep.total_shrinks) + " exceed nu_max " + std::to_string(nu));
    return c;
  }
  for (const auto& r : rep.trace)
    if (static_cast<double>(r.shrinks) > nu)
      c.fail("iteration " + std::to_string(r.k) + " shrank " + std::to_string(r.shrinks) + " times, nu_max " +
             std::to_string(nu));
  return c;
}

/// nu_max from omega_min of the budget when known, else from the smallest
/// omega the run actually used.
inline CheckResult check_shrinks(const RunReport& rep, const AlgoParams& prm) {
  return check_shrinks(rep, prm, nu_max(prm, observed_omega_min(rep, prm.omega0()), prm.eps));
}

/// Successful iterations, sigma, iterations and evaluation counts against the
/// worst-case bounds.
inline CheckResult check_theorem_bounds(const RunReport& rep, const ComplexityBudget& b, const AlgoParams& prm) {
  CheckResult c;
  std::ostringstream os;
  const double succ = static_cast<double>(rep.successful());
  if (succ > b.successful_bound) {
    os << "successful iterations " << succ << " exceed bound " << b.successful_bound;
    c.fail(os.str());
  }
  for (const auto& r : rep.trace)
    if (r.sigma > b.sigma_max || r.sigma_next > b.sigma_max)
      c.fail("sigma " + std::to_string(std::max(r.sigma, r.sigma_next)) + " exceeds sigma_max " +
             std::to_string(b.sigma_max) + " at iteration " + std::to_string(r.k));
  if (static_cast<double>(rep.iterations()) > b.tau)
    c.fail("iterations " + std::to_string(rep.iterations()) + " exceed tau " + std::to_string(b.tau));
  if (static_cast<double>(rep.counters.fun_evals) > b.fun_bound)
    c.fail("function evaluations " + std::to_string(rep.counters.fun_evals) + " exceed " +
           std::to_string(b.fun_bound));
  const double dbound = prm.schedule == Schedule::Flexible ? b.deriv_bound_flexible : b.deriv_bound_monotonic;
  for (int j = 1; j <= 2; ++j)
    if (static_cast<double>(rep.counters.deriv_evals[j]) > dbound)
      c.fail("order-" + std::to_string(j) + " derivative evaluations " +
             std::to_string(rep.counters.deriv_evals[j]) + " exceed " + std::to_string(dbound));
  return c;
}

/// Empirical P(||estimate - exact|| > eps_j) over `trials` resamples of the
/// size prescribed for (kappa_j, eps_j, t).
struct SampleCheck {
  int order = 0;
  double eps = 0.0;
  long m = 0;
  long trials = 0;
  long failures = 0;
  double frequency = 0.0;
  double threshold = 0.0;  // t + 3 sqrt(t(1-t)/trials)
  bool ok = true;
};

inline SampleCheck sample_check(const Dataset& ds, const Vector& x, int j, double eps_j, double t, long trials,
                                std::uint64_t seed) {
  SampleCheck sc;
  sc.order = j;
  sc.eps = eps_j;
  sc.trials = trials;
  sc.m = sample_size(ds.kappa[j], eps_j, t, sample_dim(j, ds.dim()), ds.size());
  std::mt19937_64 rng(seed);
  const Matrix exact = subsampled_eval(ds, x, j, ds.size(), rng);
  for (long i = 0; i < trials; ++i) {
    const Matrix est = subsampled_eval(ds, x, j, sc.m, rng);
    if (tensor_norm(est - exact) > eps_j) ++sc.failures;
  }
  sc.frequency = trials > 0 ? static_cast<double>(sc.failures) / static_cast<double>(trials) : 0.0;
  sc.threshold = t + 3.0 * std::sqrt(t * (1.0 - t) / static_cast<double>(std::max(1L, trials)));
  sc.ok = sc.frequency <= sc.threshold;
  return sc;
}

}  // namespace arda
