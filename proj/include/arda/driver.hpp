#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arda/core_math.hpp"
#include "arda/oracles.hpp"
#include "arda/params.hpp"
#include "arda/problems.hpp"
#include "arda/subsolvers.hpp"
#include "arda/verify.hpp"

namespace arda {

enum class TerminationKind { OptimalAtStep1, NegligibleIncrementStep1, StrongOptimalityStep2, ZeroStep, Budget };

inline const char* to_string(TerminationKind k) {
  switch (k) {
    case TerminationKind::OptimalAtStep1: return "optimal_step1";
    case TerminationKind::NegligibleIncrementStep1: return "negligible_increment_step1";
    case TerminationKind::StrongOptimalityStep2: return "strong_optimality_step2";
    case TerminationKind::ZeroStep: return "zero_step";
    case TerminationKind::Budget: return "budget";
  }
  return "unknown";
}

struct Termination {
  TerminationKind kind = TerminationKind::Budget;
  double delta_at_exit = 1.0;
  long k_final = 0;
};

struct IterState {
  long k = 0;
  Vector x;
  double sigma = 1.0;
  double omega = 0.0625;
  double delta_prev = 1.0;
  AccuracyLadder ladder;
};

/// One VERIFY call as it appears in the trace.
struct FlagEvent {
  char site = '1';  // '1' Step 1, 's' step increment, 'd' model increment
  int flag = 0;
};

/// One outer iteration. The terminating iteration is recorded with
/// `terminal` set and no step data.
struct IterRecord {
  long k = 0;
  bool terminal = false;
  double sigma = 0.0;
  double sigma_next = 0.0;
  double omega = 0.0;
  double f_estimate = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double step_norm = 0.0;
  bool success = false;
  double delta_k = 1.0;
  double delta_T = 0.0;
  double phi_bar = 0.0;
  int mterm_clause = 0;
  std::array<double, 3> eps{0.0, 0.0, 0.0};  // ladder after this iteration's shrinks
  long shrinks = 0;
  long fun_evals = 0;
  std::array<long, 3> deriv_evals{0, 0, 0};
  long component_evals = 0;
  std::array<long, 3> sample_sizes{0, 0, 0};
  bool full_batch = false;
  std::vector<FlagEvent> flags;
};

struct RunReport {
  Termination status;
  std::vector<IterRecord> trace;
  EvalCounters counters;
  long total_shrinks = 0;
  Vector x_final;
  double sigma_final = 0.0;

  long iterations() const {
    long n = 0;
    for (const auto& r : trace) n += r.terminal ? 0 : 1;
    return n;
  }
  long successful() const {
    long n = 0;
    for (const auto& r : trace) n += r.success ? 1 : 0;
    return n;
  }
};

struct Step1Outcome {
  std::optional<TerminationKind> terminate;
  PhiResult phi;
  long shrinks = 0;
};

struct Step2Outcome {
  std::optional<TerminationKind> terminate;
  StepResult step;
  long shrinks = 0;
};

struct Step3Outcome {
  double rho = 0.0;
  bool accepted = false;
  double f_current = 0.0;
};

/// Optimality check at x_k with the dynamic-accuracy loop.
inline Step1Outcome step1_check(IterState& st, Oracle& oracle, const AlgoParams& prm, const Orders& o,
                                 std::vector<FlagEvent>* flags = nullptr) {
  Step1Outcome out;
  const double xi = 0.5 * st.omega * prm.eps;
  while (true) {
    const DerivativeBundle b = oracle.request_derivatives(st.x, st.ladder, o.q);
    out.phi = phi_measure(b, st.delta_prev, o.q);
    const VerifyFlag f = verify({st.delta_prev, out.phi.phi_bar, st.ladder.zetas(o.q), st.omega, xi});
    if (flags) flags->push_back({'1', to_int(f)});
    if (f == VerifyFlag::ZeroIncrement || f == VerifyFlag::SmallIncrement) {
      out.terminate = TerminationKind::NegligibleIncrementStep1;
      return out;
    }
    if (f == VerifyFlag::RelativeOK) {
      if (out.phi.phi_bar <= prm.eps / (1.0 + st.omega) * chi(o.q, st.delta_prev))
        out.terminate = TerminationKind::OptimalAtStep1;
      return out;
    }
    st.ladder.shrink();
    ++out.shrinks;
  }
}

/// Step computation with the dynamic-accuracy loop.
inline Step2Outcome step2_compute(IterState& st, Oracle& oracle, const AlgoParams& prm, const Orders& o,
                                  std::vector<FlagEvent>* flags = nullptr) {
  Step2Outcome out;
  const double xi_s = 0.5 * st.omega * prm.eps;
  const double xi_d = prm.model_xi_factor() * 0.5 * st.omega * prm.eps;
  const double long_step = prm.mu * std::pow(prm.eps, o.step_exponent());
  while (true) {
    const DerivativeBundle b = oracle.request_derivatives(st.x, st.ladder, o.p);
    out.step = descend_model(b, st.sigma, prm, o, prm.eps);
    if (out.step.zero_step || !(out.step.delta_T > 0.0)) {
      out.step.zero_step = true;
      out.terminate = TerminationKind::ZeroStep;
      return out;
    }
    // p = 1: the relative bound holds identically for s = -g/sigma
    if (o.p == 1) {
      if (flags) flags->push_back({'s', to_int(VerifyFlag::RelativeOK)});
      return out;
    }
    const double snorm = out.step.s.norm();
    VerifyFlag fs = verify({snorm, out.step.delta_T, st.ladder.zetas(o.p), st.omega, xi_s});
    if (flags) flags->push_back({'s', to_int(fs)});
    if (fs == VerifyFlag::ZeroIncrement || fs == VerifyFlag::SmallIncrement) {
      // s is already the global model minimizer, so the repeated check sees the same data
      fs = verify({snorm, out.step.delta_T, st.ladder.zetas(o.p), st.omega, xi_s});
      if (flags) flags->push_back({'s', to_int(fs)});
      if (fs != VerifyFlag::NotCertified && fs != VerifyFlag::RelativeOK) {
        out.terminate = TerminationKind::StrongOptimalityStep2;
        return out;
      }
    }
    if (fs == VerifyFlag::RelativeOK) {
      if (snorm >= long_step) return out;
      const double inc = out.step.model_phi ? out.step.model_phi->phi_bar : 0.0;
      const VerifyFlag fd = verify({out.step.delta_k, inc, st.ladder.zetas(o.q, 3.0), st.omega, xi_d});
      if (flags) flags->push_back({'d', to_int(fd)});
      if (fd != VerifyFlag::NotCertified) return out;
    }
    st.ladder.shrink();
    ++out.shrinks;
  }
}

/// Trial-point acceptance: rho = (f(x) - f(x+s)) / dT with both values at accuracy omega dT.
inline Step3Outcome step3_accept(const IterState& st, Oracle& oracle, const StepResult& step,
                                 const AlgoParams& prm) {
  if (!(step.delta_T > 0.0)) throw std::invalid_argument("step3_accept: Taylor increment must be positive");
  const double acc = st.omega * step.delta_T;
  const FunctionEstimate ft = oracle.request_function(st.x + step.s, acc);
  const FunctionEstimate fc = oracle.request_function(st.x, acc);
  Step3Outcome out;
  out.f_current = fc.value;
  out.rho = (fc.value - ft.value) / step.delta_T;
  out.accepted = out.rho >= prm.eta1;
  return out;
}

/// Endpoints of the admissible intervals: gamma1 sigma (floored at sigma_min)
/// on very successful steps, sigma on successful ones, gamma2 sigma otherwise.
inline std::pair<double, double> sigma_omega_update(double rho, double sigma, const AlgoParams& prm) {
  double next = sigma;
  if (rho >= prm.eta2)
    next = std::max(prm.sigma_min, prm.gamma1 * sigma);
  else if (!(rho >= prm.eta1))
    next = prm.gamma2 * sigma;
  return {next, std::min(prm.kappa_omega, 1.0 / next)};
}

inline IterState initial_state(const Problem& problem, const AlgoParams& prm) {
  IterState st;
  st.x = problem.x0;
  st.sigma = prm.sigma0;
  st.omega = prm.omega0();
  st.delta_prev = prm.delta_init;
  st.ladder = AccuracyLadder::from(prm);
  return st;
}

/// Main loop from problem.x0 until a termination test fires or max_iter
/// iterations have completed.
inline RunReport run(const Problem& problem, Oracle& oracle, const AlgoParams& prm, const Orders& o) {
  prm.validate();
  o.validate();
  if (problem.x0.size() != problem.n || oracle.dimension() != problem.n)
    throw std::invalid_argument("run: problem, start point and oracle dimensions differ");
  IterState st = initial_state(problem, prm);
  RunReport rep;
  bool prev_full = false;
  for (st.k = 0;; ++st.k) {
    if (st.k >= prm.max_iter) {
      rep.status = {TerminationKind::Budget, st.delta_prev, st.k};
      break;
    }
    IterRecord rec;
    rec.k = st.k;
    rec.sigma = st.sigma;
    rec.sigma_next = st.sigma;
    rec.omega = st.omega;
    const EvalCounters before = oracle.counters();
    st.ladder.reset();

    auto finish_record = [&]() {
      const EvalCounters& now = oracle.counters();
      rec.fun_evals = now.fun_evals - before.fun_evals;
      for (int j = 1; j <= 2; ++j) rec.deriv_evals[j] = now.deriv_evals[j] - before.deriv_evals[j];
      rec.component_evals = now.component_evals - before.component_evals;
      rec.eps = st.ladder.eps;
      rec.sample_sizes = oracle.last_sample_sizes();
      const bool full = oracle.full_batch();
      rec.full_batch = full && prev_full;
      prev_full = full;
    };
    auto terminate = [&](TerminationKind kind) {
      rec.terminal = true;
      finish_record();
      rep.trace.push_back(std::move(rec));
      rep.status = {kind, st.delta_prev, st.k};
    };

    const Step1Outcome s1 = step1_check(st, oracle, prm, o, &rec.flags);
    rec.shrinks = s1.shrinks;
    rec.phi_bar = s1.phi.phi_bar;
    if (s1.terminate) {
      terminate(*s1.terminate);
      break;
    }
    const Step2Outcome s2 = step2_compute(st, oracle, prm, o, &rec.flags);
    rec.shrinks += s2.shrinks;
    if (s2.terminate) {
      terminate(*s2.terminate);
      break;
    }
    const StepResult& step = s2.step;
    const Step3Outcome s3 = step3_accept(st, oracle, step, prm);
    rec.rho = s3.rho;
    rec.success = s3.accepted;
    rec.f_estimate = s3.f_current;
    rec.step_norm = step.s.norm();
    rec.delta_k = step.delta_k;
    rec.delta_T = step.delta_T;
    rec.mterm_clause = step.mterm_clause;
    if (s3.accepted) st.x += step.s;
    const auto [sigma_next, omega_next] = sigma_omega_update(s3.rho, st.sigma, prm);
    st.sigma = sigma_next;
    st.omega = omega_next;
    st.delta_prev = step.delta_k;
    rec.sigma_next = sigma_next;
    finish_record();
    rep.trace.push_back(std::move(rec));
  }
  rep.counters = oracle.counters();
  rep.total_shrinks = st.ladder.total_shrinks;
  rep.x_final = st.x;
  rep.sigma_final = st.sigma;
  return rep;
}

/// Ladder accuracy below which every VERIFY call of an iteration returns a
/// nonzero flag, given omega_k >= omega_min.
inline double shrink_threshold(const AlgoParams& prm, double omega_min, double eps) {
  const double kw = prm.kappa_omega;
  return prm.vartheta * (1.0 - kw) / (6.0 * (1.0 + kw) * (1.0 + kw)) * omega_min * eps;
}

inline double shrink_ratio(const AlgoParams& prm, double omega_min, double eps) {
  return (std::log(shrink_threshold(prm, omega_min, eps)) - std::log(prm.kappa_eps)) / std::log(prm.gamma_eps);
}

/// Smallest nu >= 0 with kappa_eps gamma_eps^nu <= thr. Rounding the ratio
/// down instead would undercount by one whenever it is not an integer.
inline double shrink_limit(const AlgoParams& prm, double omega_min, double eps) {
  const double thr = shrink_threshold(prm, omega_min, eps);
  double nu = std::max(0.0, std::ceil(shrink_ratio(prm, omega_min, eps)));
  while (nu > 0.0 && prm.kappa_eps * std::pow(prm.gamma_eps, nu - 1.0) <= thr) nu -= 1.0;
  while (prm.kappa_eps * std::pow(prm.gamma_eps, nu) > thr) nu += 1.0;
  return nu;
}

/// Worst-case constants and evaluation bounds for a problem with known
/// Hölder constant L and lower bound f_low.
struct ComplexityBudget {
  double sigma_max = 0.0;
  double omega_min = 0.0;
  double kappa_s = 0.0;
  double kappa_p = 0.0;
  double successful_bound = 0.0;
  double tau = 0.0;  // total iterations
  double nu_max = 0.0;
  double deriv_bound_flexible = 0.0;
  double deriv_bound_monotonic = 0.0;
  double fun_bound = 0.0;
};

inline ComplexityBudget complexity_budget(double L, double f0, double f_low, const AlgoParams& prm, const Orders& o,
                                          double eps) {
  if (!(L >= 0.0) || !std::isfinite(f0) || !std::isfinite(f_low))
    throw std::invalid_argument("complexity_budget: need finite L >= 0, f(x0) and f_low");
  ComplexityBudget b;
  const double kw = prm.kappa_omega;
  b.sigma_max = std::max(prm.sigma0, prm.gamma3 * (L + 3.0) / (1.0 - prm.eta2));
  b.omega_min = std::min(kw, 1.0 / b.sigma_max);
  const double gap = o.gap();
  const double core = (1.0 - kw) * (1.0 - prm.vartheta) * holder_factorial_gap(o) /
                      ((1.0 + kw) * (L + b.sigma_max + prm.theta * (1.0 + kw)));
  b.kappa_s = std::min(prm.mu, std::pow(core, 1.0 / gap));
  const double pb = o.p + o.beta;
  b.kappa_p = holder_factorial(o.p, o.beta) / (prm.eta1 * (1.0 - prm.alpha) * prm.sigma_min) *
              std::max(1.0 / std::pow(prm.mu, pb), std::pow(1.0 / core, pb / gap));
  const double scaled = b.kappa_p * (f0 - f_low) * std::pow(eps, -o.complexity_exponent());
  b.successful_bound = std::floor(scaled) + 1.0;
  const double ratio = 1.0 + std::abs(std::log(prm.gamma1)) / std::log(prm.gamma2);
  b.tau = std::floor(std::floor(scaled + 1.0) * ratio + std::log(b.sigma_max / prm.sigma0) / std::log(prm.gamma2));
  b.nu_max = shrink_limit(prm, b.omega_min, eps);
  b.deriv_bound_flexible = (1.0 + b.nu_max) * b.tau;
  b.deriv_bound_monotonic = b.nu_max + b.tau;
  b.fun_bound = 2.0 * b.tau;
  return b;
}

inline ComplexityBudget complexity_budget(const Problem& problem, const AlgoParams& prm, const Orders& o,
                                          double eps) {
  const auto L = problem.L(o.p);
  if (!L || !problem.f_low) throw std::invalid_argument("complexity_budget: problem has no known L or f_low");
  return complexity_budget(*L, problem.value(problem.x0), *problem.f_low, prm, o, eps);
}

}  // namespace arda
