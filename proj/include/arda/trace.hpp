#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "arda/checks.hpp"
#include "arda/driver.hpp"

namespace arda {

inline constexpr const char* kTraceSchema = "arda-trace/1";

namespace detail {
inline nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace detail

/// FNV-1a over the raw bytes of x, as 16 hex digits.
inline std::string digest(const Vector& x) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : x) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json record_to_json(const IterRecord& r) {
  using detail::num;
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : r.flags) flags.push_back(std::string(1, f.site) + ":" + std::to_string(f.flag));
  return {{"schema", kTraceSchema},
          {"type", "iteration"},
          {"k", r.k},
          {"terminal", r.terminal},
          {"sigma", num(r.sigma)},
          {"sigma_next", num(r.sigma_next)},
          {"omega", num(r.omega)},
          {"f_estimate", num(r.f_estimate)},
          {"rho", num(r.rho)},
          {"step_norm", num(r.step_norm)},
          {"success", r.success},
          {"delta_k", num(r.delta_k)},
          {"delta_T", num(r.delta_T)},
          {"phi_bar", num(r.phi_bar)},
          {"mterm_clause", r.mterm_clause},
          {"eps", {num(r.eps[1]), num(r.eps[2])}},
          {"shrinks", r.shrinks},
          {"flags", flags},
          {"fun_evals", r.fun_evals},
          {"deriv_evals", {r.deriv_evals[1], r.deriv_evals[2]}},
          {"component_evals", r.component_evals},
          {"sample_sizes", {r.sample_sizes[0], r.sample_sizes[1], r.sample_sizes[2]}},
          {"full_batch", r.full_batch}};
}

/// One line per iteration record.
inline void write_trace(std::ostream& out, const RunReport& rep) {
  for (const auto& r : rep.trace) out << record_to_json(r).dump() << '\n';
}

inline nlohmann::json budget_to_json(const ComplexityBudget& b) {
  using detail::num;
  return {{"sigma_max", num(b.sigma_max)},
          {"omega_min", num(b.omega_min)},
          {"kappa_s", num(b.kappa_s)},
          {"kappa_p", num(b.kappa_p)},
          {"successful_bound", num(b.successful_bound)},
          {"tau", num(b.tau)},
          {"nu_max", num(b.nu_max)},
          {"deriv_bound_flexible", num(b.deriv_bound_flexible)},
          {"deriv_bound_monotonic", num(b.deriv_bound_monotonic)},
          {"fun_bound", num(b.fun_bound)}};
}

/// Final record: status, totals, the final point and, when the problem has
/// known constants, the worst-case budget with its check outcome.
inline nlohmann::json summary_to_json(const RunReport& rep, const Problem& problem, const AlgoParams& prm,
                                      const std::optional<ComplexityBudget>& budget) {
  using detail::num;
  nlohmann::json x = nlohmann::json::array();
  for (double v : rep.x_final) x.push_back(num(v));
  nlohmann::json j{{"schema", kTraceSchema},
                   {"type", "summary"},
                   {"status", to_string(rep.status.kind)},
                   {"k_final", rep.status.k_final},
                   {"delta_at_exit", num(rep.status.delta_at_exit)},
                   {"iterations", rep.iterations()},
                   {"successful", rep.successful()},
                   {"fun_evals", rep.counters.fun_evals},
                   {"deriv_evals", {rep.counters.deriv_evals[1], rep.counters.deriv_evals[2]}},
                   {"component_evals", rep.counters.component_evals},
                   {"total_shrinks", rep.total_shrinks},
                   {"sigma_final", num(rep.sigma_final)},
                   {"sigma_max_observed", num(observed_sigma_max(rep, prm.sigma0))},
                   {"x_final", x},
                   {"x_digest", digest(rep.x_final)},
                   {"f_final", num(problem.value(rep.x_final))},
                   {"grad_norm_final", num(problem.gradient(rep.x_final).norm())},
                   {"counting_ok", check_counting(rep, prm).ok}};
  if (budget) {
    j["budget"] = budget_to_json(*budget);
    j["bounds_ok"] = check_theorem_bounds(rep, *budget, prm).ok;
  }
  return j;
}

}  // namespace arda
