#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace arda {

enum class Schedule { Flexible, Monotonic };

inline const char* to_string(Schedule s) { return s == Schedule::Flexible ? "flexible" : "monotonic"; }

inline Schedule schedule_from_string(const std::string& s) {
  if (s == "flexible") return Schedule::Flexible;
  if (s == "monotonic") return Schedule::Monotonic;
  throw std::invalid_argument("unknown schedule '" + s + "' (expected flexible|monotonic)");
}

/// Every algorithm constant plus the termination budget.
struct AlgoParams {
  double eta1 = 0.25;
  double eta2 = 0.9;
  double gamma1 = 0.5;
  double gamma2 = 2.0;
  double gamma3 = 4.0;
  double sigma0 = 1.0;
  double sigma_min = 1e-8;
  double alpha = 0.5;
  double kappa_omega = 0.0625;
  double theta = 0.5;
  double mu = 1.0;
  double vartheta = 0.5;
  double delta_init = 1.0;
  double eps = 1e-3;
  double gamma_eps = 0.1;
  double kappa_eps = 1.0;
  long max_iter = 100000;
  Schedule schedule = Schedule::Flexible;

  bool operator==(const AlgoParams&) const = default;

  double omega0() const { return std::fmin(kappa_omega, 1.0 / sigma0); }

  /// Absolute threshold used by the model-measure check of the step computation.
  double model_xi_factor() const {
    return vartheta * (1.0 - kappa_omega) / ((1.0 + kappa_omega) * (1.0 + kappa_omega));
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("AlgoParams: " + what); };
    if (!(0.0 < eta1 && eta1 <= eta2 && eta2 < 1.0)) fail("need 0 < eta1 <= eta2 < 1");
    if (!(0.0 < gamma1 && gamma1 < 1.0 && 1.0 < gamma2 && gamma2 < gamma3)) fail("need 0 < gamma1 < 1 < gamma2 < gamma3");
    if (!(sigma0 > 0.0)) fail("sigma0 must be positive");
    if (!(sigma_min > 0.0 && sigma_min <= sigma0)) fail("sigma_min must lie in (0, sigma0]");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
    if (!(kappa_omega > 0.0 && kappa_omega <= 0.5 * alpha * eta1)) fail("kappa_omega must lie in (0, alpha*eta1/2]");
    if (!(theta > 0.0)) fail("theta must be positive");
    if (!(mu > 0.0 && mu <= 1.0)) fail("mu must lie in (0,1]");
    if (!(vartheta > 0.0 && vartheta < 1.0)) fail("vartheta must lie in (0,1)");
    if (!(delta_init > 0.0 && delta_init <= 1.0)) fail("delta_init must lie in (0,1]");
    if (!(eps > 0.0 && eps < 1.0)) fail("eps must lie in (0,1)");
    if (!(gamma_eps > 0.0 && gamma_eps < 1.0)) fail("gamma_eps must lie in (0,1)");
    if (!(kappa_eps > 0.0)) fail("kappa_eps must be positive");
    if (max_iter < 0) fail("max_iter must be nonnegative");
  }
};

}  // namespace arda
