#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "arda/core_math.hpp"

namespace arda {

/// Outcome of an accuracy check on an inexact Taylor increment.
enum class VerifyFlag : int {
  NotCertified = 0,    // absolute accuracies must shrink
  ZeroIncrement = 1,   // increment is zero and every zeta_j <= xi
  RelativeOK = 2,      // relative error at most omega
  SmallIncrement = 3,  // increment itself certified small
};

inline int to_int(VerifyFlag f) { return static_cast<int>(f); }

struct VerifyInput {
  double delta = 1.0;        // bound on ||v||
  double increment = 0.0;    // inexact increment at v, assumed >= 0
  std::vector<double> zetas; // absolute accuracies zeta_1..zeta_r
  double omega = 0.5;        // relative accuracy target in (0,1)
  double xi = 1.0;           // absolute accuracy target
};

/// sum_j zeta_j delta^j / j!, the worst-case error of an order-r increment
/// over the ball of radius delta.
inline double increment_error_bound(std::span<const double> zetas, double delta) {
  double term = 1.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < zetas.size(); ++j) {
    term *= delta / static_cast<double>(j + 1);
    sum += zetas[j] * term;
  }
  return sum;
}

/// Ordered cascade: zero increment, then relative accuracy, then small increment.
inline VerifyFlag verify(const VerifyInput& in) {
  if (in.increment < 0.0) throw std::invalid_argument("verify: increment must be nonnegative");
  if (in.zetas.empty()) throw std::invalid_argument("verify: need at least one accuracy");
  const int r = static_cast<int>(in.zetas.size());
  const double zmax = *std::max_element(in.zetas.begin(), in.zetas.end());
  if (in.increment == 0.0 && zmax <= in.xi) return VerifyFlag::ZeroIncrement;
  if (in.increment > 0.0) {
    const double err = increment_error_bound(in.zetas, in.delta);
    if (err <= in.omega * in.increment) return VerifyFlag::RelativeOK;
    // zmax <= xi implies err <= xi chi_r(delta); tested directly so rounding
    // in the two sums cannot break completeness.
    if (zmax <= in.xi || err <= in.xi * chi(r, in.delta)) return VerifyFlag::SmallIncrement;
  }
  return VerifyFlag::NotCertified;
}

}  // namespace arda
