#pragma once

#include <cmath>
#include <string>

namespace snls {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double norm_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// log Phi(x), stable far into the left tail where erfc underflows.
inline double log_norm_cdf(double x) {
  if (x > -10.0) return std::log(norm_cdf(x));
  // Asymptotic expansion Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4) for x -> -inf.
  const double x2 = x * x;
  return -0.5 * x2 - 0.5 * std::log(2.0 * M_PI) - std::log(-x) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for k successes in n trials.
inline Interval wilson_interval(double k, double n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double p = k / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // exact endpoints: roundoff must not leave a sliver at k = 0 or k = n
  const double lo = k <= 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = k >= n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

struct ProbabilityEstimate {
  double p_hat = 0.0;
  long long n_samples = 0;
  Interval wilson_ci;
  std::string method;  // "monte-carlo" or "closed-form"
  double std_error = 0.0;
  double tail_bound = 0.0;  // neglected mass beyond the truncation horizon
};

}  // namespace snls
