// Copyright 2026 The froc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "froc/errors.hpp"

namespace froc {

/// Tolerated probability of the empirical risk understating the truth.
struct RiskBudget {
  double delta = 0.1;

  friend bool operator==(const RiskBudget&, const RiskBudget&) = default;
};

inline void validate(const RiskBudget& b) {
  if (!(b.delta > 0.0 && b.delta < 1.0)) throw domain_error("budget: delta must be in (0,1)");
}

/// Sufficient statistics of a reference-set evaluation: sample count and the
/// empirical mean risk. Everything the bounds need.
struct ReferenceStats {
  long long n_ref = 0;
  double r_hat = 0.0;

  friend bool operator==(const ReferenceStats&, const ReferenceStats&) = default;
};

inline void validate(const ReferenceStats& s) {
  if (s.n_ref < 1) throw domain_error("stats: n_ref must be >= 1");
  if (!(s.r_hat >= 0.0 && s.r_hat <= 1.0)) throw domain_error("stats: r_hat must be in [0,1]");
}

/// Both one-sided upper bounds on the true mean risk plus their minimum, the
/// conformal unlearning risk.
struct BoundResult {
  ReferenceStats stats;
  double delta = 0.0;
  double alpha_hoeffding = 0.0;
  double alpha_bentkus = 0.0;
  double alpha_unlearn = 0.0;
};

/// Bernoulli KL divergence h(a, b) = a log(a/b) + (1-a) log((1-a)/(1-b)),
/// with the 0 log 0 = 0 convention. Boundary b in {0, 1} is only finite when
/// a matches; otherwise +infinity is returned.
inline double kl_bernoulli(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0)) throw domain_error("kl_bernoulli: a must be in [0,1]");
  if (!(b >= 0.0 && b <= 1.0)) throw domain_error("kl_bernoulli: b must be in [0,1]");
  if (b == 0.0) return a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  if (b == 1.0) return a == 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
  double h = 0.0;
  if (a > 0.0) h += a * std::log(a / b);
  if (a < 1.0) h += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  return std::max(h, 0.0);
}

/// Partial inverse of h on its increasing branch: the unique b in [a, 1) with
/// h(a, b) = x. Bisection runs until the bracket collapses to adjacent
/// doubles (cap 200 iterations) and returns the upper end, so the result
/// never understates x. Closed forms cover a = 0 (b = 1 - e^{-x}) and a = 1.
inline double kl_upper_inverse(double x, double a) {
  if (!(x >= 0.0)) throw domain_error("kl_upper_inverse: x must be >= 0");
  if (!(a >= 0.0 && a <= 1.0)) throw domain_error("kl_upper_inverse: a must be in [0,1]");
  if (a == 1.0) return 1.0;
  if (x == 0.0) return a;
  if (std::isinf(x)) return 1.0;
  if (a == 0.0) return -std::expm1(-x);
  double lo = a;   // h(a, lo) = 0 < x
  double hi = 1.0; // h(a, hi) = +inf > x
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (kl_bernoulli(a, mid) < x ? lo : hi) = mid;
  }
  return hi;
}

/// P(Bin(n, p) <= k), summed exactly in log space. Terms are anchored at the
/// dominant index and accumulated outward; the per-term cutoff keeps the
/// truncation error far below the 1e-12 agreement the tests demand. No
/// normal or Poisson approximation at any n.
inline double binom_cdf(long long k, long long n, double p) {
  if (n < 1) throw domain_error("binom_cdf: n must be >= 1");
  if (k < 0 || k > n) throw domain_error("binom_cdf: k must be in [0,n]");
  if (!(p >= 0.0 && p <= 1.0)) throw domain_error("binom_cdf: p must be in [0,1]");
  if (p == 0.0 || k == n) return 1.0;
  if (p == 1.0) return 0.0;  // k < n here

  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  const auto log_term = [&](long long j) {
    return lg_n1 - std::lgamma(static_cast<double>(j) + 1.0) -
           std::lgamma(static_cast<double>(n - j) + 1.0) +
           static_cast<double>(j) * log_p + static_cast<double>(n - j) * log_q;
  };

  const long long unconstrained_mode = static_cast<long long>((static_cast<double>(n) + 1.0) * p);
  const long long anchor_idx = std::clamp<long long>(unconstrained_mode, 0, k);
  const double anchor = log_term(anchor_idx);

  double rest = 0.0;
  for (long long j = anchor_idx - 1; j >= 0; --j) {
    const double t = std::exp(log_term(j) - anchor);
    rest += t;
    if (t < 1e-18 * (1.0 + rest)) break;  // terms fall monotonically below the anchor
  }
  for (long long j = anchor_idx + 1; j <= k; ++j) {
    const double t = std::exp(log_term(j) - anchor);
    rest += t;
    if (t < 1e-18 * (1.0 + rest)) break;
  }
  return std::min(std::exp(anchor + std::log1p(rest)), 1.0);
}

namespace detail {

// ceil(n * r_hat) with a guard against float noise pushing an exact integer
// product just above itself.
inline long long bentkus_count(long long n, double r_hat) {
  const double v = static_cast<double>(n) * r_hat;
  const long long k = static_cast<long long>(std::ceil(v - 1e-9));
  return std::clamp<long long>(k, 0, n);
}

}  // namespace detail

/// Bentkus-style upper bound: the smallest p with
/// P(Bin(N_ref, p) <= ceil(N_ref * R_hat)) <= delta / e.
/// The CDF is strictly decreasing in p, so bisection over [r_hat, 1] applies;
/// k = 0 and k = n short-circuit to closed forms. delta/e is compared in
/// extended precision so tiny budgets do not underflow.
inline double bentkus_ucb(const RiskBudget& budget, const ReferenceStats& stats) {
  validate(budget);
  validate(stats);
  const long long n = stats.n_ref;
  const long long k = detail::bentkus_count(n, stats.r_hat);
  if (k >= n) return 1.0;  // the CDF is identically 1, never <= delta/e
  if (k == 0) {
    // (1-p)^n <= delta/e  <=>  p >= 1 - (delta/e)^{1/n}
    const double p = -std::expm1((std::log(budget.delta) - 1.0) / static_cast<double>(n));
    return std::clamp(p, stats.r_hat, 1.0);
  }
  const long double target = static_cast<long double>(budget.delta) / expl(1.0L);
  double lo = stats.r_hat;
  double hi = 1.0;  // binom_cdf(k, n, 1) = 0 <= target since k < n
  if (static_cast<long double>(binom_cdf(k, n, lo)) <= target) return lo;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (static_cast<long double>(binom_cdf(k, n, mid)) <= target ? hi : lo) = mid;
  }
  return hi;
}

/// Hoeffding-style upper bound: h^{-1}(ln(1/delta) / N_ref; R_hat) on the
/// increasing branch of the Bernoulli KL divergence.
inline double hoeffding_ucb(const RiskBudget& budget, const ReferenceStats& stats) {
  validate(budget);
  validate(stats);
  const double x = -std::log(budget.delta) / static_cast<double>(stats.n_ref);
  return kl_upper_inverse(x, stats.r_hat);
}

/// Conformal unlearning risk: the minimum of the two bounds, with both
/// components kept for diagnostics. Always >= r_hat.
inline BoundResult conformal_unlearning_risk(const RiskBudget& budget,
                                             const ReferenceStats& stats) {
  BoundResult result;
  result.stats = stats;
  result.delta = budget.delta;
  result.alpha_hoeffding = hoeffding_ucb(budget, stats);
  result.alpha_bentkus = bentkus_ucb(budget, stats);
  result.alpha_unlearn = std::min(result.alpha_hoeffding, result.alpha_bentkus);
  return result;
}

/// Empirical check of the risk-control condition: how often per-sample risks
/// exceed a candidate bound, and whether that rate fits a budget.
struct ViolationReport {
  double violation_rate = 0.0;
  std::size_t violations = 0;
  std::size_t total = 0;

  bool satisfied_at(double delta) const { return violation_rate <= delta; }
};

inline ViolationReport check_condition(std::span<const double> per_sample_risks, double alpha) {
  if (per_sample_risks.empty()) throw config_error("check_condition: empty risk list");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw domain_error("check_condition: alpha must be in [0,1]");
  ViolationReport report;
  report.total = per_sample_risks.size();
  for (const double r : per_sample_risks) {
    if (!(r >= 0.0 && r <= 1.0)) throw domain_error("check_condition: risk outside [0,1]");
    if (r > alpha) ++report.violations;
  }
  report.violation_rate =
      static_cast<double>(report.violations) / static_cast<double>(report.total);
  return report;
}

}  // namespace froc
