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
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "froc/types.hpp"

namespace froc {

/// softplus(z) = log(1 + e^z), overflow-safe on both tails. Strictly
/// increasing and > 0 for every finite z (clamped to the smallest positive
/// double where e^z underflows).
inline double softplus(double z) {
  if (!std::isfinite(z)) throw domain_error("softplus: input must be finite");
  const double v = z > 30.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return v > 0.0 ? v : std::numeric_limits<double>::denorm_min();
}

/// Squash an unbounded unified risk into [0,1]. EXP_COMPLEMENT is strictly
/// increasing, so grid orderings survive the normalization; CLIP saturates.
inline double squash_risk(double r_tilde, Squash squash) {
  if (!std::isfinite(r_tilde) || r_tilde < 0.0)
    throw domain_error("squash_risk: r_tilde must be finite and >= 0");
  if (squash == Squash::CLIP) return std::min(r_tilde, 1.0);
  return -std::expm1(-r_tilde);
}

namespace detail {

// log of a loss after the epsilon clamp; rejects non-positive input.
inline double log_clamped_loss(double loss, const char* field) {
  if (!(loss > 0.0) || !std::isfinite(loss))
    throw domain_error(std::string("risk: ") + field + " must be positive and finite");
  return std::log(std::max(loss, loss_epsilon));
}

}  // namespace detail

/// Scan the grid's metrics for the extrema entering the shift/distortion
/// scores. Every configuration participates, including itself, so the
/// best-performing configuration scores an exact zero distortion.
inline GridContext build_grid_context(std::span<const ConfigMetrics> all_metrics) {
  if (all_metrics.empty()) throw config_error("grid context: metrics list is empty");
  std::unordered_set<std::string> seen;
  GridContext ctx;
  ctx.max_forget_acc = 0.0;
  ctx.min_retain_loss = std::numeric_limits<double>::infinity();
  ctx.max_retain_acc = 0.0;
  ctx.grid_size = all_metrics.size();
  for (const ConfigMetrics& m : all_metrics) {
    validate(m);
    if (!seen.insert(m.config_id).second)
      throw validation_error("grid context: duplicate config_id '" + m.config_id + "'");
    ctx.max_forget_acc = std::max(ctx.max_forget_acc, m.forget_acc);
    ctx.min_retain_loss = std::min(ctx.min_retain_loss, std::max(m.retain_loss, loss_epsilon));
    ctx.max_retain_acc = std::max(ctx.max_retain_acc, m.retain_acc);
  }
  return ctx;
}

/// Forgetting-shift score s: log forget-loss plus the gap to the grid's best
/// forget accuracy. Larger s means stronger forgetting.
inline double forget_shift(const ConfigMetrics& m, const GridContext& ctx) {
  const double log_loss = detail::log_clamped_loss(m.forget_loss, "forget_loss");
  if (m.forget_acc > ctx.max_forget_acc + 1e-12)
    throw validation_error("forget_shift: metrics '" + m.config_id +
                           "' exceed the grid context extrema (mixed grids?)");
  return log_loss + (ctx.max_forget_acc - m.forget_acc);
}

/// Retain distortion r: log-loss gap plus accuracy gap to the grid's
/// best-performing configuration. Nonnegative by construction; exactly zero
/// when the configuration attains both extrema.
inline double retain_distortion(const ConfigMetrics& m, const GridContext& ctx) {
  const double log_loss = detail::log_clamped_loss(m.retain_loss, "retain_loss");
  const double log_min = detail::log_clamped_loss(ctx.min_retain_loss, "min_retain_loss");
  const double loss_gap = log_loss - log_min;
  const double acc_gap = ctx.max_retain_acc - m.retain_acc;
  if (loss_gap < -1e-12 || acc_gap < -1e-12)
    throw validation_error("retain_distortion: metrics '" + m.config_id +
                           "' exceed the grid context extrema (mixed grids?)");
  return std::max(loss_gap, 0.0) + std::max(acc_gap, 0.0);
}

/// Unified per-configuration risk: softplus penalties on insufficient
/// forgetting (relative to tau_f) and on retain distortion, combined with
/// nonnegative weights, then squashed into [0,1].
inline RiskBreakdown unified_risk(const ConfigMetrics& m, const GridContext& ctx,
                                  const RiskWeights& w) {
  validate(w);
  RiskBreakdown b;
  b.config_id = m.config_id;
  b.s = forget_shift(m, ctx);
  b.r = retain_distortion(m, ctx);
  b.delta_f = softplus(w.tau_f - b.s);
  b.delta_u = softplus(b.r);
  b.r_tilde = w.w_f * b.delta_f + w.w_u * b.delta_u;
  b.r_norm = squash_risk(b.r_tilde, w.squash);
  return b;
}

/// Mean of normalized risks; each element must already live in [0,1].
inline double aggregate_risk(std::span<const double> values) {
  if (values.empty()) throw config_error("aggregate_risk: empty input");
  double sum = 0.0;
  for (const double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw domain_error("aggregate_risk: element outside [0,1]");
    sum += v;
  }
  return std::clamp(sum / static_cast<double>(values.size()), 0.0, 1.0);
}

/// Per-sample normalized risks. Each sample substitutes its own loss and 0/1
/// correctness for the aggregate loss/accuracy on its split; the opposite
/// split enters through the aggregate terms recomputed from the sample list.
/// Per-sample retain gaps may be negative (a sample can beat the grid's best
/// aggregate); softplus absorbs that.
inline std::vector<double> per_sample_risks(std::span<const SampleRecord> samples,
                                            const GridContext& ctx, const RiskWeights& w) {
  if (samples.empty()) throw config_error("per_sample_risks: empty sample list");
  validate(w);

  double loss_sum[2] = {0.0, 0.0};
  double acc_sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (const SampleRecord& s : samples) {
    validate(s);
    const int i = s.split == Split::FORGET ? 0 : 1;
    loss_sum[i] += s.loss;
    acc_sum[i] += s.correct;
    ++count[i];
  }
  if (count[0] == 0 || count[1] == 0)
    throw validation_error("per_sample_risks: need at least one sample per split");

  const double forget_loss = loss_sum[0] / static_cast<double>(count[0]);
  const double forget_acc = acc_sum[0] / static_cast<double>(count[0]);
  const double retain_loss = loss_sum[1] / static_cast<double>(count[1]);
  const double retain_acc = acc_sum[1] / static_cast<double>(count[1]);

  // recomputed split means may sit aggregate_consistency_tol away from the
  // stored aggregates that built ctx, so the mixed-grid check gets that slack
  const double log_min = detail::log_clamped_loss(ctx.min_retain_loss, "min_retain_loss");
  const double tol = 2.0 * aggregate_consistency_tol;
  if (forget_acc > ctx.max_forget_acc + tol || retain_acc > ctx.max_retain_acc + tol ||
      std::log(std::max(retain_loss, loss_epsilon)) < log_min - tol)
    throw validation_error("per_sample_risks: samples inconsistent with grid context (mixed grids?)");

  const double s_agg =
      detail::log_clamped_loss(forget_loss, "forget_loss") + (ctx.max_forget_acc - forget_acc);
  const double r_agg = (detail::log_clamped_loss(retain_loss, "retain_loss") - log_min) +
                       (ctx.max_retain_acc - retain_acc);

  std::vector<double> risks;
  risks.reserve(samples.size());
  for (const SampleRecord& rec : samples) {
    double delta_f = 0.0;
    double delta_u = 0.0;
    if (rec.split == Split::FORGET) {
      const double s_i = detail::log_clamped_loss(rec.loss, "sample loss") +
                         (ctx.max_forget_acc - static_cast<double>(rec.correct));
      delta_f = softplus(w.tau_f - s_i);
      delta_u = softplus(r_agg);
    } else {
      const double r_i = (detail::log_clamped_loss(rec.loss, "sample loss") - log_min) +
                         (ctx.max_retain_acc - static_cast<double>(rec.correct));
      delta_f = softplus(w.tau_f - s_agg);
      delta_u = softplus(r_i);
    }
    risks.push_back(squash_risk(w.w_f * delta_f + w.w_u * delta_u, w.squash));
  }
  return risks;
}

/// Median with the usual even-count average; used by the tau_f = median(s)
/// policy.
inline double median(std::vector<double> values) {
  if (values.empty()) throw config_error("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace froc
