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
#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "froc/conformal.hpp"
#include "froc/risk_model.hpp"

namespace froc {

inline constexpr int table_format_version = 1;

enum class RiskMode { PER_SAMPLE, AGGREGATE };

inline std::string to_string(RiskMode m) {
  return m == RiskMode::PER_SAMPLE ? "PER_SAMPLE" : "AGGREGATE";
}

inline RiskMode parse_risk_mode(std::string_view token) {
  if (token == "PER_SAMPLE") return RiskMode::PER_SAMPLE;
  if (token == "AGGREGATE") return RiskMode::AGGREGATE;
  throw validation_error("mode: expected PER_SAMPLE or AGGREGATE, got '" + std::string(token) + "'");
}

/// One configuration's row in the lookup table: the sufficient statistics
/// (N_ref, R_hat) plus the full risk decomposition. AGGREGATE entries carry
/// N_ref = 1 and the normalized aggregate risk as R_hat; they are an
/// approximation and are labeled as such everywhere they surface.
struct TableEntry {
  UnlearningConfig config;
  ReferenceStats stats;
  RiskBreakdown breakdown;
  RiskMode mode = RiskMode::AGGREGATE;
};

/// How tau_f (the forgetting target inside delta_f) is resolved at build
/// time: the median of the shift scores over the candidate grid, or a fixed
/// user value.
struct TauPolicy {
  enum class Kind { MEDIAN_SHIFT, FIXED };
  Kind kind = Kind::MEDIAN_SHIFT;
  double value = 0.0;

  static TauPolicy median_shift() { return {Kind::MEDIAN_SHIFT, 0.0}; }
  static TauPolicy fixed(double v) {
    if (!std::isfinite(v)) throw domain_error("tau policy: fixed value must be finite");
    return {Kind::FIXED, v};
  }
  std::string describe() const { return kind == Kind::MEDIAN_SHIFT ? "median" : "fixed"; }
};

/// Versioned, immutable-by-convention table of per-configuration sufficient
/// statistics. Entries are sorted by config id; bounds for any delta are
/// recomputed exactly from (N_ref, R_hat) — nothing is interpolated.
struct LookupTable {
  int format_version = table_format_version;
  RiskWeights weights;       // tau_f holds the resolved value
  std::string tau_f_policy;  // provenance of tau_f ("median" or "fixed")
  std::vector<TableEntry> entries;
  std::optional<std::uint64_t> build_seed;

  const TableEntry* find(std::string_view config_id) const {
    const auto it = std::lower_bound(
        entries.begin(), entries.end(), config_id,
        [](const TableEntry& e, std::string_view id) { return e.config.id < id; });
    if (it == entries.end() || it->config.id != config_id) return nullptr;
    return &*it;
  }
};

namespace detail {

inline TableEntry make_entry(const UnlearningConfig& config, const ConfigMetrics& metrics,
                             const GridContext& ctx, const RiskWeights& weights) {
  TableEntry entry;
  entry.config = config;
  entry.breakdown = unified_risk(metrics, ctx, weights);
  if (metrics.has_samples()) {
    const std::vector<double> risks = per_sample_risks(metrics.per_sample, ctx, weights);
    entry.stats.n_ref = static_cast<long long>(risks.size());
    entry.stats.r_hat = aggregate_risk(risks);
    entry.mode = RiskMode::PER_SAMPLE;
  } else {
    entry.stats.n_ref = 1;
    entry.stats.r_hat = entry.breakdown.r_norm;
    entry.mode = RiskMode::AGGREGATE;
  }
  return entry;
}

}  // namespace detail

/// Build the lookup table over a candidate grid: one metrics record per grid
/// member, grid-wide context computed once, tau_f resolved per policy, one
/// entry per configuration. Deterministic for identical inputs regardless of
/// the job count.
inline LookupTable build_table(std::span<const UnlearningConfig> grid,
                               std::span<const ConfigMetrics> metrics, RiskWeights weights,
                               TauPolicy policy = TauPolicy::median_shift(), unsigned jobs = 1) {
  if (grid.empty()) throw config_error("build_table: empty configuration grid");
  if (jobs < 1) throw validation_error("build_table: jobs must be >= 1");

  std::unordered_map<std::string, const ConfigMetrics*> by_id;
  by_id.reserve(metrics.size());
  for (const ConfigMetrics& m : metrics) {
    validate(m);
    if (!by_id.emplace(m.config_id, &m).second)
      throw validation_error("build_table: duplicate metrics for config '" + m.config_id + "'");
  }
  std::vector<const ConfigMetrics*> matched;
  matched.reserve(grid.size());
  {
    std::unordered_map<std::string, int> grid_ids;
    for (const UnlearningConfig& c : grid) {
      validate(c);
      if (!grid_ids.emplace(c.id, 0).second)
        throw validation_error("build_table: duplicate config id '" + c.id + "' in grid");
      const auto it = by_id.find(c.id);
      if (it == by_id.end())
        throw validation_error("build_table: missing metrics for config '" + c.id + "'");
      matched.push_back(it->second);
    }
    if (metrics.size() != grid.size()) {
      for (const ConfigMetrics& m : metrics)
        if (!grid_ids.count(m.config_id))
          throw validation_error("build_table: metrics for unknown config '" + m.config_id + "'");
    }
  }

  const GridContext ctx = build_grid_context(metrics);

  if (policy.kind == TauPolicy::Kind::MEDIAN_SHIFT) {
    std::vector<double> shifts;
    shifts.reserve(grid.size());
    for (const ConfigMetrics* m : matched) shifts.push_back(forget_shift(*m, ctx));
    weights.tau_f = median(std::move(shifts));
  } else {
    weights.tau_f = policy.value;
  }
  validate(weights);

  LookupTable table;
  table.weights = weights;
  table.tau_f_policy = policy.describe();
  table.entries.resize(grid.size());

  const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(grid.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      table.entries[i] = detail::make_entry(grid[i], *matched[i], ctx, weights);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    const auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
          table.entries[i] = detail::make_entry(grid[i], *matched[i], ctx, weights);
        } catch (...) {
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failed) std::rethrow_exception(first_error);
  }

  std::sort(table.entries.begin(), table.entries.end(),
            [](const TableEntry& a, const TableEntry& b) { return a.config.id < b.config.id; });
  return table;
}

struct ValidMember {
  std::string config_id;
  double alpha_unlearn = 0.0;
};

/// Bonferroni-corrected valid configuration set: each entry's bound is
/// evaluated at delta / |entries| and kept iff it meets the target alpha.
/// Members are sorted ascending by bound, ties by id. Empty is a legitimate
/// outcome, not an error.
struct ValidSet {
  double alpha = 0.0;
  double delta = 0.0;
  double per_config_delta = 0.0;
  std::vector<ValidMember> members;
};

inline ValidSet valid_set(const LookupTable& table, double alpha, double delta) {
  if (table.entries.empty()) throw config_error("valid_set: table has no entries");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw domain_error("valid_set: alpha must be in [0,1]");
  validate(RiskBudget{delta});
  ValidSet result;
  result.alpha = alpha;
  result.delta = delta;
  result.per_config_delta = delta / static_cast<double>(table.entries.size());
  const RiskBudget per_config{result.per_config_delta};
  for (const TableEntry& entry : table.entries) {
    const BoundResult bound = conformal_unlearning_risk(per_config, entry.stats);
    if (bound.alpha_unlearn <= alpha)
      result.members.push_back({entry.config.id, bound.alpha_unlearn});
  }
  std::sort(result.members.begin(), result.members.end(),
            [](const ValidMember& a, const ValidMember& b) {
              if (a.alpha_unlearn != b.alpha_unlearn) return a.alpha_unlearn < b.alpha_unlearn;
              return a.config_id < b.config_id;
            });
  return result;
}

struct BudgetQuery {
  ValidSet set;
  std::optional<std::string> recommendation;  // absent iff the set is empty
};

/// Controller mode 1: all admissible configurations for (delta, alpha) plus
/// the one with the smallest bound (lexicographic tie-break).
inline BudgetQuery query_by_budget(const LookupTable& table, double delta, double alpha) {
  BudgetQuery query;
  query.set = valid_set(table, alpha, delta);
  if (!query.set.members.empty()) query.recommendation = query.set.members.front().config_id;
  return query;
}

namespace detail {

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace detail

/// Controller mode 2: bound for one configuration at the full, undivided
/// delta (single queries incur no multiplicity). Unknown ids raise a
/// not-found error listing the nearest ids in the table.
inline BoundResult query_by_config(const LookupTable& table, std::string_view config_id,
                                   double delta) {
  if (table.entries.empty()) throw config_error("query_by_config: table has no entries");
  const TableEntry* entry = table.find(config_id);
  if (entry == nullptr) {
    std::vector<std::pair<std::size_t, std::string>> ranked;
    ranked.reserve(table.entries.size());
    for (const TableEntry& e : table.entries)
      ranked.emplace_back(detail::levenshtein(config_id, e.config.id), e.config.id);
    std::sort(ranked.begin(), ranked.end());
    std::string nearest;
    for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
      if (i > 0) nearest += ", ";
      nearest += ranked[i].second;
    }
    throw not_found_error("query_by_config: unknown config id '" + std::string(config_id) +
                          "'; nearest: " + nearest);
  }
  return conformal_unlearning_risk(RiskBudget{delta}, entry->stats);
}

}  // namespace froc
