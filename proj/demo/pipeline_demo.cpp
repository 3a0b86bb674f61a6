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

// Library-level walk through the whole pipeline: simulate a grid, build the
// lookup table, pick a configuration under a risk budget, and sanity-check
// the bound against the per-sample risks it was computed from.

#include <iostream>

#include "froc/froc.hpp"

int main() {
  using namespace froc;

  const auto grid = default_grid();
  const auto profiles = default_profiles();
  const auto metrics = generate_metrics(profiles, grid, 1000, 1000, /*seed=*/42);

  const LookupTable table = build_table(grid, metrics, RiskWeights{});
  std::cout << "tau_f resolved to " << format_double(table.weights.tau_f) << " ("
            << table.tau_f_policy << " policy)\n\n";

  std::cout << "config          r_tilde   r_norm    R_hat     N_ref\n";
  for (const TableEntry& e : table.entries) {
    std::cout << e.config.id << std::string(16 - e.config.id.size(), ' ')
              << format_double(e.breakdown.r_tilde).substr(0, 8) << "  "
              << format_double(e.breakdown.r_norm).substr(0, 8) << "  "
              << format_double(e.stats.r_hat).substr(0, 8) << "  " << e.stats.n_ref << "\n";
  }

  const double delta = 0.1;
  const double alpha = 0.85;
  const BudgetQuery query = query_by_budget(table, delta, alpha);
  std::cout << "\nvalid set at alpha=" << alpha << ", delta=" << delta << " (Bonferroni "
            << format_double(query.set.per_config_delta) << " per config): "
            << query.set.members.size() << " member(s)\n";
  if (query.recommendation) {
    std::cout << "recommended: " << *query.recommendation << "\n";

    const BoundResult bound = query_by_config(table, *query.recommendation, delta);
    std::cout << "single-config bound at delta=" << delta << ": "
              << format_double(bound.alpha_unlearn) << "\n";

    const GridContext ctx = build_grid_context(metrics);
    for (const ConfigMetrics& m : metrics) {
      if (m.config_id != *query.recommendation) continue;
      const auto risks = per_sample_risks(m.per_sample, ctx, table.weights);
      const ViolationReport report = check_condition(risks, bound.alpha_unlearn);
      std::cout << "empirical violation rate against that bound: "
                << format_double(report.violation_rate)
                << (report.satisfied_at(delta) ? " (within budget)" : " (over budget)") << "\n";
    }
  } else {
    std::cout << "no admissible configuration at this budget\n";
  }
  return 0;
}
