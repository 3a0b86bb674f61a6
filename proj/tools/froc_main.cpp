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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "froc/froc.hpp"

namespace {

// Exit-code contract: 0 success, 1 validation/usage, 2 I/O,
// 3 empty valid set from query-budget.
constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_io = 2;
constexpr int exit_empty_set = 3;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw froc::io_error("cannot open '" + path + "' for reading");
  return in;
}

// Runs fn against --out (or stdout) and flushes; stream failures surface as
// io_error so they land on exit code 2.
template <typename Fn>
void with_output(const std::optional<std::string>& path, Fn&& fn) {
  if (!path) {
    fn(std::cout);
    std::cout.flush();
    if (!std::cout) throw froc::io_error("failure writing to stdout");
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw froc::io_error("cannot open '" + *path + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw froc::io_error("failure writing '" + *path + "' (partial write possible)");
}

froc::RiskWeights parse_weights_flag(const std::string& weights, const std::string& squash) {
  froc::RiskWeights w;
  const auto comma = weights.find(',');
  if (comma == std::string::npos)
    throw froc::usage_error("--weights expects 'wf,wu', got '" + weights + "'");
  try {
    w.w_f = std::stod(weights.substr(0, comma));
    w.w_u = std::stod(weights.substr(comma + 1));
  } catch (const std::exception&) {
    throw froc::usage_error("--weights expects two numbers, got '" + weights + "'");
  }
  w.squash = froc::parse_squash(squash);
  return w;
}

froc::TauPolicy parse_tau_flag(const std::string& tau) {
  if (tau == "median") return froc::TauPolicy::median_shift();
  try {
    return froc::TauPolicy::fixed(std::stod(tau));
  } catch (const froc::error&) {
    throw;
  } catch (const std::exception&) {
    throw froc::usage_error("--tau-f expects 'median' or a number, got '" + tau + "'");
  }
}

std::vector<long long> parse_n_list(const std::string& s) {
  std::vector<long long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw froc::usage_error("--n-list expects comma-separated integers, got '" + s + "'");
    }
  }
  if (out.empty()) throw froc::usage_error("--n-list must not be empty");
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "froc: warning: " << w << "\n";
}

froc::MetricsData load_metrics(const std::string& metrics_path,
                               const std::optional<std::string>& samples_path) {
  std::ifstream in = open_input(metrics_path);
  froc::MetricsData data = froc::parse_metrics(in);
  if (samples_path) {
    std::ifstream sin = open_input(*samples_path);
    froc::attach_samples(data, sin);
  }
  print_warnings(data.warnings);
  return data;
}

froc::LookupTable load_table(const std::string& path) {
  std::ifstream in = open_input(path);
  return froc::read_table(in);
}

void print_bound(std::ostream& out, const froc::BoundResult& b) {
  out << "n_ref=" << b.stats.n_ref << "\n"
      << "r_hat=" << froc::format_double(b.stats.r_hat) << "\n"
      << "delta=" << froc::format_double(b.delta) << "\n"
      << "alpha_hoeffding=" << froc::format_double(b.alpha_hoeffding) << "\n"
      << "alpha_bentkus=" << froc::format_double(b.alpha_bentkus) << "\n"
      << "alpha_unlearn=" << froc::format_double(b.alpha_unlearn) << "\n";
}

double mc_slack_bound(double delta, long long trials) {
  return delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
}

struct CommonTableFlags {
  std::string metrics_path;
  std::optional<std::string> samples_path;
  std::string weights = "1,1";
  std::string squash = "exp";
  std::string tau = "median";
};

froc::LookupTable build_from_flags(const CommonTableFlags& flags, unsigned jobs) {
  const froc::MetricsData data = load_metrics(flags.metrics_path, flags.samples_path);
  return froc::build_table(data.configs, data.metrics, parse_weights_flag(flags.weights, flags.squash),
                           parse_tau_flag(flags.tau), jobs);
}

const char* category_of(const froc::error& e) {
  if (dynamic_cast<const froc::io_error*>(&e)) return "io";
  if (dynamic_cast<const froc::usage_error*>(&e)) return "usage";
  if (dynamic_cast<const froc::not_found_error*>(&e)) return "not-found";
  if (dynamic_cast<const froc::domain_error*>(&e)) return "domain";
  if (dynamic_cast<const froc::config_error*>(&e)) return "config";
  if (dynamic_cast<const froc::validation_error*>(&e)) return "validation";
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"froc: risk-controlled selection of machine-unlearning configurations"};
  app.require_subcommand(1);
  int rc = exit_ok;

  // ---- bound ----
  auto* bound_cmd = app.add_subcommand("bound", "Conformal risk bound from (N_ref, R_hat, delta)");
  long long bound_n = 0;
  double bound_rhat = 0.0, bound_delta = 0.0;
  std::optional<std::string> bound_out;
  bound_cmd->add_option("--n-ref", bound_n, "reference set size")->required();
  bound_cmd->add_option("--r-hat", bound_rhat, "empirical reference risk in [0,1]")->required();
  bound_cmd->add_option("--delta", bound_delta, "risk budget in (0,1)")->required();
  bound_cmd->add_option("--out", bound_out, "output path (default stdout)");
  bound_cmd->callback([&] {
    const froc::BoundResult b =
        froc::conformal_unlearning_risk(froc::RiskBudget{bound_delta}, {bound_n, bound_rhat});
    with_output(bound_out, [&](std::ostream& out) { print_bound(out, b); });
  });

  // ---- risk ----
  auto* risk_cmd = app.add_subcommand("risk", "Unified risk breakdown for a metrics file");
  CommonTableFlags risk_flags;
  std::optional<std::string> risk_out;
  risk_cmd->add_option("--metrics", risk_flags.metrics_path, "froc-metrics/1 file")->required();
  risk_cmd->add_option("--per-sample", risk_flags.samples_path, "froc-samples/1 file");
  risk_cmd->add_option("--weights", risk_flags.weights, "penalty weights 'wf,wu' (default 1,1)");
  risk_cmd->add_option("--squash", risk_flags.squash, "normalization: exp or clip (default exp)");
  risk_cmd->add_option("--tau-f", risk_flags.tau, "forgetting target: 'median' or a number");
  risk_cmd->add_option("--out", risk_out, "output path (default stdout)");
  risk_cmd->callback([&] {
    const froc::LookupTable table = build_from_flags(risk_flags, 1);
    with_output(risk_out, [&](std::ostream& out) {
      out << "# schema=froc-risk/1\n"
          << "# tau_f=" << froc::format_double(table.weights.tau_f)
          << " tau_f_policy=" << table.tau_f_policy
          << " w_f=" << froc::format_double(table.weights.w_f)
          << " w_u=" << froc::format_double(table.weights.w_u)
          << " squash=" << froc::to_string(table.weights.squash) << "\n"
          << "# columns=config_id,mode,n_ref,r_hat,s,r,delta_f,delta_u,r_tilde,r_norm\n";
      for (const froc::TableEntry& e : table.entries) {
        out << e.config.id << ',' << froc::to_string(e.mode) << ',' << e.stats.n_ref << ','
            << froc::format_double(e.stats.r_hat) << ',' << froc::format_double(e.breakdown.s)
            << ',' << froc::format_double(e.breakdown.r) << ','
            << froc::format_double(e.breakdown.delta_f) << ','
            << froc::format_double(e.breakdown.delta_u) << ','
            << froc::format_double(e.breakdown.r_tilde) << ','
            << froc::format_double(e.breakdown.r_norm) << "\n";
      }
    });
  });

  // ---- table-build ----
  auto* build_cmd = app.add_subcommand("table-build", "Build a lookup table from metrics");
  CommonTableFlags build_flags;
  std::optional<std::string> build_out;
  std::optional<std::uint64_t> build_seed;
  unsigned build_jobs = 1;
  build_cmd->add_option("--metrics", build_flags.metrics_path, "froc-metrics/1 file")->required();
  build_cmd->add_option("--per-sample", build_flags.samples_path, "froc-samples/1 file");
  build_cmd->add_option("--weights", build_flags.weights, "penalty weights 'wf,wu' (default 1,1)");
  build_cmd->add_option("--squash", build_flags.squash, "normalization: exp or clip (default exp)");
  build_cmd->add_option("--tau-f", build_flags.tau, "forgetting target: 'median' or a number");
  build_cmd->add_option("--jobs", build_jobs, "parallel workers for entry computation");
  build_cmd->add_option("--seed", build_seed, "seed recorded as table metadata");
  build_cmd->add_option("--out", build_out, "output path (default stdout)");
  build_cmd->callback([&] {
    froc::LookupTable table = build_from_flags(build_flags, build_jobs);
    table.build_seed = build_seed;
    with_output(build_out, [&](std::ostream& out) { froc::write_table(table, out); });
  });

  // ---- query-budget ----
  auto* budget_cmd = app.add_subcommand("query-budget", "Valid configurations for (delta, alpha)");
  std::string budget_table;
  double budget_delta = 0.0, budget_alpha = 0.0;
  std::optional<std::string> budget_out;
  budget_cmd->add_option("--table", budget_table, "froc-table/1 file")->required();
  budget_cmd->add_option("--delta", budget_delta, "family-wise risk budget in (0,1)")->required();
  budget_cmd->add_option("--alpha", budget_alpha, "target risk level in [0,1]")->required();
  budget_cmd->add_option("--out", budget_out, "output path (default stdout)");
  budget_cmd->callback([&] {
    const froc::LookupTable table = load_table(budget_table);
    const froc::BudgetQuery query = froc::query_by_budget(table, budget_delta, budget_alpha);
    with_output(budget_out, [&](std::ostream& out) {
      out << "# schema=froc-validset/1\n"
          << "# alpha=" << froc::format_double(query.set.alpha)
          << " delta=" << froc::format_double(query.set.delta)
          << " per_config_delta=" << froc::format_double(query.set.per_config_delta)
          << " members=" << query.set.members.size() << "\n"
          << "# columns=config_id,alpha_unlearn\n";
      for (const froc::ValidMember& m : query.set.members)
        out << m.config_id << ',' << froc::format_double(m.alpha_unlearn) << "\n";
      out << "recommendation=" << query.recommendation.value_or("none") << "\n";
    });
    if (!query.recommendation) {
      std::cerr << "froc: note: no configuration satisfies alpha="
                << froc::format_double(budget_alpha) << " at delta="
                << froc::format_double(budget_delta) << "\n";
      rc = exit_empty_set;
    }
  });

  // ---- query-config ----
  auto* config_cmd = app.add_subcommand("query-config", "Bound for one configuration at delta");
  std::string qc_table, qc_id;
  double qc_delta = 0.0;
  std::optional<std::string> qc_out;
  config_cmd->add_option("--table", qc_table, "froc-table/1 file")->required();
  config_cmd->add_option("--config", qc_id, "configuration id")->required();
  config_cmd->add_option("--delta", qc_delta, "risk budget in (0,1), undivided")->required();
  config_cmd->add_option("--out", qc_out, "output path (default stdout)");
  config_cmd->callback([&] {
    const froc::LookupTable table = load_table(qc_table);
    const froc::BoundResult b = froc::query_by_config(table, qc_id, qc_delta);
    const froc::TableEntry* entry = table.find(qc_id);
    with_output(qc_out, [&](std::ostream& out) {
      out << "config_id=" << qc_id << "\n"
          << "mode=" << froc::to_string(entry->mode) << "\n";
      print_bound(out, b);
    });
  });

  // ---- simulate-metrics ----
  auto* sim_cmd = app.add_subcommand("simulate-metrics",
                                     "Synthetic metrics for the default 12-configuration grid");
  std::uint64_t sim_seed = 42;
  std::size_t sim_forget = 6000, sim_retain = 6000;
  int sim_model = 0;
  std::optional<std::string> sim_out, sim_samples_out;
  sim_cmd->add_option("--seed", sim_seed, "generator seed (default 42)");
  sim_cmd->add_option("--n-forget", sim_forget, "forget samples per config (default 6000)");
  sim_cmd->add_option("--n-retain", sim_retain, "retain samples per config (default 6000)");
  sim_cmd->add_option("--model", sim_model, "simulated model preset: 0, 1 or 2");
  sim_cmd->add_option("--out", sim_out, "metrics output path (default stdout)");
  sim_cmd->add_option("--per-sample", sim_samples_out, "also write per-sample records here");
  sim_cmd->callback([&] {
    froc::MetricsData data;
    data.configs = froc::default_grid();
    const std::vector<froc::SimProfile> profiles = froc::model_profiles(sim_model);
    data.metrics = froc::generate_metrics(profiles, data.configs, sim_forget, sim_retain, sim_seed);
    with_output(sim_out, [&](std::ostream& out) { froc::write_metrics(data, out); });
    if (sim_samples_out)
      with_output(sim_samples_out, [&](std::ostream& out) { froc::write_samples(data, out); });
  });

  // ---- simulate-coverage ----
  auto* cov_cmd = app.add_subcommand("simulate-coverage",
                                     "Monte Carlo miscoverage of the conformal bound");
  froc::CoverageSpec cov_spec;
  std::string cov_dist = "bernoulli";
  std::optional<std::string> cov_out;
  cov_cmd->add_option("--p-star", cov_spec.p_star, "true mean risk")->required();
  cov_cmd->add_option("--n-ref", cov_spec.n_ref, "reference set size")->required();
  cov_cmd->add_option("--delta", cov_spec.delta, "risk budget in (0,1)")->required();
  cov_cmd->add_option("--trials", cov_spec.trials, "Monte Carlo trials (default 2000, min 100)");
  cov_cmd->add_option("--seed", cov_spec.seed, "generator seed");
  cov_cmd->add_option("--dist", cov_dist, "risk distribution: bernoulli or beta");
  cov_cmd->add_option("--beta-concentration", cov_spec.beta_concentration,
                      "beta mode concentration (default 10)");
  cov_cmd->add_option("--out", cov_out, "output path (default stdout)");
  cov_cmd->callback([&] {
    if (cov_spec.trials < 100)
      throw froc::validation_error("simulate-coverage: reported experiments need --trials >= 100");
    cov_spec.dist = froc::parse_risk_distribution(cov_dist);
    const froc::CoverageResult result = froc::coverage_experiment(cov_spec);
    with_output(cov_out, [&](std::ostream& out) {
      out << "# schema=froc-coverage/1\n"
          << "# p_star=" << froc::format_double(cov_spec.p_star) << " n_ref=" << cov_spec.n_ref
          << " delta=" << froc::format_double(cov_spec.delta) << " trials=" << cov_spec.trials
          << " seed=" << cov_spec.seed << " dist=" << cov_dist << "\n"
          << "# columns=miscoverage_rate,violations,trials,mc_slack_bound\n"
          << froc::format_double(result.miscoverage_rate) << ',' << result.violations << ','
          << result.trials << ','
          << froc::format_double(mc_slack_bound(cov_spec.delta, cov_spec.trials)) << "\n";
    });
  });

  // ---- simulate-fwer ----
  auto* fwer_cmd = app.add_subcommand("simulate-fwer",
                                      "Monte Carlo family-wise error of the valid set");
  froc::FwerSpec fwer_spec;
  fwer_spec.true_risks.clear();
  std::optional<std::string> fwer_out;
  fwer_cmd->add_option("--grid-size", fwer_spec.grid_size, "number of configurations")->required();
  fwer_cmd->add_option("--true-risk", fwer_spec.true_risks,
                       "true risk per config (one value broadcasts)")
      ->required()
      ->expected(-1);
  fwer_cmd->add_option("--alpha", fwer_spec.alpha, "target risk level")->required();
  fwer_cmd->add_option("--delta", fwer_spec.delta, "family-wise budget in (0,1)")->required();
  fwer_cmd->add_option("--n-ref", fwer_spec.n_ref, "reference set size per config")->required();
  fwer_cmd->add_option("--trials", fwer_spec.trials, "Monte Carlo trials (default 2000, min 100)");
  fwer_cmd->add_option("--seed", fwer_spec.seed, "generator seed");
  fwer_cmd->add_option("--out", fwer_out, "output path (default stdout)");
  fwer_cmd->callback([&] {
    if (fwer_spec.trials < 100)
      throw froc::validation_error("simulate-fwer: reported experiments need --trials >= 100");
    const froc::FwerResult result = froc::fwer_experiment(fwer_spec);
    with_output(fwer_out, [&](std::ostream& out) {
      out << "# schema=froc-fwer/1\n"
          << "# grid_size=" << fwer_spec.grid_size << " true_risks=";
      for (std::size_t i = 0; i < fwer_spec.true_risks.size(); ++i)
        out << (i ? ";" : "") << froc::format_double(fwer_spec.true_risks[i]);
      out << " alpha=" << froc::format_double(fwer_spec.alpha)
          << " delta=" << froc::format_double(fwer_spec.delta) << " n_ref=" << fwer_spec.n_ref
          << " trials=" << fwer_spec.trials << " seed=" << fwer_spec.seed << "\n"
          << "# columns=family_error_rate,errors,trials,mc_slack_bound\n"
          << froc::format_double(result.family_error_rate) << ',' << result.errors << ','
          << result.trials << ','
          << froc::format_double(mc_slack_bound(fwer_spec.delta, fwer_spec.trials)) << "\n";
    });
  });

  // ---- report ----
  auto* report_cmd = app.add_subcommand("report", "Plot-ready series from a lookup table");
  std::string report_table, report_kind;
  froc::ReportParams report_params;
  std::string report_nlist = "50,100,200,400";
  std::optional<std::string> report_config, report_out;
  report_cmd->add_option("--table", report_table, "froc-table/1 file")->required();
  report_cmd
      ->add_option("--kind", report_kind,
                   "risk_vs_config, nref_sweep, method_heatmap or surface")
      ->required();
  report_cmd->add_option("--delta", report_params.delta, "risk budget (default 0.1)");
  report_cmd->add_option("--n-list", report_nlist, "N_ref sweep values (default 50,100,200,400)");
  report_cmd->add_option("--config", report_config, "anchor config for nref_sweep");
  report_cmd->add_option("--out", report_out, "output path (default stdout)");
  report_cmd->callback([&] {
    const froc::LookupTable table = load_table(report_table);
    report_params.n_values = parse_n_list(report_nlist);
    report_params.config_id = report_config;
    const froc::ReportKind kind = froc::parse_report_kind(report_kind);
    with_output(report_out,
                [&](std::ostream& out) { froc::emit_report_series(table, kind, report_params, out); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "froc: usage: " << e.what() << "\n";
    return exit_usage;
  } catch (const froc::io_error& e) {
    std::cerr << "froc: io: " << e.what() << "\n";
    return exit_io;
  } catch (const froc::error& e) {
    std::cerr << "froc: " << category_of(e) << ": " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "froc: internal: " << e.what() << "\n";
    return exit_usage;
  }
  return rc;
}
