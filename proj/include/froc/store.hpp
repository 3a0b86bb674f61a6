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
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "froc/controller.hpp"
#include "froc/types.hpp"

namespace froc {

inline constexpr std::string_view metrics_schema = "froc-metrics/1";
inline constexpr std::string_view samples_schema = "froc-samples/1";
inline constexpr std::string_view table_schema = "froc-table/1";
inline constexpr std::string_view report_schema = "froc-report/1";

inline constexpr std::string_view metrics_columns =
    "config_id,method,learning_rate,ascent_steps,forget_loss,forget_acc,retain_loss,retain_acc";
inline constexpr std::string_view samples_columns = "config_id,sample_id,split,loss,correct";

/// Shortest decimal that round-trips the exact binary64 value. Every real
/// written by this module goes through here, which is what makes equal
/// tables serialize to identical bytes.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string location(std::size_t line, std::string_view field) {
  return "line " + std::to_string(line) + ", field '" + std::string(field) + "'";
}

inline double parse_double_field(std::string_view token, std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v))
    throw validation_error("parse: not a finite number at " + location(line, field));
  return v;
}

inline long long parse_int_field(std::string_view token, std::string_view field, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw validation_error("parse: not an integer at " + location(line, field));
  return v;
}

inline std::uint64_t parse_uint_field(std::string_view token, std::string_view field,
                                      std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw validation_error("parse: not an unsigned integer at " + location(line, field));
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Line reader that keeps count and rejects carriage returns (the formats are
// strict single-newline text).
class line_reader {
public:
  explicit line_reader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) {
      if (in_.bad()) throw io_error("parse: stream failure at line " + std::to_string(line_no_ + 1));
      return false;
    }
    ++line_no_;
    if (line.find('\r') != std::string::npos)
      throw validation_error("parse: carriage return at line " + std::to_string(line_no_));
    return true;
  }

  std::string expect(std::string_view what) {
    std::string line;
    if (!next(line))
      throw validation_error("parse: unexpected end of input, expected " + std::string(what));
    return line;
  }

  std::size_t line_no() const { return line_no_; }

private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

inline void expect_schema(line_reader& reader, std::string_view schema) {
  const std::string line = reader.expect("schema header");
  if (!line.starts_with("schema="))
    throw validation_error("parse: missing schema header at line 1");
  const std::string_view found = std::string_view(line).substr(7);
  if (found != schema)
    throw validation_error("parse: unsupported schema version '" + std::string(found) +
                           "', expected '" + std::string(schema) + "'");
}

inline std::string expect_key(line_reader& reader, std::string_view key) {
  const std::string line = reader.expect(std::string(key) + "=");
  const std::string prefix = std::string(key) + "=";
  if (!line.starts_with(prefix))
    throw validation_error("parse: expected '" + prefix + "...' at line " +
                           std::to_string(reader.line_no()));
  return line.substr(prefix.size());
}

inline void check_sink(std::ostream& out, std::size_t bytes) {
  if (!out)
    throw io_error("write: sink failure after " + std::to_string(bytes) +
                   " bytes (partial write possible)");
}

}  // namespace detail

/// Parsed metrics file: the candidate grid and one metrics record per
/// configuration, in file order, plus non-fatal warnings (epsilon clamps).
struct MetricsData {
  std::vector<UnlearningConfig> configs;
  std::vector<ConfigMetrics> metrics;
  std::vector<std::string> warnings;
};

/// Parse a froc-metrics/1 stream. Malformed rows fail with line number and
/// field name; losses in (0, epsilon) are clamped and reported as warnings
/// rather than mutated silently.
inline MetricsData parse_metrics(std::istream& in) {
  detail::line_reader reader(in);
  detail::expect_schema(reader, metrics_schema);
  const std::string header = reader.expect("column header");
  if (header != metrics_columns)
    throw validation_error("parse: bad metrics column header at line 2");

  MetricsData data;
  std::string line;
  std::unordered_map<std::string, int> seen;
  while (reader.next(line)) {
    const std::size_t line_no = reader.line_no();
    if (line.empty()) throw validation_error("parse: blank line " + std::to_string(line_no));
    const auto cols = detail::split(line, ',');
    if (cols.size() != 8)
      throw validation_error("parse: expected 8 columns at line " + std::to_string(line_no) +
                             ", got " + std::to_string(cols.size()));

    UnlearningConfig config;
    config.id = std::string(cols[0]);
    config.method = parse_method(cols[1]);
    config.learning_rate = detail::parse_double_field(cols[2], "learning_rate", line_no);
    config.ascent_steps = detail::parse_int_field(cols[3], "ascent_steps", line_no);

    ConfigMetrics m;
    m.config_id = config.id;
    m.forget_loss = detail::parse_double_field(cols[4], "forget_loss", line_no);
    m.forget_acc = detail::parse_double_field(cols[5], "forget_acc", line_no);
    m.retain_loss = detail::parse_double_field(cols[6], "retain_loss", line_no);
    m.retain_acc = detail::parse_double_field(cols[7], "retain_acc", line_no);

    const auto clamp_loss = [&](double& v, const char* field) {
      if (v > 0.0 && v < loss_epsilon) {
        data.warnings.push_back("line " + std::to_string(line_no) + ": " + field +
                                " clamped to " + format_double(loss_epsilon));
        v = loss_epsilon;
      }
    };
    clamp_loss(m.forget_loss, "forget_loss");
    clamp_loss(m.retain_loss, "retain_loss");

    try {
      validate(config);
      validate(m);
    } catch (const validation_error& e) {
      throw validation_error("parse: line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.emplace(config.id, 0).second)
      throw validation_error("parse: duplicate config_id '" + config.id + "' at line " +
                             std::to_string(line_no));
    data.configs.push_back(std::move(config));
    data.metrics.push_back(std::move(m));
  }
  if (data.configs.empty()) throw config_error("parse: metrics file has no data rows");
  return data;
}

/// Canonical inverse of parse_metrics; returns the byte count.
inline std::size_t write_metrics(const MetricsData& data, std::ostream& out) {
  std::string buf;
  buf.append("schema=").append(metrics_schema).push_back('\n');
  buf.append(metrics_columns).push_back('\n');
  for (std::size_t i = 0; i < data.configs.size(); ++i) {
    const UnlearningConfig& c = data.configs[i];
    const ConfigMetrics& m = data.metrics[i];
    buf.append(c.id).push_back(',');
    buf.append(to_string(c.method)).push_back(',');
    buf.append(format_double(c.learning_rate)).push_back(',');
    buf.append(std::to_string(c.ascent_steps)).push_back(',');
    buf.append(format_double(m.forget_loss)).push_back(',');
    buf.append(format_double(m.forget_acc)).push_back(',');
    buf.append(format_double(m.retain_loss)).push_back(',');
    buf.append(format_double(m.retain_acc)).push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  detail::check_sink(out, buf.size());
  return buf.size();
}

/// Parse a froc-samples/1 stream and attach the records to the matching
/// configurations. Unknown config ids and aggregate/sample mean mismatches
/// are validation errors.
inline void attach_samples(MetricsData& data, std::istream& in) {
  detail::line_reader reader(in);
  detail::expect_schema(reader, samples_schema);
  const std::string header = reader.expect("column header");
  if (header != samples_columns)
    throw validation_error("parse: bad sample column header at line 2");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < data.metrics.size(); ++i) index.emplace(data.metrics[i].config_id, i);

  std::string line;
  std::size_t rows = 0;
  while (reader.next(line)) {
    const std::size_t line_no = reader.line_no();
    if (line.empty()) throw validation_error("parse: blank line " + std::to_string(line_no));
    const auto cols = detail::split(line, ',');
    if (cols.size() != 5)
      throw validation_error("parse: expected 5 columns at line " + std::to_string(line_no) +
                             ", got " + std::to_string(cols.size()));
    const auto it = index.find(std::string(cols[0]));
    if (it == index.end())
      throw validation_error("parse: sample for unknown config '" + std::string(cols[0]) +
                             "' at line " + std::to_string(line_no));
    SampleRecord rec;
    rec.sample_id = std::string(cols[1]);
    rec.split = parse_split(cols[2]);
    rec.loss = detail::parse_double_field(cols[3], "loss", line_no);
    const long long correct = detail::parse_int_field(cols[4], "correct", line_no);
    if (correct != 0 && correct != 1)
      throw validation_error("parse: correct must be 0 or 1 at line " + std::to_string(line_no));
    rec.correct = static_cast<int>(correct);
    if (rec.loss > 0.0 && rec.loss < loss_epsilon) {
      data.warnings.push_back("line " + std::to_string(line_no) + ": sample loss clamped to " +
                              format_double(loss_epsilon));
      rec.loss = loss_epsilon;
    }
    try {
      validate(rec);
    } catch (const validation_error& e) {
      throw validation_error("parse: line " + std::to_string(line_no) + ": " + e.what());
    }
    data.metrics[it->second].per_sample.push_back(std::move(rec));
    ++rows;
  }
  if (rows == 0) throw config_error("parse: sample file has no data rows");
  for (const ConfigMetrics& m : data.metrics) {
    if (!m.has_samples()) continue;
    validate(m);  // aggregate fields must reproduce the per-sample means
  }
}

/// Canonical per-sample emission for every configuration that carries
/// records; returns the byte count.
inline std::size_t write_samples(const MetricsData& data, std::ostream& out) {
  std::string buf;
  buf.append("schema=").append(samples_schema).push_back('\n');
  buf.append(samples_columns).push_back('\n');
  for (const ConfigMetrics& m : data.metrics) {
    for (const SampleRecord& rec : m.per_sample) {
      buf.append(m.config_id).push_back(',');
      buf.append(rec.sample_id).push_back(',');
      buf.append(to_string(rec.split)).push_back(',');
      buf.append(format_double(rec.loss)).push_back(',');
      buf.append(rec.correct != 0 ? "1" : "0").push_back('\n');
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  detail::check_sink(out, buf.size());
  return buf.size();
}

namespace detail {

inline std::string format_extras(const std::vector<std::pair<std::string, double>>& extras) {
  if (extras.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    if (i > 0) out.push_back(';');
    out.append(extras[i].first).push_back('=');
    out.append(format_double(extras[i].second));
  }
  return out;
}

inline std::vector<std::pair<std::string, double>> parse_extras(std::string_view token,
                                                                std::size_t line) {
  std::vector<std::pair<std::string, double>> extras;
  if (token == "-") return extras;
  for (const std::string_view item : split(token, ';')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw validation_error("parse: malformed extras at " + location(line, "extras"));
    extras.emplace_back(std::string(item.substr(0, eq)),
                        parse_double_field(item.substr(eq + 1), "extras", line));
  }
  return extras;
}

}  // namespace detail

/// Serialize a lookup table canonically: fixed metadata order, entries
/// sorted by id, shortest round-tripping decimals, every line
/// newline-terminated. Equal tables produce identical bytes. Returns the
/// byte count.
inline std::size_t write_table(const LookupTable& table, std::ostream& out) {
  if (table.format_version != table_format_version)
    throw validation_error("write_table: unsupported format_version " +
                           std::to_string(table.format_version));
  std::string buf;
  buf.append("schema=").append(table_schema).push_back('\n');
  buf.append("w_f=").append(format_double(table.weights.w_f)).push_back('\n');
  buf.append("w_u=").append(format_double(table.weights.w_u)).push_back('\n');
  buf.append("tau_f=").append(format_double(table.weights.tau_f)).push_back('\n');
  buf.append("tau_f_policy=").append(table.tau_f_policy).push_back('\n');
  buf.append("squash=").append(to_string(table.weights.squash)).push_back('\n');
  if (table.build_seed)
    buf.append("build_seed=").append(std::to_string(*table.build_seed)).push_back('\n');
  buf.append("entries=").append(std::to_string(table.entries.size())).push_back('\n');
  for (const TableEntry& e : table.entries) {
    buf.append(e.config.id).push_back(',');
    buf.append(to_string(e.config.method)).push_back(',');
    buf.append(format_double(e.config.learning_rate)).push_back(',');
    buf.append(std::to_string(e.config.ascent_steps)).push_back(',');
    buf.append(detail::format_extras(e.config.extras)).push_back(',');
    buf.append(to_string(e.mode)).push_back(',');
    buf.append(std::to_string(e.stats.n_ref)).push_back(',');
    buf.append(format_double(e.stats.r_hat)).push_back(',');
    buf.append(format_double(e.breakdown.s)).push_back(',');
    buf.append(format_double(e.breakdown.r)).push_back(',');
    buf.append(format_double(e.breakdown.delta_f)).push_back(',');
    buf.append(format_double(e.breakdown.delta_u)).push_back(',');
    buf.append(format_double(e.breakdown.r_tilde)).push_back(',');
    buf.append(format_double(e.breakdown.r_norm)).push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  detail::check_sink(out, buf.size());
  return buf.size();
}

/// Parse a froc-table/1 stream back into a LookupTable, validating every
/// invariant (strictly ascending unique ids, ranges, entry count).
inline LookupTable read_table(std::istream& in) {
  detail::line_reader reader(in);
  detail::expect_schema(reader, table_schema);
  LookupTable table;
  table.format_version = table_format_version;
  const auto metadata_double = [&](std::string_view key) {
    const std::string value = detail::expect_key(reader, key);
    return detail::parse_double_field(value, key, reader.line_no());
  };
  table.weights.w_f = metadata_double("w_f");
  table.weights.w_u = metadata_double("w_u");
  table.weights.tau_f = metadata_double("tau_f");
  table.tau_f_policy = detail::expect_key(reader, "tau_f_policy");
  if (table.tau_f_policy != "median" && table.tau_f_policy != "fixed")
    throw validation_error("parse: unknown tau_f_policy '" + table.tau_f_policy + "'");
  table.weights.squash = parse_squash(detail::expect_key(reader, "squash"));
  validate(table.weights);

  std::string line = reader.expect("build_seed= or entries=");
  if (line.starts_with("build_seed=")) {
    table.build_seed =
        detail::parse_uint_field(std::string_view(line).substr(11), "build_seed", reader.line_no());
    line = reader.expect("entries=");
  }
  if (!line.starts_with("entries="))
    throw validation_error("parse: expected 'entries=...' at line " +
                           std::to_string(reader.line_no()));
  const long long count =
      detail::parse_int_field(std::string_view(line).substr(8), "entries", reader.line_no());
  if (count < 1) throw validation_error("parse: table must have at least one entry");

  table.entries.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    const std::string row = reader.expect("table entry");
    const std::size_t line_no = reader.line_no();
    const auto cols = detail::split(row, ',');
    if (cols.size() != 14)
      throw validation_error("parse: expected 14 columns at line " + std::to_string(line_no) +
                             ", got " + std::to_string(cols.size()));
    TableEntry e;
    e.config.id = std::string(cols[0]);
    e.config.method = parse_method(cols[1]);
    e.config.learning_rate = detail::parse_double_field(cols[2], "learning_rate", line_no);
    e.config.ascent_steps = detail::parse_int_field(cols[3], "ascent_steps", line_no);
    e.config.extras = detail::parse_extras(cols[4], line_no);
    e.mode = parse_risk_mode(cols[5]);
    e.stats.n_ref = detail::parse_int_field(cols[6], "n_ref", line_no);
    e.stats.r_hat = detail::parse_double_field(cols[7], "r_hat", line_no);
    e.breakdown.config_id = e.config.id;
    e.breakdown.s = detail::parse_double_field(cols[8], "s", line_no);
    e.breakdown.r = detail::parse_double_field(cols[9], "r", line_no);
    e.breakdown.delta_f = detail::parse_double_field(cols[10], "delta_f", line_no);
    e.breakdown.delta_u = detail::parse_double_field(cols[11], "delta_u", line_no);
    e.breakdown.r_tilde = detail::parse_double_field(cols[12], "r_tilde", line_no);
    e.breakdown.r_norm = detail::parse_double_field(cols[13], "r_norm", line_no);
    try {
      validate(e.config);
      validate(e.stats);
    } catch (const error& err) {
      throw validation_error("parse: line " + std::to_string(line_no) + ": " + err.what());
    }
    if (!(e.breakdown.r_norm >= 0.0 && e.breakdown.r_norm <= 1.0))
      throw validation_error("parse: r_norm outside [0,1] at line " + std::to_string(line_no));
    if (!(e.breakdown.delta_f > 0.0) || !(e.breakdown.delta_u > 0.0))
      throw validation_error("parse: nonpositive penalty at line " + std::to_string(line_no));
    if (!table.entries.empty() && !(table.entries.back().config.id < e.config.id))
      throw validation_error("parse: entry ids not strictly ascending at line " +
                             std::to_string(line_no));
    table.entries.push_back(std::move(e));
  }
  std::string trailing;
  if (reader.next(trailing))
    throw validation_error("parse: trailing content at line " + std::to_string(reader.line_no()));
  return table;
}

enum class ReportKind { RISK_VS_CONFIG, NREF_SWEEP, METHOD_HEATMAP, SURFACE };

inline std::string to_string(ReportKind k) {
  switch (k) {
    case ReportKind::RISK_VS_CONFIG: return "risk_vs_config";
    case ReportKind::NREF_SWEEP: return "nref_sweep";
    case ReportKind::METHOD_HEATMAP: return "method_heatmap";
    case ReportKind::SURFACE: return "surface";
  }
  throw usage_error("report: unknown kind");
}

inline ReportKind parse_report_kind(std::string_view token) {
  if (token == "risk_vs_config") return ReportKind::RISK_VS_CONFIG;
  if (token == "nref_sweep") return ReportKind::NREF_SWEEP;
  if (token == "method_heatmap") return ReportKind::METHOD_HEATMAP;
  if (token == "surface") return ReportKind::SURFACE;
  throw usage_error("report: unknown kind '" + std::string(token) +
                    "' (expected risk_vs_config, nref_sweep, method_heatmap or surface)");
}

struct ReportParams {
  double delta = 0.1;
  std::vector<long long> n_values = {50, 100, 200, 400};
  std::optional<std::string> config_id;  // NREF_SWEEP anchor; defaults to the first entry
};

namespace detail {

// Model/group axis for heatmap-style reports: the id prefix before the
// first '/', or "default" when there is none.
inline std::string group_of(std::string_view id) {
  const std::size_t pos = id.find('/');
  if (pos == std::string_view::npos) return "default";
  return std::string(id.substr(0, pos));
}

}  // namespace detail

/// Emit one plot-ready series recomputed exactly from the table's sufficient
/// statistics. Output is comma-delimited with '#'-prefixed header lines.
inline void emit_report_series(const LookupTable& table, ReportKind kind,
                               const ReportParams& params, std::ostream& out) {
  if (table.entries.empty()) throw config_error("report: table has no entries");
  validate(RiskBudget{params.delta});

  std::string buf;
  buf.append("# schema=").append(report_schema).push_back('\n');
  buf.append("# kind=").append(to_string(kind)).push_back('\n');
  buf.append("# delta=").append(format_double(params.delta)).push_back('\n');
  buf.append("# weights=")
      .append(format_double(table.weights.w_f))
      .push_back(',');
  buf.append(format_double(table.weights.w_u));
  buf.append(" tau_f=").append(format_double(table.weights.tau_f));
  buf.append(" squash=").append(to_string(table.weights.squash)).push_back('\n');

  const RiskBudget budget{params.delta};
  switch (kind) {
    case ReportKind::RISK_VS_CONFIG: {
      buf.append("# columns=config_id,method,learning_rate,ascent_steps,mode,n_ref,r_hat,s,r,"
                 "r_tilde,r_norm,alpha_unlearn\n");
      for (const TableEntry& e : table.entries) {
        const BoundResult b = conformal_unlearning_risk(budget, e.stats);
        buf.append(e.config.id).push_back(',');
        buf.append(to_string(e.config.method)).push_back(',');
        buf.append(format_double(e.config.learning_rate)).push_back(',');
        buf.append(std::to_string(e.config.ascent_steps)).push_back(',');
        buf.append(to_string(e.mode)).push_back(',');
        buf.append(std::to_string(e.stats.n_ref)).push_back(',');
        buf.append(format_double(e.stats.r_hat)).push_back(',');
        buf.append(format_double(e.breakdown.s)).push_back(',');
        buf.append(format_double(e.breakdown.r)).push_back(',');
        buf.append(format_double(e.breakdown.r_tilde)).push_back(',');
        buf.append(format_double(e.breakdown.r_norm)).push_back(',');
        buf.append(format_double(b.alpha_unlearn)).push_back('\n');
      }
      break;
    }
    case ReportKind::NREF_SWEEP: {
      const TableEntry* anchor = params.config_id ? table.find(*params.config_id) : &table.entries.front();
      if (anchor == nullptr)
        throw not_found_error("report: unknown config id '" + *params.config_id + "'");
      if (params.n_values.empty()) throw usage_error("report: nref_sweep needs n values");
      std::vector<long long> ns = params.n_values;
      std::sort(ns.begin(), ns.end());
      buf.append("# anchor=").append(anchor->config.id);
      buf.append(" r_hat=").append(format_double(anchor->stats.r_hat));
      buf.append(" mode=").append(to_string(anchor->mode)).push_back('\n');
      buf.append("# columns=n_ref,alpha_hoeffding,alpha_bentkus,alpha_unlearn\n");
      for (const long long n : ns) {
        if (n < 1) throw usage_error("report: n_ref values must be >= 1");
        const BoundResult b = conformal_unlearning_risk(budget, {n, anchor->stats.r_hat});
        buf.append(std::to_string(n)).push_back(',');
        buf.append(format_double(b.alpha_hoeffding)).push_back(',');
        buf.append(format_double(b.alpha_bentkus)).push_back(',');
        buf.append(format_double(b.alpha_unlearn)).push_back('\n');
      }
      break;
    }
    case ReportKind::METHOD_HEATMAP: {
      buf.append("# columns=group,method,config_id,r_norm,r_hat,alpha_unlearn\n");
      std::vector<const TableEntry*> order;
      order.reserve(table.entries.size());
      for (const TableEntry& e : table.entries) order.push_back(&e);
      std::sort(order.begin(), order.end(), [](const TableEntry* a, const TableEntry* b) {
        const std::string ga = detail::group_of(a->config.id);
        const std::string gb = detail::group_of(b->config.id);
        if (ga != gb) return ga < gb;
        const std::string ma = to_string(a->config.method);
        const std::string mb = to_string(b->config.method);
        if (ma != mb) return ma < mb;
        return a->config.id < b->config.id;
      });
      for (const TableEntry* e : order) {
        const BoundResult b = conformal_unlearning_risk(budget, e->stats);
        buf.append(detail::group_of(e->config.id)).push_back(',');
        buf.append(to_string(e->config.method)).push_back(',');
        buf.append(e->config.id).push_back(',');
        buf.append(format_double(e->breakdown.r_norm)).push_back(',');
        buf.append(format_double(e->stats.r_hat)).push_back(',');
        buf.append(format_double(b.alpha_unlearn)).push_back('\n');
      }
      break;
    }
    case ReportKind::SURFACE: {
      if (params.n_values.empty()) throw usage_error("report: surface needs n values");
      std::vector<long long> ns = params.n_values;
      std::sort(ns.begin(), ns.end());
      buf.append("# columns=config_id,aggressiveness,n_ref,alpha_unlearn\n");
      std::vector<const TableEntry*> order;
      order.reserve(table.entries.size());
      for (const TableEntry& e : table.entries) order.push_back(&e);
      const auto aggr = [](const TableEntry* e) {
        return e->config.learning_rate * static_cast<double>(e->config.ascent_steps);
      };
      std::sort(order.begin(), order.end(), [&](const TableEntry* a, const TableEntry* b) {
        if (aggr(a) != aggr(b)) return aggr(a) < aggr(b);
        return a->config.id < b->config.id;
      });
      for (const TableEntry* e : order) {
        for (const long long n : ns) {
          if (n < 1) throw usage_error("report: n_ref values must be >= 1");
          const BoundResult b = conformal_unlearning_risk(budget, {n, e->stats.r_hat});
          buf.append(e->config.id).push_back(',');
          buf.append(format_double(aggr(e))).push_back(',');
          buf.append(std::to_string(n)).push_back(',');
          buf.append(format_double(b.alpha_unlearn)).push_back('\n');
        }
      }
      break;
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  detail::check_sink(out, buf.size());
}

}  // namespace froc
