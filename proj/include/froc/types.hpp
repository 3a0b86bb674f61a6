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

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "froc/errors.hpp"

namespace froc {

/// Losses below this are clamped before a log is taken.
inline constexpr double loss_epsilon = 1e-12;

/// Tolerance for "aggregate equals per-sample mean" consistency checks.
inline constexpr double aggregate_consistency_tol = 1e-9;

enum class MethodKind { GA, GA_DESCENT, GA_KL, OTHER };

/// Unlearning method tag. OTHER carries a free-form name so grids can mix
/// built-in and custom methods.
struct Method {
  MethodKind kind = MethodKind::GA;
  std::string name;  // set only when kind == OTHER

  static Method ga() { return {MethodKind::GA, {}}; }
  static Method ga_descent() { return {MethodKind::GA_DESCENT, {}}; }
  static Method ga_kl() { return {MethodKind::GA_KL, {}}; }
  static Method other(std::string custom) { return {MethodKind::OTHER, std::move(custom)}; }

  friend bool operator==(const Method&, const Method&) = default;
};

inline std::string to_string(const Method& m) {
  switch (m.kind) {
    case MethodKind::GA: return "GA";
    case MethodKind::GA_DESCENT: return "GA_DESCENT";
    case MethodKind::GA_KL: return "GA_KL";
    case MethodKind::OTHER: return m.name;
  }
  throw domain_error("method: unknown kind");
}

/// Identifier charset shared by config ids, sample ids, extras names and
/// method names; keeps every token safe inside the comma/equals separated
/// file formats.
inline bool valid_token(std::string_view s) {
  if (s.empty()) return false;
  for (const char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.' ||
                    c == '/' || c == ':' || c == '+';
    if (!ok) return false;
  }
  return true;
}

inline Method parse_method(std::string_view token) {
  if (token == "GA") return Method::ga();
  if (token == "GA_DESCENT") return Method::ga_descent();
  if (token == "GA_KL") return Method::ga_kl();
  if (!valid_token(token)) throw validation_error("method: invalid token '" + std::string(token) + "'");
  return Method::other(std::string(token));
}

/// One candidate unlearning configuration in the grid.
struct UnlearningConfig {
  std::string id;
  Method method;
  double learning_rate = 0.0;
  long long ascent_steps = 1;
  std::vector<std::pair<std::string, double>> extras;  // method-specific knobs, ordered

  friend bool operator==(const UnlearningConfig&, const UnlearningConfig&) = default;
};

inline void validate(const UnlearningConfig& c) {
  if (!valid_token(c.id)) throw validation_error("config: invalid or empty id '" + c.id + "'");
  if (c.method.kind == MethodKind::OTHER &&
      (!valid_token(c.method.name) || c.method.name == "GA" || c.method.name == "GA_DESCENT" ||
       c.method.name == "GA_KL"))
    throw validation_error("config '" + c.id + "': invalid method name");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate))
    throw validation_error("config '" + c.id + "': learning_rate must be positive");
  if (c.ascent_steps < 1) throw validation_error("config '" + c.id + "': ascent_steps must be >= 1");
  for (const auto& [name, value] : c.extras) {
    if (!valid_token(name)) throw validation_error("config '" + c.id + "': invalid extra name");
    if (!std::isfinite(value)) throw validation_error("config '" + c.id + "': extra '" + name + "' not finite");
  }
}

enum class Split { FORGET, RETAIN };

inline std::string to_string(Split s) { return s == Split::FORGET ? "FORGET" : "RETAIN"; }

inline Split parse_split(std::string_view token) {
  if (token == "FORGET") return Split::FORGET;
  if (token == "RETAIN") return Split::RETAIN;
  throw validation_error("split: expected FORGET or RETAIN, got '" + std::string(token) + "'");
}

/// Per-sample evaluation record: loss plus a 0/1 correctness indicator.
struct SampleRecord {
  std::string sample_id;
  Split split = Split::FORGET;
  double loss = 0.0;
  int correct = 0;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

inline void validate(const SampleRecord& s) {
  if (!valid_token(s.sample_id)) throw validation_error("sample: invalid or empty sample_id");
  if (!(s.loss > 0.0) || !std::isfinite(s.loss))
    throw validation_error("sample '" + s.sample_id + "': loss must be positive");
  if (s.correct != 0 && s.correct != 1)
    throw validation_error("sample '" + s.sample_id + "': correct must be 0 or 1");
}

/// Forget/retain evaluation of one configuration. Aggregate fields are the
/// means over the respective split; per_sample, when present, must reproduce
/// them within aggregate_consistency_tol.
struct ConfigMetrics {
  std::string config_id;
  double forget_loss = 0.0;
  double forget_acc = 0.0;
  double retain_loss = 0.0;
  double retain_acc = 0.0;
  std::vector<SampleRecord> per_sample;

  bool has_samples() const { return !per_sample.empty(); }

  friend bool operator==(const ConfigMetrics&, const ConfigMetrics&) = default;
};

inline void validate(const ConfigMetrics& m) {
  if (!valid_token(m.config_id)) throw validation_error("metrics: invalid or empty config_id");
  const auto check_loss = [&](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw validation_error("metrics '" + m.config_id + "': " + field + " must be positive");
  };
  const auto check_acc = [&](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0))
      throw validation_error("metrics '" + m.config_id + "': " + field + " must be in [0,1]");
  };
  check_loss(m.forget_loss, "forget_loss");
  check_loss(m.retain_loss, "retain_loss");
  check_acc(m.forget_acc, "forget_acc");
  check_acc(m.retain_acc, "retain_acc");
  if (m.per_sample.empty()) return;

  double loss_sum[2] = {0.0, 0.0};
  double acc_sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (const SampleRecord& s : m.per_sample) {
    validate(s);
    const int i = s.split == Split::FORGET ? 0 : 1;
    loss_sum[i] += s.loss;
    acc_sum[i] += s.correct;
    ++count[i];
  }
  if (count[0] == 0 || count[1] == 0)
    throw validation_error("metrics '" + m.config_id + "': per-sample records must cover both splits");
  const auto check_mean = [&](double sum, std::size_t n, double aggregate, const char* field) {
    if (std::fabs(sum / static_cast<double>(n) - aggregate) > aggregate_consistency_tol)
      throw validation_error("metrics '" + m.config_id + "': " + field +
                             " does not match the per-sample mean");
  };
  check_mean(loss_sum[0], count[0], m.forget_loss, "forget_loss");
  check_mean(acc_sum[0], count[0], m.forget_acc, "forget_acc");
  check_mean(loss_sum[1], count[1], m.retain_loss, "retain_loss");
  check_mean(acc_sum[1], count[1], m.retain_acc, "retain_acc");
}

/// Grid-level extrema entering the shift and distortion scores. Built once
/// per candidate grid; every configuration is compared against these.
struct GridContext {
  double max_forget_acc = 0.0;
  double min_retain_loss = 0.0;
  double max_retain_acc = 0.0;
  std::size_t grid_size = 0;

  friend bool operator==(const GridContext&, const GridContext&) = default;
};

enum class Squash { EXP_COMPLEMENT, CLIP };

inline std::string to_string(Squash s) { return s == Squash::EXP_COMPLEMENT ? "exp" : "clip"; }

inline Squash parse_squash(std::string_view token) {
  if (token == "exp") return Squash::EXP_COMPLEMENT;
  if (token == "clip") return Squash::CLIP;
  throw validation_error("squash: expected exp or clip, got '" + std::string(token) + "'");
}

/// Weights of the two penalty terms plus the forgetting target tau_f that
/// the forgetting-shift score is measured against.
struct RiskWeights {
  double w_f = 1.0;
  double w_u = 1.0;
  double tau_f = 0.0;
  Squash squash = Squash::EXP_COMPLEMENT;

  friend bool operator==(const RiskWeights&, const RiskWeights&) = default;
};

inline void validate(const RiskWeights& w) {
  if (!(w.w_f >= 0.0) || !std::isfinite(w.w_f)) throw validation_error("weights: w_f must be >= 0");
  if (!(w.w_u >= 0.0) || !std::isfinite(w.w_u)) throw validation_error("weights: w_u must be >= 0");
  if (w.w_f == 0.0 && w.w_u == 0.0) throw validation_error("weights: w_f and w_u must not both be zero");
  if (!std::isfinite(w.tau_f)) throw validation_error("weights: tau_f must be finite");
}

/// Full decomposition of one configuration's unified risk.
struct RiskBreakdown {
  std::string config_id;
  double s = 0.0;        // forgetting shift
  double r = 0.0;        // retain distortion
  double delta_f = 0.0;  // softplus(tau_f - s)
  double delta_u = 0.0;  // softplus(r)
  double r_tilde = 0.0;  // w_f*delta_f + w_u*delta_u
  double r_norm = 0.0;   // squashed into [0,1]

  friend bool operator==(const RiskBreakdown&, const RiskBreakdown&) = default;
};

}  // namespace froc
