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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "froc/conformal.hpp"
#include "froc/controller.hpp"
#include "froc/types.hpp"

namespace froc {

/// SplitMix64 (Steele/Lea/Flood constants). All simulator randomness flows
/// through this generator so fixtures reproduce bit-identically across
/// platforms; never the platform default engine.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

private:
  std::uint64_t state_;
};

/// Derive an independent stream for (seed, salt); trials and configurations
/// get their own streams so parallel schedules cannot change results.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 g(seed ^ (salt * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
  return g.next();
}

/// FNV-1a 64-bit hash for id-keyed substreams.
inline std::uint64_t hash_id(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

/// value(a) = base * exp(sign * rate * a) where a is the configuration's
/// aggressiveness; losses grow (sign +1), accuracies decay (sign -1).
struct ResponseCurve {
  double base = 1.0;
  double rate = 0.0;
};

/// Method-shaped response profile: loss curves grow log-linearly with
/// aggressiveness, accuracy curves decay exponentially, forget-side faster
/// than retain-side. The per-sample noise is log-normal on losses and
/// Bernoulli on correctness.
struct SimProfile {
  Method method;
  ResponseCurve forget_loss_curve;
  ResponseCurve forget_acc_curve;
  ResponseCurve retain_loss_curve;
  ResponseCurve retain_acc_curve;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
};

inline void validate(const SimProfile& p) {
  const auto positive = [&](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw validation_error(std::string("profile: ") + what + " must be positive");
  };
  const auto nonneg = [&](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw validation_error(std::string("profile: ") + what + " must be >= 0");
  };
  positive(p.forget_loss_curve.base, "forget loss base");
  positive(p.retain_loss_curve.base, "retain loss base");
  nonneg(p.forget_loss_curve.rate, "forget loss rate");
  nonneg(p.retain_loss_curve.rate, "retain loss rate");
  if (!(p.forget_acc_curve.base >= 0.0 && p.forget_acc_curve.base <= 1.0))
    throw validation_error("profile: forget acc base must be in [0,1]");
  if (!(p.retain_acc_curve.base >= 0.0 && p.retain_acc_curve.base <= 1.0))
    throw validation_error("profile: retain acc base must be in [0,1]");
  nonneg(p.forget_acc_curve.rate, "forget acc rate");
  nonneg(p.retain_acc_curve.rate, "retain acc rate");
  nonneg(p.noise_sigma, "noise sigma");
}

/// The learning rate the aggressiveness scale is normalized to.
inline constexpr double reference_learning_rate = 2e-5;

/// Unlearning aggressiveness: ascent steps scaled by the relative learning
/// rate. Drives every response curve.
inline double aggressiveness(const UnlearningConfig& c) {
  return static_cast<double>(c.ascent_steps) * (c.learning_rate / reference_learning_rate);
}

namespace detail {

inline double curve_up(const ResponseCurve& c, double a) { return c.base * std::exp(c.rate * a); }

inline double curve_down(const ResponseCurve& c, double a) {
  return std::clamp(c.base * std::exp(-c.rate * a), 0.0, 1.0);
}

inline SimProfile make_profile(Method method, double fl_base, double fl_rate, double fa_rate,
                               double rl_base, double rl_rate, double ra_base, double ra_rate) {
  SimProfile p;
  p.method = method;
  p.forget_loss_curve = {fl_base, fl_rate};
  p.forget_acc_curve = {0.62, fa_rate};
  p.retain_loss_curve = {rl_base, rl_rate};
  p.retain_acc_curve = {ra_base, ra_rate};
  return p;
}

}  // namespace detail

/// Default method presets: GA is the most disruptive on the retain side,
/// GA_KL the gentlest, GA_DESCENT in between; forget accuracy decays faster
/// than retain accuracy for all three.
inline std::vector<SimProfile> default_profiles() {
  return {
      detail::make_profile(Method::ga(), 2.00, 0.100, 0.55, 2.00, 0.26, 0.90, 0.10),
      detail::make_profile(Method::ga_descent(), 1.95, 0.095, 0.50, 1.95, 0.24, 0.91, 0.09),
      detail::make_profile(Method::ga_kl(), 1.90, 0.090, 0.45, 1.90, 0.22, 0.92, 0.08),
  };
}

/// Preset families for simulated "models": the curve assignments rotate so a
/// different method has the gentlest retain damage per model, reproducing
/// the no-method-is-universally-optimal heatmap pattern. model_index 0
/// equals default_profiles().
inline std::vector<SimProfile> model_profiles(int model_index) {
  if (model_index < 0 || model_index > 2)
    throw validation_error("model_profiles: model index must be 0, 1 or 2");
  std::vector<SimProfile> base = default_profiles();
  std::vector<SimProfile> out = base;
  for (int i = 0; i < 3; ++i) out[i].method = base[(i + model_index) % 3].method;
  std::sort(out.begin(), out.end(), [](const SimProfile& a, const SimProfile& b) {
    return to_string(a.method) < to_string(b.method);
  });
  return out;
}

/// The 12-configuration default grid: three methods at four ascent-step
/// levels, all at the reference learning rate.
inline std::vector<UnlearningConfig> default_grid() {
  const struct {
    Method method;
    const char* token;
  } methods[] = {{Method::ga(), "ga"}, {Method::ga_descent(), "gad"}, {Method::ga_kl(), "gakl"}};
  std::vector<UnlearningConfig> grid;
  for (const auto& m : methods) {
    for (long long steps = 1; steps <= 4; ++steps) {
      UnlearningConfig c;
      c.id = std::string(m.token) + "-s" + std::to_string(steps);
      c.method = m.method;
      c.learning_rate = reference_learning_rate;
      c.ascent_steps = steps;
      grid.push_back(std::move(c));
    }
  }
  return grid;
}

/// Generate synthetic metrics with per-sample records for every grid member.
/// Per-sample losses are drawn log-normally around the curve value,
/// correctness Bernoulli from the accuracy curve; aggregates are computed
/// from the samples so the consistency invariant holds exactly. Identical
/// (profiles, grid, seed) reproduce identical output.
inline std::vector<ConfigMetrics> generate_metrics(std::span<const SimProfile> profiles,
                                                   std::span<const UnlearningConfig> grid,
                                                   std::size_t n_forget, std::size_t n_retain,
                                                   std::uint64_t seed) {
  if (grid.empty()) throw config_error("generate_metrics: empty grid");
  if (n_forget < 1 || n_retain < 1)
    throw validation_error("generate_metrics: need at least one sample per split");
  for (const SimProfile& p : profiles) validate(p);

  std::vector<ConfigMetrics> out;
  out.reserve(grid.size());
  for (const UnlearningConfig& config : grid) {
    validate(config);
    const SimProfile* profile = nullptr;
    for (const SimProfile& p : profiles)
      if (p.method == config.method) {
        profile = &p;
        break;
      }
    if (profile == nullptr)
      throw config_error("generate_metrics: no profile for method '" + to_string(config.method) +
                         "' (config '" + config.id + "')");

    const double a = aggressiveness(config);
    const double forget_loss = std::max(detail::curve_up(profile->forget_loss_curve, a), loss_epsilon);
    const double forget_acc = detail::curve_down(profile->forget_acc_curve, a);
    const double retain_loss = std::max(detail::curve_up(profile->retain_loss_curve, a), loss_epsilon);
    const double retain_acc = detail::curve_down(profile->retain_acc_curve, a);

    SplitMix64 rng(substream_seed(substream_seed(seed, profile->seed), hash_id(config.id)));

    ConfigMetrics m;
    m.config_id = config.id;
    m.per_sample.reserve(n_forget + n_retain);
    const auto draw = [&](Split split, double loss_center, double acc, std::size_t count,
                          const char* prefix) {
      for (std::size_t i = 0; i < count; ++i) {
        SampleRecord rec;
        rec.sample_id = std::string(prefix) + std::to_string(i);
        rec.split = split;
        const double noise =
            profile->noise_sigma > 0.0 ? std::exp(profile->noise_sigma * rng.normal()) : 1.0;
        rec.loss = std::max(loss_center * noise, loss_epsilon);
        rec.correct = rng.bernoulli(acc) ? 1 : 0;
        m.per_sample.push_back(std::move(rec));
      }
    };
    draw(Split::FORGET, forget_loss, forget_acc, n_forget, "f");
    draw(Split::RETAIN, retain_loss, retain_acc, n_retain, "r");

    double loss_sum[2] = {0.0, 0.0};
    double acc_sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (const SampleRecord& rec : m.per_sample) {
      const int i = rec.split == Split::FORGET ? 0 : 1;
      loss_sum[i] += rec.loss;
      acc_sum[i] += rec.correct;
      ++count[i];
    }
    m.forget_loss = loss_sum[0] / static_cast<double>(count[0]);
    m.forget_acc = acc_sum[0] / static_cast<double>(count[0]);
    m.retain_loss = loss_sum[1] / static_cast<double>(count[1]);
    m.retain_acc = acc_sum[1] / static_cast<double>(count[1]);
    out.push_back(std::move(m));
  }
  return out;
}

enum class RiskDistribution { BERNOULLI, BETA };

inline RiskDistribution parse_risk_distribution(std::string_view token) {
  if (token == "bernoulli") return RiskDistribution::BERNOULLI;
  if (token == "beta") return RiskDistribution::BETA;
  throw validation_error("dist: expected bernoulli or beta, got '" + std::string(token) + "'");
}

/// Monte Carlo check of the risk-control condition: draw reference sets with
/// known true mean risk p_star and count how often the bound fails to cover.
struct CoverageSpec {
  double p_star = 0.1;
  long long n_ref = 200;
  double delta = 0.1;
  long long trials = 2000;
  std::uint64_t seed = 0;
  RiskDistribution dist = RiskDistribution::BERNOULLI;
  double beta_concentration = 10.0;  // BETA mode: a = p*kappa, b = (1-p)*kappa
};

inline void validate(const CoverageSpec& s) {
  if (!(s.p_star >= 0.0 && s.p_star <= 1.0))
    throw validation_error("coverage: p_star must be in [0,1]");
  if (s.n_ref < 1) throw validation_error("coverage: n_ref must be >= 1");
  validate(RiskBudget{s.delta});
  if (s.trials < 1) throw validation_error("coverage: trials must be >= 1");
  if (s.dist == RiskDistribution::BETA) {
    if (!(s.p_star > 0.0 && s.p_star < 1.0))
      throw validation_error("coverage: beta mode needs p_star in (0,1)");
    if (!(s.beta_concentration > 0.0))
      throw validation_error("coverage: beta concentration must be > 0");
  }
}

struct CoverageTrial {
  double r_hat = 0.0;
  double alpha_unlearn = 0.0;
  bool violated = false;
};

struct CoverageResult {
  double miscoverage_rate = 0.0;
  long long violations = 0;
  long long trials = 0;
  std::vector<CoverageTrial> details;
};

namespace detail {

// Marsaglia-Tsang gamma sampler (shape boost below 1); deterministic per rng
// stream.
inline double gamma_sample(SplitMix64& rng, double shape) {
  if (shape < 1.0) {
    const double u = 1.0 - rng.uniform01();  // (0, 1]
    return gamma_sample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = 1.0 - rng.uniform01();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

inline double beta_sample(SplitMix64& rng, double a, double b) {
  const double x = gamma_sample(rng, a);
  const double y = gamma_sample(rng, b);
  return x / (x + y);
}

// Bound cache for Bernoulli experiments: r_hat = k/n, so alpha depends only
// on the success count.
class bernoulli_bound_cache {
public:
  bernoulli_bound_cache(long long n, double delta) : n_(n), budget_{delta}, cache_(n + 1, -1.0) {}

  double alpha_for_count(long long k) {
    double& slot = cache_[static_cast<std::size_t>(k)];
    if (slot < 0.0) {
      const double r_hat = static_cast<double>(k) / static_cast<double>(n_);
      slot = conformal_unlearning_risk(budget_, {n_, r_hat}).alpha_unlearn;
    }
    return slot;
  }

private:
  long long n_;
  RiskBudget budget_;
  std::vector<double> cache_;
};

}  // namespace detail

/// Run the coverage experiment: per trial, draw n_ref i.i.d. risks with mean
/// p_star, compute the bound at delta, and record a violation iff
/// p_star > alpha_unlearn. Trials derive independent streams from
/// (seed, trial), so results are schedule-independent.
inline CoverageResult coverage_experiment(const CoverageSpec& spec) {
  validate(spec);
  CoverageResult result;
  result.trials = spec.trials;
  result.details.reserve(static_cast<std::size_t>(spec.trials));
  detail::bernoulli_bound_cache cache(spec.n_ref, spec.delta);
  const RiskBudget budget{spec.delta};

  for (long long trial = 0; trial < spec.trials; ++trial) {
    SplitMix64 rng(substream_seed(spec.seed, static_cast<std::uint64_t>(trial)));
    CoverageTrial t;
    if (spec.dist == RiskDistribution::BERNOULLI) {
      long long count = 0;
      for (long long i = 0; i < spec.n_ref; ++i) count += rng.bernoulli(spec.p_star) ? 1 : 0;
      t.r_hat = static_cast<double>(count) / static_cast<double>(spec.n_ref);
      t.alpha_unlearn = cache.alpha_for_count(count);
    } else {
      const double a = spec.p_star * spec.beta_concentration;
      const double b = (1.0 - spec.p_star) * spec.beta_concentration;
      double sum = 0.0;
      for (long long i = 0; i < spec.n_ref; ++i) sum += detail::beta_sample(rng, a, b);
      t.r_hat = std::clamp(sum / static_cast<double>(spec.n_ref), 0.0, 1.0);
      t.alpha_unlearn = conformal_unlearning_risk(budget, {spec.n_ref, t.r_hat}).alpha_unlearn;
    }
    t.violated = spec.p_star > t.alpha_unlearn;
    if (t.violated) ++result.violations;
    result.details.push_back(t);
  }
  result.miscoverage_rate =
      static_cast<double>(result.violations) / static_cast<double>(result.trials);
  return result;
}

/// Family-wise error experiment for the Bonferroni-corrected valid set:
/// every configuration's true risk strictly exceeds alpha, so any non-empty
/// valid set is a family error.
struct FwerSpec {
  long long grid_size = 20;
  std::vector<double> true_risks = {0.3};  // length 1 (broadcast) or grid_size
  double alpha = 0.2;
  double delta = 0.1;
  long long n_ref = 200;
  long long trials = 2000;
  std::uint64_t seed = 0;
};

struct FwerResult {
  double family_error_rate = 0.0;
  long long errors = 0;
  long long trials = 0;
};

inline void validate(const FwerSpec& s) {
  if (s.grid_size < 1) throw validation_error("fwer: grid_size must be >= 1");
  if (s.true_risks.size() != 1 && s.true_risks.size() != static_cast<std::size_t>(s.grid_size))
    throw validation_error("fwer: true_risks must have length 1 or grid_size");
  if (!(s.alpha >= 0.0 && s.alpha < 1.0)) throw validation_error("fwer: alpha must be in [0,1)");
  for (const double p : s.true_risks) {
    if (!(p > s.alpha && p <= 1.0))
      throw validation_error("fwer: every true risk must exceed alpha (experiment is meaningless otherwise)");
  }
  validate(RiskBudget{s.delta});
  if (s.n_ref < 1) throw validation_error("fwer: n_ref must be >= 1");
  if (s.trials < 1) throw validation_error("fwer: trials must be >= 1");
}

inline FwerResult fwer_experiment(const FwerSpec& spec) {
  validate(spec);
  FwerResult result;
  result.trials = spec.trials;
  const double per_config_delta = spec.delta / static_cast<double>(spec.grid_size);
  detail::bernoulli_bound_cache cache(spec.n_ref, per_config_delta);

  for (long long trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t trial_seed = substream_seed(spec.seed, static_cast<std::uint64_t>(trial));
    bool family_error = false;
    for (long long c = 0; c < spec.grid_size && !family_error; ++c) {
      SplitMix64 rng(substream_seed(trial_seed, static_cast<std::uint64_t>(c) + 1));
      const double p =
          spec.true_risks.size() == 1 ? spec.true_risks[0] : spec.true_risks[static_cast<std::size_t>(c)];
      long long count = 0;
      for (long long i = 0; i < spec.n_ref; ++i) count += rng.bernoulli(p) ? 1 : 0;
      if (cache.alpha_for_count(count) <= spec.alpha) family_error = true;
    }
    if (family_error) ++result.errors;
  }
  result.family_error_rate = static_cast<double>(result.errors) / static_cast<double>(result.trials);
  return result;
}

}  // namespace froc
