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

#include "froc/risk_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "froc/simulator.hpp"
#include "test_support.hpp"

using namespace froc;

namespace {

ConfigMetrics make_metrics(std::string id, double fl, double fa, double rl, double ra) {
  ConfigMetrics m;
  m.config_id = std::move(id);
  m.forget_loss = fl;
  m.forget_acc = fa;
  m.retain_loss = rl;
  m.retain_acc = ra;
  return m;
}

}  // namespace

TEST(Softplus, KnownValues) {
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus(1.0), oracle::softplus(1.0), 1e-15);
  EXPECT_NEAR(softplus(1.0), 1.3132616875182228, 1e-12);
  // limit case: softplus(z) -> e^z as z -> -inf, still strictly positive
  EXPECT_NEAR(softplus(-50.0), std::exp(-50.0), 1e-30);
  EXPECT_GT(softplus(-50.0), 0.0);
  EXPECT_GT(softplus(-800.0), 0.0);
}

TEST(Softplus, OverflowSafe) {
  EXPECT_NEAR(softplus(40.0), 40.0 + std::log1p(std::exp(-40.0)), 1e-15);
  EXPECT_EQ(softplus(1000.0), 1000.0);  // log1p(e^-1000) underflows to 0 exactly
}

TEST(Softplus, RejectsNonFinite) {
  EXPECT_THROW(softplus(std::numeric_limits<double>::quiet_NaN()), domain_error);
  EXPECT_THROW(softplus(std::numeric_limits<double>::infinity()), domain_error);
}

TEST(Softplus, StrictlyIncreasing) {
  SplitMix64 rng(101);
  for (int i = 0; i < 2000; ++i) {
    const double z = -40.0 + 80.0 * rng.uniform01();
    const double dz = 1e-6 + rng.uniform01();
    EXPECT_LT(softplus(z), softplus(z + dz)) << "z=" << z << " dz=" << dz;
  }
}

TEST(GridContext, Singleton) {
  const std::vector<ConfigMetrics> metrics = {make_metrics("a", 1.0, 0.4, 2.0, 0.9)};
  const GridContext ctx = build_grid_context(metrics);
  EXPECT_EQ(ctx.max_forget_acc, 0.4);
  EXPECT_EQ(ctx.min_retain_loss, 2.0);
  EXPECT_EQ(ctx.max_retain_acc, 0.9);
  EXPECT_EQ(ctx.grid_size, 1u);
}

TEST(GridContext, PairwiseMax) {
  const std::vector<ConfigMetrics> metrics = {make_metrics("a", 1.0, 0.4, 2.0, 0.9),
                                              make_metrics("b", 1.0, 0.6, 2.5, 0.8)};
  EXPECT_EQ(build_grid_context(metrics).max_forget_acc, 0.6);
}

TEST(GridContext, MatchesBruteForceScan) {
  SplitMix64 rng(7);
  for (int round = 0; round < 50; ++round) {
    std::vector<ConfigMetrics> metrics;
    const int n = 1 + static_cast<int>(rng.next() % 8);
    for (int i = 0; i < n; ++i)
      metrics.push_back(make_metrics("cfg" + std::to_string(i), 0.5 + 3.0 * rng.uniform01(),
                                     rng.uniform01(), 0.5 + 3.0 * rng.uniform01(),
                                     rng.uniform01()));
    const GridContext ctx = build_grid_context(metrics);
    // independent linear scan
    double mfa = 0.0, mrl = std::numeric_limits<double>::infinity(), mra = 0.0;
    for (const ConfigMetrics& m : metrics) {
      mfa = std::max(mfa, m.forget_acc);
      mrl = std::min(mrl, m.retain_loss);
      mra = std::max(mra, m.retain_acc);
    }
    EXPECT_EQ(ctx.max_forget_acc, mfa);
    EXPECT_EQ(ctx.min_retain_loss, mrl);
    EXPECT_EQ(ctx.max_retain_acc, mra);
    EXPECT_EQ(ctx.grid_size, metrics.size());
  }
}

TEST(GridContext, Errors) {
  EXPECT_THROW(build_grid_context({}), config_error);
  const std::vector<ConfigMetrics> dup = {make_metrics("a", 1.0, 0.4, 2.0, 0.9),
                                          make_metrics("a", 1.0, 0.5, 2.0, 0.9)};
  EXPECT_THROW(build_grid_context(dup), validation_error);
}

TEST(ForgetShift, KnownValues) {
  GridContext ctx{0.7, 1.0, 1.0, 3};
  // log e = 1 and no accuracy gap
  EXPECT_NEAR(forget_shift(make_metrics("a", std::exp(1.0), 0.7, 1.0, 1.0), ctx), 1.0, 1e-12);
  // both terms vanish
  EXPECT_NEAR(forget_shift(make_metrics("a", 1.0, 0.7, 1.0, 1.0), ctx), 0.0, 1e-12);
  // direct evaluation oracle: log 2.5 + (0.7 - 0.3)
  const double expected = static_cast<double>(std::log(2.5L) + 0.4L);
  EXPECT_NEAR(forget_shift(make_metrics("a", 2.5, 0.3, 1.0, 1.0), ctx), expected, 1e-12);
  EXPECT_NEAR(expected, 1.3162907318741551, 1e-12);
}

TEST(ForgetShift, Monotonicity) {
  SplitMix64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    GridContext ctx{1.0, 1.0, 1.0, 2};
    const double loss = 0.2 + 4.0 * rng.uniform01();
    const double acc = rng.uniform01();
    const ConfigMetrics base = make_metrics("a", loss, acc, 1.0, 1.0);
    const double s0 = forget_shift(base, ctx);
    ConfigMetrics more_loss = base;
    more_loss.forget_loss = loss + 0.05 + rng.uniform01();
    EXPECT_GT(forget_shift(more_loss, ctx), s0);
    if (acc < 0.98) {
      ConfigMetrics more_acc = base;
      more_acc.forget_acc = acc + (1.0 - acc) * (0.05 + 0.9 * rng.uniform01());
      EXPECT_LT(forget_shift(more_acc, ctx), s0);
    }
  }
}

TEST(ForgetShift, Errors) {
  GridContext ctx{0.7, 1.0, 1.0, 1};
  EXPECT_THROW(forget_shift(make_metrics("a", 0.0, 0.5, 1.0, 1.0), ctx), domain_error);
  EXPECT_THROW(forget_shift(make_metrics("a", -1.0, 0.5, 1.0, 1.0), ctx), domain_error);
  // accuracy above the grid maximum means the context is from another grid
  EXPECT_THROW(forget_shift(make_metrics("a", 1.0, 0.9, 1.0, 1.0), ctx), validation_error);
}

TEST(RetainDistortion, KnownValues) {
  GridContext ctx{1.0, 2.0, 0.92, 3};
  // best-performing configuration scores exactly zero
  EXPECT_EQ(retain_distortion(make_metrics("a", 1.0, 1.0, 2.0, 0.92), ctx), 0.0);
  // loss term only
  EXPECT_NEAR(retain_distortion(make_metrics("a", 1.0, 1.0, 4.0, 0.92), ctx), std::log(2.0), 1e-12);
  // direct evaluation oracle: ln(1.5) + 0.07
  const double expected = static_cast<double>(std::log(1.5L) + 0.07L);
  EXPECT_NEAR(retain_distortion(make_metrics("a", 1.0, 1.0, 3.0, 0.85), ctx), expected, 1e-12);
  EXPECT_NEAR(expected, 0.4754651081081644, 1e-12);
}

TEST(RetainDistortion, NonnegativeAndMonotone) {
  SplitMix64 rng(13);
  for (int i = 0; i < 2000; ++i) {
    const double min_loss = 0.5 + rng.uniform01();
    const double max_acc = 0.5 + 0.5 * rng.uniform01();
    GridContext ctx{1.0, min_loss, max_acc, 2};
    const double loss = min_loss * (1.0 + 3.0 * rng.uniform01());
    const double acc = max_acc * rng.uniform01();
    const ConfigMetrics base = make_metrics("a", 1.0, 1.0, loss, acc);
    const double r0 = retain_distortion(base, ctx);
    EXPECT_GE(r0, 0.0);
    ConfigMetrics worse_loss = base;
    worse_loss.retain_loss = loss * (1.05 + rng.uniform01());
    EXPECT_GT(retain_distortion(worse_loss, ctx), r0);
    ConfigMetrics better_acc = base;
    better_acc.retain_acc = acc + (max_acc - acc) * 0.5 + 1e-6;
    EXPECT_LT(retain_distortion(better_acc, ctx), r0);
  }
}

TEST(RetainDistortion, Errors) {
  GridContext ctx{1.0, 2.0, 0.9, 1};
  EXPECT_THROW(retain_distortion(make_metrics("a", 1.0, 1.0, 0.0, 0.5), ctx), domain_error);
  EXPECT_THROW(retain_distortion(make_metrics("a", 1.0, 1.0, 1.0, 0.5), ctx), validation_error);
}

TEST(UnifiedRisk, NeutralPoint) {
  // s = tau_f and r = 0 puts both softplus arguments at zero
  GridContext ctx{0.5, 2.0, 0.9, 1};
  const ConfigMetrics m = make_metrics("a", 1.0, 0.5, 2.0, 0.9);
  RiskWeights w;
  w.tau_f = forget_shift(m, ctx);
  const RiskBreakdown b = unified_risk(m, ctx, w);
  EXPECT_NEAR(b.r_tilde, 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(b.r_norm, 0.75, 1e-15);
}

TEST(UnifiedRisk, SingleTermReduction) {
  GridContext ctx{0.5, 2.0, 0.9, 1};
  const ConfigMetrics m = make_metrics("a", 1.0, 0.5, 2.0, 0.9);
  RiskWeights w;
  w.w_f = 0.0;
  w.w_u = 1.0;
  w.tau_f = 0.0;
  EXPECT_NEAR(unified_risk(m, ctx, w).r_tilde, std::log(2.0), 1e-15);
}

TEST(UnifiedRisk, ComposedOracle) {
  // compose the forget-shift and retain-distortion oracles through softplus
  GridContext ctx{0.7, 2.0, 0.92, 2};
  const ConfigMetrics m = make_metrics("a", 2.5, 0.3, 3.0, 0.85);
  RiskWeights w;
  w.tau_f = 1.0;
  const double s = forget_shift(m, ctx);
  const double r = retain_distortion(m, ctx);
  const double expected = oracle::softplus(1.0 - s) + oracle::softplus(r);
  const RiskBreakdown b = unified_risk(m, ctx, w);
  EXPECT_NEAR(b.r_tilde, expected, 1e-12);
  EXPECT_NEAR(b.r_norm, -std::expm1(-expected), 1e-12);
}

TEST(UnifiedRisk, WeightLinearity) {
  GridContext ctx{0.7, 2.0, 0.92, 2};
  const ConfigMetrics m = make_metrics("a", 2.5, 0.3, 3.0, 0.85);
  SplitMix64 rng(17);
  for (int i = 0; i < 200; ++i) {
    RiskWeights w;
    w.w_f = 2.0 * rng.uniform01();
    w.w_u = 2.0 * rng.uniform01() + 1e-6;
    w.tau_f = -1.0 + 2.0 * rng.uniform01();
    const RiskBreakdown b = unified_risk(m, ctx, w);
    EXPECT_NEAR(b.r_tilde, w.w_f * b.delta_f + w.w_u * b.delta_u, 1e-15);
    EXPECT_GT(b.delta_f, 0.0);
    EXPECT_GT(b.delta_u, 0.0);
  }
}

TEST(UnifiedRisk, DirectionalResponse) {
  GridContext ctx{0.9, 1.0, 0.95, 4};
  RiskWeights w;
  w.tau_f = 1.0;
  const ConfigMetrics base = make_metrics("a", 2.0, 0.5, 2.0, 0.8);
  const RiskBreakdown b0 = unified_risk(base, ctx, w);
  ConfigMetrics stronger_forget = base;  // s up -> r_tilde down
  stronger_forget.forget_loss = 3.0;
  EXPECT_LT(unified_risk(stronger_forget, ctx, w).r_tilde, b0.r_tilde);
  ConfigMetrics worse_retain = base;  // r up -> r_tilde up
  worse_retain.retain_loss = 3.0;
  EXPECT_GT(unified_risk(worse_retain, ctx, w).r_tilde, b0.r_tilde);
}

TEST(SquashRisk, ClipAndExp) {
  EXPECT_EQ(squash_risk(0.4, Squash::CLIP), 0.4);
  EXPECT_EQ(squash_risk(1.7, Squash::CLIP), 1.0);
  EXPECT_NEAR(squash_risk(1.0, Squash::EXP_COMPLEMENT), 1.0 - std::exp(-1.0), 1e-15);
  // strictly increasing, so grid argmin is preserved
  SplitMix64 rng(23);
  for (int i = 0; i < 500; ++i) {
    const double a = 4.0 * rng.uniform01();
    const double b = a + 1e-9 + rng.uniform01();
    EXPECT_LT(squash_risk(a, Squash::EXP_COMPLEMENT), squash_risk(b, Squash::EXP_COMPLEMENT));
  }
}

TEST(SquashRisk, GridArgminCoincides) {
  // the normalization must not reshuffle a grid's ordering
  SplitMix64 rng(37);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> r_tilde, r_norm;
    const std::size_t n = 2 + rng.next() % 10;
    for (std::size_t i = 0; i < n; ++i) {
      const double rt = 4.0 * rng.uniform01() + 1e-9;
      r_tilde.push_back(rt);
      r_norm.push_back(squash_risk(rt, Squash::EXP_COMPLEMENT));
    }
    const auto argmin = [](const std::vector<double>& v) {
      return std::distance(v.begin(), std::min_element(v.begin(), v.end()));
    };
    const auto argmax = [](const std::vector<double>& v) {
      return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
    };
    EXPECT_EQ(argmin(r_tilde), argmin(r_norm));
    EXPECT_EQ(argmax(r_tilde), argmax(r_norm));
  }
}

TEST(AggregateRisk, KnownValues) {
  EXPECT_EQ(aggregate_risk(std::vector<double>{0.2}), 0.2);
  EXPECT_EQ(aggregate_risk(std::vector<double>{0.0, 1.0}), 0.5);
}

TEST(AggregateRisk, MatchesKahanReference) {
  SplitMix64 rng(29);
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(rng.uniform01());
  EXPECT_NEAR(aggregate_risk(values), oracle::kahan_mean(values), 1e-12);
}

TEST(AggregateRisk, ConstantVectorIsIdentity) {
  SplitMix64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform01();
    const std::vector<double> values(1 + rng.next() % 50, x);
    EXPECT_NEAR(aggregate_risk(values), x, 1e-12);
  }
}

TEST(AggregateRisk, Errors) {
  EXPECT_THROW(aggregate_risk({}), config_error);
  EXPECT_THROW(aggregate_risk(std::vector<double>{0.5, 1.2}), domain_error);
  EXPECT_THROW(aggregate_risk(std::vector<double>{-0.1}), domain_error);
}

namespace {

std::vector<SampleRecord> two_split_samples(double f_loss, int f_correct, double r_loss,
                                            int r_correct) {
  SampleRecord f{"f0", Split::FORGET, f_loss, f_correct};
  SampleRecord r{"r0", Split::RETAIN, r_loss, r_correct};
  return {f, r};
}

}  // namespace

TEST(PerSampleRisks, SubstitutionIdentity) {
  // when each split has one sample, the sample values ARE the aggregates, so
  // per-sample and aggregate risks coincide
  const auto samples = two_split_samples(2.5, 1, 3.0, 0);
  GridContext ctx{1.0, 2.0, 0.9, 2};
  RiskWeights w;
  w.tau_f = 0.8;
  const std::vector<double> risks = per_sample_risks(samples, ctx, w);
  ASSERT_EQ(risks.size(), 2u);

  ConfigMetrics m = make_metrics("a", 2.5, 1.0, 3.0, 0.0);
  m.per_sample = samples;
  const RiskBreakdown b = unified_risk(m, ctx, w);
  EXPECT_NEAR(risks[0], b.r_norm, 1e-12);
  EXPECT_NEAR(risks[1], b.r_norm, 1e-12);
}

TEST(PerSampleRisks, PermutationSymmetry) {
  GridContext ctx{1.0, 1.0, 1.0, 2};
  RiskWeights w;
  w.tau_f = 0.5;
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 6; ++i) samples.push_back({"f" + std::to_string(i), Split::FORGET, 2.0, 1});
  for (int i = 0; i < 6; ++i) samples.push_back({"r" + std::to_string(i), Split::RETAIN, 1.5, 0});
  const std::vector<double> risks = per_sample_risks(samples, ctx, w);
  for (std::size_t i = 1; i < 6; ++i) EXPECT_EQ(risks[i], risks[0]);
  for (std::size_t i = 7; i < 12; ++i) EXPECT_EQ(risks[i], risks[6]);
}

TEST(PerSampleRisks, MatchesIndependentRecomputation) {
  // 10-sample fixture recomputed from the raw definitions in long double
  std::vector<SampleRecord> samples;
  const double f_losses[5] = {1.7, 2.2, 2.9, 3.3, 2.0};
  const int f_correct[5] = {1, 0, 0, 1, 0};
  const double r_losses[5] = {1.1, 1.4, 1.2, 1.6, 1.3};
  const int r_correct[5] = {1, 1, 0, 1, 1};
  for (int i = 0; i < 5; ++i)
    samples.push_back({"f" + std::to_string(i), Split::FORGET, f_losses[i], f_correct[i]});
  for (int i = 0; i < 5; ++i)
    samples.push_back({"r" + std::to_string(i), Split::RETAIN, r_losses[i], r_correct[i]});

  GridContext ctx{0.9, 1.0, 0.95, 3};
  RiskWeights w;
  w.w_f = 1.25;
  w.w_u = 0.75;
  w.tau_f = 1.1;

  const std::vector<double> risks = per_sample_risks(samples, ctx, w);
  ASSERT_EQ(risks.size(), 10u);

  long double fl = 0, fa = 0, rl = 0, ra = 0;
  for (int i = 0; i < 5; ++i) {
    fl += f_losses[i];
    fa += f_correct[i];
    rl += r_losses[i];
    ra += r_correct[i];
  }
  fl /= 5, fa /= 5, rl /= 5, ra /= 5;
  const long double s_agg = std::log(fl) + (0.9L - fa);
  const long double r_agg = (std::log(rl) - std::log(1.0L)) + (0.95L - ra);
  const auto sp = [](long double z) { return std::log1p(std::exp(z)); };
  for (int i = 0; i < 10; ++i) {
    long double rt;
    if (i < 5) {
      const long double s_i = std::log((long double)f_losses[i]) + (0.9L - f_correct[i]);
      rt = 1.25L * sp(1.1L - s_i) + 0.75L * sp(r_agg);
    } else {
      const long double r_i =
          (std::log((long double)r_losses[i - 5]) - std::log(1.0L)) + (0.95L - r_correct[i - 5]);
      rt = 1.25L * sp(1.1L - s_agg) + 0.75L * sp(r_i);
    }
    const double expected = static_cast<double>(-std::expm1(-rt));
    EXPECT_NEAR(risks[i], expected, 1e-12) << "sample " << i;
  }
}

TEST(PerSampleRisks, Errors) {
  RiskWeights w;
  EXPECT_THROW(per_sample_risks({}, GridContext{1, 1, 1, 1}, w), config_error);
  // single-split input cannot reconstruct the opposite aggregate
  std::vector<SampleRecord> only_forget = {{"f0", Split::FORGET, 2.0, 1}};
  EXPECT_THROW(per_sample_risks(only_forget, GridContext{1, 1, 1, 1}, w), validation_error);
  // context from a different grid: sample mean accuracy exceeds the maximum
  const auto samples = two_split_samples(2.0, 1, 1.5, 1);
  EXPECT_THROW(per_sample_risks(samples, GridContext{0.5, 1.0, 1.0, 1}, w), validation_error);
}

TEST(Median, EvenOddAndErrors) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_EQ(median({5.0}), 5.0);
  EXPECT_THROW(median({}), config_error);
}

TEST(MetricsValidation, SampleMeanConsistency) {
  ConfigMetrics m = make_metrics("a", 2.5, 1.0, 3.0, 0.0);
  m.per_sample = two_split_samples(2.5, 1, 3.0, 0);
  EXPECT_NO_THROW(validate(m));
  m.forget_loss = 2.6;  // breaks the mean identity
  EXPECT_THROW(validate(m), validation_error);
}
