#include "sqlprobe/metrics.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <vector>

namespace sqlprobe {
namespace {

MatchOutcome hit() { return {true, MatchReason::exact}; }
MatchOutcome miss() { return {false, MatchReason::mismatch}; }
MatchOutcome gold_err() { return {false, MatchReason::gold_error}; }

TEST(Accuracy, AllMatch)
{
  const std::vector<MatchOutcome> o{hit(), hit(), {true, MatchReason::reordered_equal}};
  const auto r = accuracy(o);
  EXPECT_EQ(r.n, 3u);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.ci95.lo, 1.0);
  EXPECT_DOUBLE_EQ(r.ci95.hi, 1.0);
}

TEST(Accuracy, HalfMatch)
{
  const std::vector<MatchOutcome> o{hit(), miss()};
  EXPECT_DOUBLE_EQ(accuracy(o).accuracy, 0.5);
}

TEST(Accuracy, GoldErrorsLeaveDenominator)
{
  const std::vector<MatchOutcome> o{hit(), hit(), hit(), gold_err()};
  const auto r = accuracy(o);
  EXPECT_EQ(r.n, 3u);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

TEST(Accuracy, PredErrorsAndTimeoutsCountAsMisses)
{
  const std::vector<MatchOutcome> o{hit(), {false, MatchReason::pred_error}, {false, MatchReason::timeout}, hit()};
  EXPECT_DOUBLE_EQ(accuracy(o).accuracy, 0.5);
}

TEST(Accuracy, EmptyAfterExclusionFails)
{
  EXPECT_THROW(accuracy(std::vector<MatchOutcome>{}), MetricsError);
  EXPECT_THROW(accuracy(std::vector<MatchOutcome>{gold_err()}), MetricsError);
}

TEST(Accuracy, IntervalBracketsEstimate)
{
  std::vector<MatchOutcome> o;
  for (int i = 0; i < 40; ++i) o.push_back(i % 3 == 0 ? miss() : hit());
  const auto r = accuracy(o);
  EXPECT_LE(r.ci95.lo, r.accuracy);
  EXPECT_GE(r.ci95.hi, r.accuracy);
  EXPECT_LT(r.ci95.lo, r.ci95.hi);
}

TEST(Degradation, TableValues)
{
  EXPECT_NEAR(degradation(77.1, 66.9), 10.2, 1e-9);
  EXPECT_NEAR(degradation(62.9, 42.5), 20.4, 1e-9);
  EXPECT_DOUBLE_EQ(degradation(0.7, 0.7), 0.0);
  EXPECT_DOUBLE_EQ(degradation(55.5, 55.5), 0.0);
}

TEST(Degradation, MixedScalesRejected)
{
  EXPECT_THROW(degradation(77.1, 0.669), MetricsError);
  EXPECT_THROW(degradation(0.771, 66.9), MetricsError);
  EXPECT_THROW(degradation(-0.1, 0.5), MetricsError);
}

TEST(AdjustedAccuracy, Examples)
{
  const auto full = adjusted_accuracy(65.2, 1.0);
  EXPECT_DOUBLE_EQ(full.lo, 65.2);
  EXPECT_DOUBLE_EQ(full.hi, 65.2);

  const auto partial = adjusted_accuracy(65.2, 0.9);
  EXPECT_NEAR(partial.lo, 58.68, 1e-9);
  EXPECT_NEAR(partial.hi, 71.72, 1e-9);

  const auto zero = adjusted_accuracy(0.0, 0.3);
  EXPECT_DOUBLE_EQ(zero.lo, 0.0);
  EXPECT_DOUBLE_EQ(zero.hi, 0.0);
}

TEST(AdjustedAccuracy, UpperBoundClampedToScale)
{
  EXPECT_DOUBLE_EQ(adjusted_accuracy(90.0, 0.5).hi, 100.0);
  EXPECT_DOUBLE_EQ(adjusted_accuracy(0.9, 0.5).hi, 1.0);
  EXPECT_DOUBLE_EQ(adjusted_accuracy(0.9, 0.5).lo, 0.45);
}

TEST(NormalizedErrorRate, Examples)
{
  EXPECT_DOUBLE_EQ(normalized_error_rate(0, 5), 0.0);
  EXPECT_NEAR(normalized_error_rate(10, 2), 10.0 / (2.0 + 1e-6), 1e-12);
  EXPECT_NEAR(normalized_error_rate(10, 2), 5.0, 1e-5);
  EXPECT_DOUBLE_EQ(normalized_error_rate(3, 0), 3.0 / 1e-6);
}

TEST(PassAtK, Examples)
{
  EXPECT_DOUBLE_EQ(pass_at_k({10, 10, 1}), 1.0);
  EXPECT_DOUBLE_EQ(pass_at_k({10, 0, 5}), 0.0);
  EXPECT_NEAR(pass_at_k({5, 2, 2}), 0.7, 1e-12);
  EXPECT_NEAR(0.5 * (pass_at_k({10, 7, 1}) + pass_at_k({10, 3, 1})), 0.5, 1e-12);
}

TEST(PassAtK, InvalidInputs)
{
  EXPECT_THROW(pass_at_k({5, 6, 1}), MetricsError);
  EXPECT_THROW(pass_at_k({5, 2, 0}), MetricsError);
  EXPECT_THROW(pass_at_k({5, 2, 6}), MetricsError);
  EXPECT_THROW(pass_at_k({5, -1, 1}), MetricsError);
}

// Fraction of k-subsets of n replicas (the first c successful) holding a success.
double enumerated_pass_at_k(int n, int c, int k)
{
  long long total = 0, hits = 0;
  const std::uint32_t success_mask = (1u << c) - 1u;
  for (std::uint32_t subset = 0; subset < (1u << n); ++subset) {
    if (std::popcount(subset) != k) continue;
    ++total;
    if (subset & success_mask) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

TEST(PassAtK, MatchesSubsetEnumeration)
{
  for (int n = 1; n <= 10; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        EXPECT_NEAR(pass_at_k({n, c, k}), enumerated_pass_at_k(n, c, k), 1e-12) << n << " " << c << " " << k;
      }
      EXPECT_EQ(pass_at_k({n, c, 1}), static_cast<double>(c) / static_cast<double>(n));
    }
  }
}

TEST(PassAtK, MonotoneInKAndLargeN)
{
  for (int k = 1; k < 200; ++k) EXPECT_LE(pass_at_k({200, 13, k}), pass_at_k({200, 13, k + 1}));
  const double v = pass_at_k({1000000, 1, 500000});
  EXPECT_NEAR(v, 0.5, 1e-9);
}

TEST(Bootstrap, ConstantSamplesGiveZeroWidth)
{
  const std::vector<double> ones(50, 1.0), zeros(50, 0.0);
  const auto a = bootstrap_ci(ones);
  const auto b = bootstrap_ci(zeros);
  EXPECT_EQ(a.lo, 1.0);
  EXPECT_EQ(a.hi, 1.0);
  EXPECT_EQ(b.lo, 0.0);
  EXPECT_EQ(b.hi, 0.0);
}

TEST(Bootstrap, SeededAndDeterministic)
{
  std::vector<double> x;
  for (int i = 0; i < 30; ++i) x.push_back(i % 4 == 0 ? 0.0 : 1.0);
  const auto a = bootstrap_ci(x, 500, 0.95, 3);
  const auto b = bootstrap_ci(x, 500, 0.95, 3);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  EXPECT_THROW(bootstrap_ci(std::vector<double>{}, 10), MetricsError);
  EXPECT_THROW(bootstrap_ci(x, 0), MetricsError);
  EXPECT_THROW(bootstrap_ci(x, 10, 1.5), MetricsError);
}

TEST(Bootstrap, CoverageOnBernoulliSamples)
{
  Rng data_rng(2024);
  int covered = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> sample(500);
    for (auto& v : sample) v = uniform_unit(data_rng) < 0.7 ? 1.0 : 0.0;
    Rng boot_rng(static_cast<std::uint64_t>(t) + 1);
    const auto ci = bootstrap_ci(sample, boot_rng, 1000, 0.95);
    if (ci.lo <= 0.7 && 0.7 <= ci.hi) ++covered;
  }
  EXPECT_GE(covered, 180) << covered << "/" << trials;
}

TEST(Quantile, LinearInterpolation)
{
  const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_sorted(std::vector<double>{5.0}, 0.3), 5.0);
}

}  // namespace
}  // namespace sqlprobe
