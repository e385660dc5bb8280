#pragma once

#include "sqlprobe/execution.hpp"
#include "sqlprobe/util.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sqlprobe {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BootstrapOptions {
  std::size_t n_resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 20250101;
};

struct AccuracyReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  Interval ci95;
};

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fraction of matches among outcomes whose gold query executed. Throws
/// MetricsError when nothing is left after excluding gold errors.
AccuracyReport accuracy(std::span<const MatchOutcome> outcomes, const BootstrapOptions& bootstrap = {});

/// A_orig - A_para. Both values must use the same scale; a value above 1 on one
/// side and within [0,1] on the other is rejected as mixed scales.
double degradation(double a_orig, double a_para);

/// [a - (1-cs)a, a + (1-cs)a], hi clamped to the scale maximum (1 or 100).
Interval adjusted_accuracy(double a_para, double cs);

/// e_false / (e_true + eps)
double normalized_error_rate(double e_false, double e_true, double eps = 1e-6);

struct PassAtKInput {
  long long n = 0;
  long long c = 0;
  long long k = 0;
};

/// Unbiased pass@k estimate 1 - C(n-c,k)/C(n,k) as a running product.
double pass_at_k(const PassAtKInput& input);

/// Percentile bootstrap interval for the mean.
Interval bootstrap_ci(std::span<const double> samples, Rng& rng, std::size_t n_resamples = 1000,
                      double level = 0.95);
Interval bootstrap_ci(std::span<const double> samples, std::size_t n_resamples = 1000, double level = 0.95,
                      std::uint64_t seed = BootstrapOptions{}.seed);

/// Linear-interpolation quantile of sorted data (q in [0,1]).
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace sqlprobe
