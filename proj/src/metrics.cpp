#include "sqlprobe/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace sqlprobe {

AccuracyReport accuracy(std::span<const MatchOutcome> outcomes, const BootstrapOptions& bootstrap)
{
  std::vector<double> hits;
  hits.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.reason == MatchReason::gold_error) continue;
    hits.push_back(o.match ? 1.0 : 0.0);
  }
  if (hits.empty()) throw MetricsError("accuracy: no outcomes left after excluding gold errors");

  AccuracyReport report;
  report.n = hits.size();
  const double matched = std::count(hits.begin(), hits.end(), 1.0);
  report.accuracy = matched / static_cast<double>(hits.size());
  if (hits.size() >= 2) {
    report.ci95 = bootstrap_ci(hits, bootstrap.n_resamples, bootstrap.level, bootstrap.seed);
  } else {
    report.ci95 = {report.accuracy, report.accuracy};
  }
  report.ci95.lo = std::min(report.ci95.lo, report.accuracy);
  report.ci95.hi = std::max(report.ci95.hi, report.accuracy);
  return report;
}

double degradation(double a_orig, double a_para)
{
  if (!std::isfinite(a_orig) || !std::isfinite(a_para) || a_orig < 0 || a_para < 0 || a_orig > 100 || a_para > 100)
    throw MetricsError("degradation: accuracies must lie in [0,1] or [0,100]");
  const bool orig_percent = a_orig > 1.0;
  const bool para_percent = a_para > 1.0;
  if (orig_percent != para_percent && std::min(a_orig, a_para) > 0.0)
    throw MetricsError("degradation: mixed scales (" + format_double(a_orig) + " vs " + format_double(a_para) + ")");
  return a_orig - a_para;
}

Interval adjusted_accuracy(double a_para, double cs)
{
  if (cs < 0.0 || cs > 1.0) throw MetricsError("adjusted_accuracy: confidence score must lie in [0,1]");
  if (a_para < 0.0 || a_para > 100.0) throw MetricsError("adjusted_accuracy: accuracy out of range");
  const double scale_max = a_para > 1.0 ? 100.0 : 1.0;
  const double half_width = (1.0 - cs) * a_para;
  return {a_para - half_width, std::min(a_para + half_width, scale_max)};
}

double normalized_error_rate(double e_false, double e_true, double eps)
{
  if (e_false < 0.0 || e_true < 0.0) throw MetricsError("normalized_error_rate: negative error rate");
  if (!(eps > 0.0)) throw MetricsError("normalized_error_rate: eps must be positive");
  return e_false / (e_true + eps);
}

double pass_at_k(const PassAtKInput& in)
{
  if (in.n < 1 || in.c < 0 || in.c > in.n || in.k < 1 || in.k > in.n)
    throw MetricsError("pass_at_k: require 0 <= c <= n and 1 <= k <= n (n=" + std::to_string(in.n) +
                       ", c=" + std::to_string(in.c) + ", k=" + std::to_string(in.k) + ")");
  if (in.n - in.c < in.k) return 1.0;
  if (in.k == 1) return static_cast<double>(in.c) / static_cast<double>(in.n);
  double all_fail = 1.0;
  for (long long j = 0; j < in.k; ++j)
    all_fail *= static_cast<double>(in.n - in.c - j) / static_cast<double>(in.n - j);
  return 1.0 - all_fail;
}

double quantile_sorted(std::span<const double> sorted, double q)
{
  if (sorted.empty()) throw MetricsError("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Interval bootstrap_ci(std::span<const double> samples, Rng& rng, std::size_t n_resamples, double level)
{
  if (samples.size() < 2) throw MetricsError("bootstrap_ci: need at least 2 samples");
  if (n_resamples == 0) throw MetricsError("bootstrap_ci: n_resamples must be positive");
  if (!(level > 0.0 && level < 1.0)) throw MetricsError("bootstrap_ci: level must lie in (0,1)");

  const auto n = samples.size();
  std::vector<double> means(n_resamples);
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += samples[static_cast<std::size_t>(uniform_index(rng, n))];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  Interval ci{quantile_sorted(means, alpha), quantile_sorted(means, 1.0 - alpha)};
  ci.lo = std::clamp(ci.lo, *min_it, *max_it);
  ci.hi = std::clamp(ci.hi, *min_it, *max_it);
  return ci;
}

Interval bootstrap_ci(std::span<const double> samples, std::size_t n_resamples, double level, std::uint64_t seed)
{
  Rng rng(seed);
  return bootstrap_ci(samples, rng, n_resamples, level);
}

}  // namespace sqlprobe
