#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace duracast::metrics {

/// Quantile by linear interpolation between closest ranks: the p-quantile of
/// n sorted values sits at 1-based rank n*p + 0.5, clamped to [1, n].
/// With this convention the median of [1,2,3,4] is 2.5 and its quartiles are
/// 1.5 and 3.5.
double quantile(std::span<const double> sorted, double p);

/// Boxplot summary; whiskers reach the most extreme points within 1.5 IQR
/// of the quartiles and everything beyond them counts as an outlier.
struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::size_t outliers = 0;
};

BoxStats box_stats(std::span<const double> values);

struct ResidualSummary {
  double mean = 0.0;
  double std = 0.0;
  BoxStats box;
};

struct EvalReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  /// Pearson correlation; empty when either vector has zero variance.
  std::optional<double> r;
  std::size_t n = 0;
  ResidualSummary residuals;
};

/// Residuals are target - prediction.
EvalReport evaluate(std::span<const double> prediction, std::span<const double> target);

struct RepeatedReport {
  EvalReport mean;
  std::vector<EvalReport> rounds;
};

/// One round: given a round seed, produce (prediction, target).
using RoundRunner =
    std::function<std::pair<std::vector<double>, std::vector<double>>(std::uint64_t seed)>;

/// Runs `rounds` rounds with seeds derived from `seed` and averages every
/// statistic; r is averaged over the rounds where it is defined.
RepeatedReport repeated_evaluation(const RoundRunner& run, std::size_t rounds, std::uint64_t seed);

/// `metric,value` lines; per-round values follow as `round<i>.<metric>`.
std::string report_csv(const EvalReport& report);
std::string report_csv(const RepeatedReport& report);

}  // namespace duracast::metrics
