#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duracast/metrics.hpp"

namespace duracast::baselines {

/// Square-root-of-time carbonation: depth = k * sqrt(t). Throws Domain for
/// t < 0.
double carbonation_sqrt(double k, double t);
/// k = depth / sqrt(t). Throws Domain unless t > 0.
double fit_k(double depth, double t);

enum class FibForm {
  /// sqrt(2 ke kc R Ca) * W(t) * sqrt(t)
  Standard,
  /// sqrt(2 ke kc R Ca * W(t) * sqrt(t)), the nested variant
  Nested,
};

struct FibCarbonationParams {
  double ke = 1.0;
  double kc = 1.0;
  /// Inverse carbonation resistance, (mm^2/year)/(kg/m^3).
  double r_inv = 0.0;
  /// CO2 concentration, kg/m^3.
  double ca = 0.0;
  /// Weather function; constant 1 when empty.
  std::function<double(double)> w;
};

/// Depth in mm at t years.
double carbonation_fib(const FibCarbonationParams& p, double t, FibForm form = FibForm::Standard);

/// Abramowitz and Stegun 7.1.26: erf(x) = 1 - (a1 s + ... + a5 s^5) exp(-x^2)
/// with s = 1 / (1 + 0.3275911 x), mirrored for x < 0. Absolute error is
/// below 1.5e-7 everywhere.
double erf_approx(double x);

enum class LengthUnit { Meter, Millimeter };
enum class TimeUnit { Second, Year };

struct ChlorideErfParams {
  double cs = 0.0;  ///< surface content, % by mass
  double ci = 0.0;  ///< initial content, % by mass
  double dnss = 0.0;
  /// Units of dnss (length^2 / time); depth and time arguments must match.
  LengthUnit length_unit = LengthUnit::Meter;
  TimeUnit time_unit = TimeUnit::Second;
};

struct Length {
  double value = 0.0;
  LengthUnit unit = LengthUnit::Meter;
};

struct Duration {
  double value = 0.0;
  TimeUnit unit = TimeUnit::Second;
};

/// C(x, t) = Ci + (Cs - Ci) (1 - erf(x / (2 sqrt(D t)))). Throws UnitMismatch
/// when x or t is tagged differently from D, Domain for t <= 0 or x < 0 and
/// InvalidArgument unless Cs >= Ci >= 0 and D > 0.
double chloride_erf(const ChlorideErfParams& p, Length x, Duration t);

struct DnssAgingParams {
  double ke = 1.0;
  double kt = 1.0;
  double kc = 1.0;
  double d0 = 0.0;  ///< m^2/s
  double t0 = 0.0;  ///< years
  double n = 0.0;   ///< age factor
};

/// D(t) = ke kt kc D0 (t0 / t)^n. Throws Domain for t <= 0.
double dnss_at(const DnssAgingParams& p, double t);

// ---------------------------------------------------------------------------

/// One measured depth with the data-driven model's prediction for it.
struct CarbonationObservation {
  std::string specimen;
  double age = 0.0;
  double depth = 0.0;
  double model_prediction = 0.0;
};

struct ComparisonRow {
  std::string model;  ///< "baseline" or the model label
  std::string age;    ///< evaluation age, or "all"
  metrics::EvalReport report;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> warnings;

  /// `model,age,mse,mae,rmse,median_resid,q1,q3`.
  std::string to_csv() const;
  const ComparisonRow& find(const std::string& model, const std::string& age) const;
};

/// Fits k per specimen at `fit_age` (the specimen's earliest age when
/// empty), predicts every later measurement with depth = k sqrt(t) and
/// evaluates baseline and model on the same rows, per age and overall.
/// Specimens without a measurement at the fit age are skipped with a
/// warning.
Comparison baseline_comparison(std::span<const CarbonationObservation> observations,
                               std::optional<double> fit_age = std::nullopt,
                               const std::string& model_label = "model");

}  // namespace duracast::baselines
