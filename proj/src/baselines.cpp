#include "duracast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "duracast/error.hpp"
#include "duracast/io.hpp"

namespace duracast::baselines {

double carbonation_sqrt(double k, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::Domain, "carbonation time must be non-negative");
  if (!(k >= 0.0)) throw Error(ErrorCode::Domain, "carbonation coefficient must be non-negative");
  return k * std::sqrt(t);
}

double fit_k(double depth, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::Domain, "cannot fit a carbonation coefficient at t <= 0");
  return depth / std::sqrt(t);
}

double carbonation_fib(const FibCarbonationParams& p, double t, FibForm form) {
  if (!(t >= 0.0)) throw Error(ErrorCode::Domain, "carbonation time must be non-negative");
  if (!(p.ke >= 0.0 && p.kc >= 0.0 && p.r_inv >= 0.0 && p.ca >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "carbonation parameters must be non-negative");
  }
  const double w = p.w ? p.w(t) : 1.0;
  if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weather function must be non-negative");
  const double base = 2.0 * p.ke * p.kc * p.r_inv * p.ca;
  if (form == FibForm::Nested) return std::sqrt(base * w * std::sqrt(t));
  return std::sqrt(base) * w * std::sqrt(t);
}

double erf_approx(double x) {
  constexpr double p = 0.3275911;
  constexpr double a1 = 0.254829592;
  constexpr double a2 = -0.284496736;
  constexpr double a3 = 1.421413741;
  constexpr double a4 = -1.453152027;
  constexpr double a5 = 1.061405429;
  const double ax = std::fabs(x);
  const double s = 1.0 / (1.0 + p * ax);
  const double poly = ((((a5 * s + a4) * s + a3) * s + a2) * s + a1) * s;
  const double y = 1.0 - poly * std::exp(-ax * ax);
  return x < 0.0 ? -y : y;
}

double chloride_erf(const ChlorideErfParams& p, Length x, Duration t) {
  if (x.unit != p.length_unit) {
    throw Error(ErrorCode::UnitMismatch, "depth unit does not match the diffusion coefficient");
  }
  if (t.unit != p.time_unit) {
    throw Error(ErrorCode::UnitMismatch, "time unit does not match the diffusion coefficient");
  }
  if (!(p.cs >= p.ci && p.ci >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "chloride contents need Cs >= Ci >= 0");
  }
  if (!(p.dnss > 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusion coefficient must be positive");
  if (!(t.value > 0.0)) throw Error(ErrorCode::Domain, "chloride profile needs t > 0");
  if (!(x.value >= 0.0)) throw Error(ErrorCode::Domain, "depth must be non-negative");
  const double arg = x.value / (2.0 * std::sqrt(p.dnss * t.value));
  return p.ci + (p.cs - p.ci) * (1.0 - erf_approx(arg));
}

double dnss_at(const DnssAgingParams& p, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::Domain, "age must be positive");
  if (!(p.d0 > 0.0) || !(p.t0 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "D0 and t0 must be positive");
  }
  return p.ke * p.kt * p.kc * p.d0 * std::pow(p.t0 / t, p.n);
}

// ---------------------------------------------------------------------------

std::string Comparison::to_csv() const {
  std::string out = "model,age,mse,mae,rmse,median_resid,q1,q3\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += csv_field(row.model) + "," + csv_field(row.age) + "," + format_double(r.mse) + "," +
           format_double(r.mae) + "," + format_double(r.rmse) + "," +
           format_double(r.residuals.box.median) + "," + format_double(r.residuals.box.q1) + "," +
           format_double(r.residuals.box.q3) + "\n";
  }
  return out;
}

const ComparisonRow& Comparison::find(const std::string& model, const std::string& age) const {
  for (const auto& row : rows) {
    if (row.model == model && row.age == age) return row;
  }
  throw Error(ErrorCode::InvalidArgument, "no comparison row for " + model + " at " + age);
}

Comparison baseline_comparison(std::span<const CarbonationObservation> observations,
                               std::optional<double> fit_age, const std::string& model_label) {
  if (model_label == "baseline") {
    throw Error(ErrorCode::InvalidArgument, "model label 'baseline' is reserved");
  }
  std::map<std::string, std::vector<const CarbonationObservation*>> by_specimen;
  for (const auto& obs : observations) by_specimen[obs.specimen].push_back(&obs);

  Comparison out;
  // Per evaluation age: (baseline predictions, model predictions, targets).
  struct Bucket {
    std::vector<double> baseline, model, target;
  };
  std::map<double, Bucket> by_age;
  Bucket overall;

  for (const auto& [specimen, list] : by_specimen) {
    const CarbonationObservation* anchor = nullptr;
    if (fit_age) {
      for (const auto* o : list) {
        if (o->age == *fit_age) anchor = o;
      }
    } else {
      for (const auto* o : list) {
        if (!anchor || o->age < anchor->age) anchor = o;
      }
    }
    if (!anchor) {
      out.warnings.push_back("specimen " + specimen + " has no measurement at the fit age; skipped");
      continue;
    }
    if (!(anchor->age > 0.0)) {
      out.warnings.push_back("specimen " + specimen + " has a non-positive fit age; skipped");
      continue;
    }
    const double k = fit_k(anchor->depth, anchor->age);
    for (const auto* o : list) {
      if (!(o->age > anchor->age)) continue;
      const double base = carbonation_sqrt(std::max(k, 0.0), o->age);
      for (Bucket* b : {&by_age[o->age], &overall}) {
        b->baseline.push_back(base);
        b->model.push_back(o->model_prediction);
        b->target.push_back(o->depth);
      }
    }
  }
  if (overall.target.empty()) {
    throw Error(ErrorCode::EmptySelection, "no measurements after the fit age to compare");
  }

  auto emit = [&](const std::string& age, const Bucket& b) {
    out.rows.push_back({"baseline", age, metrics::evaluate(b.baseline, b.target)});
    out.rows.push_back({model_label, age, metrics::evaluate(b.model, b.target)});
  };
  for (const auto& [age, bucket] : by_age) emit(format_double(age), bucket);
  emit("all", overall);
  return out;
}

}  // namespace duracast::baselines
