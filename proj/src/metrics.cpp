#include "duracast/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "duracast/error.hpp"
#include "duracast/io.hpp"
#include "duracast/random.hpp"

namespace duracast::metrics {

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::Shape, "quantile of an empty set");
  const double n = static_cast<double>(sorted.size());
  const double rank = std::clamp(n * p + 0.5, 1.0, n);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo);
  if (lo >= sorted.size()) return sorted.back();
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

BoxStats box_stats(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats box;
  box.median = quantile(sorted, 0.5);
  box.q1 = quantile(sorted, 0.25);
  box.q3 = quantile(sorted, 0.75);
  const double iqr = box.q3 - box.q1;
  const double lo_fence = box.q1 - 1.5 * iqr;
  const double hi_fence = box.q3 + 1.5 * iqr;
  box.whisker_lo = box.q1;
  box.whisker_hi = box.q3;
  for (double v : sorted) {
    if (v < lo_fence || v > hi_fence) {
      ++box.outliers;
      continue;
    }
    box.whisker_lo = std::min(box.whisker_lo, v);
    box.whisker_hi = std::max(box.whisker_hi, v);
  }
  return box;
}

EvalReport evaluate(std::span<const double> prediction, std::span<const double> target) {
  if (prediction.size() != target.size()) {
    throw Error(ErrorCode::Shape, "prediction and target lengths differ");
  }
  if (target.empty()) throw Error(ErrorCode::Shape, "cannot evaluate zero predictions");
  const std::size_t n = target.size();
  const double nd = static_cast<double>(n);

  std::vector<double> residuals(n);
  double sq = 0.0;
  double abs = 0.0;
  double mean_p = 0.0;
  double mean_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(prediction[i]) || !std::isfinite(target[i])) {
      throw Error(ErrorCode::Domain, "non-finite value at position " + std::to_string(i));
    }
    residuals[i] = target[i] - prediction[i];
    sq += residuals[i] * residuals[i];
    abs += std::abs(residuals[i]);
    mean_p += prediction[i];
    mean_t += target[i];
  }
  mean_p /= nd;
  mean_t /= nd;

  EvalReport report;
  report.n = n;
  report.mse = sq / nd;
  report.rmse = std::sqrt(report.mse);
  report.mae = abs / nd;

  double spp = 0.0, stt = 0.0, spt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = prediction[i] - mean_p;
    const double dt = target[i] - mean_t;
    spp += dp * dp;
    stt += dt * dt;
    spt += dp * dt;
  }
  if (spp > 0.0 && stt > 0.0) {
    report.r = std::clamp(spt / std::sqrt(spp * stt), -1.0, 1.0);
  }

  double mean_r = 0.0;
  for (double e : residuals) mean_r += e;
  mean_r /= nd;
  double var_r = 0.0;
  for (double e : residuals) var_r += (e - mean_r) * (e - mean_r);
  report.residuals.mean = mean_r;
  report.residuals.std = n > 1 ? std::sqrt(var_r / (nd - 1.0)) : 0.0;
  report.residuals.box = box_stats(residuals);
  return report;
}

RepeatedReport repeated_evaluation(const RoundRunner& run, std::size_t rounds, std::uint64_t seed) {
  if (rounds < 1) throw Error(ErrorCode::InvalidArgument, "need at least one round");
  RepeatedReport out;
  for (std::size_t i = 0; i < rounds; ++i) {
    auto [prediction, target] = run(derive_seed(seed, i));
    out.rounds.push_back(evaluate(prediction, target));
  }
  const double k = static_cast<double>(rounds);
  auto& m = out.mean;
  double r_sum = 0.0;
  std::size_t r_count = 0;
  for (const auto& rep : out.rounds) {
    m.mse += rep.mse / k;
    m.rmse += rep.rmse / k;
    m.mae += rep.mae / k;
    m.n += rep.n;
    m.residuals.mean += rep.residuals.mean / k;
    m.residuals.std += rep.residuals.std / k;
    m.residuals.box.median += rep.residuals.box.median / k;
    m.residuals.box.q1 += rep.residuals.box.q1 / k;
    m.residuals.box.q3 += rep.residuals.box.q3 / k;
    m.residuals.box.whisker_lo += rep.residuals.box.whisker_lo / k;
    m.residuals.box.whisker_hi += rep.residuals.box.whisker_hi / k;
    m.residuals.box.outliers += rep.residuals.box.outliers;
    if (rep.r) {
      r_sum += *rep.r;
      ++r_count;
    }
  }
  m.n = out.rounds.front().n;
  m.residuals.box.outliers = static_cast<std::size_t>(
      std::llround(static_cast<double>(m.residuals.box.outliers) / k));
  if (r_count > 0) m.r = r_sum / static_cast<double>(r_count);
  return out;
}

namespace {

void append_rows(std::string& out, const std::string& prefix, const EvalReport& rep) {
  auto line = [&](const char* name, double v) {
    out += prefix;
    out += name;
    out += ',';
    out += format_double(v);
    out += '\n';
  };
  line("n", static_cast<double>(rep.n));
  line("mse", rep.mse);
  line("rmse", rep.rmse);
  line("mae", rep.mae);
  out += prefix + "r," + (rep.r ? format_double(*rep.r) : std::string("undefined")) + "\n";
  line("resid_mean", rep.residuals.mean);
  line("resid_std", rep.residuals.std);
  line("resid_median", rep.residuals.box.median);
  line("resid_q1", rep.residuals.box.q1);
  line("resid_q3", rep.residuals.box.q3);
  line("resid_whisker_lo", rep.residuals.box.whisker_lo);
  line("resid_whisker_hi", rep.residuals.box.whisker_hi);
  line("resid_outliers", static_cast<double>(rep.residuals.box.outliers));
}

}  // namespace

std::string report_csv(const EvalReport& report) {
  std::string out = "metric,value\n";
  append_rows(out, "", report);
  return out;
}

std::string report_csv(const RepeatedReport& report) {
  std::string out = "metric,value\n";
  append_rows(out, "", report.mean);
  for (std::size_t i = 0; i < report.rounds.size(); ++i) {
    append_rows(out, "round" + std::to_string(i + 1) + ".", report.rounds[i]);
  }
  return out;
}

}  // namespace duracast::metrics
