#include "duracast/narx.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include "duracast/error.hpp"
#include "duracast/io.hpp"
#include "duracast/random.hpp"

namespace duracast::neural {

namespace {

void expect(std::istream& in, const char* keyword) {
  std::string token;
  if (!(in >> token) || token != keyword) {
    throw Error(ErrorCode::Parse, std::string("expected '") + keyword + "', got '" + token + "'");
  }
}

data::Range read_range(std::istream& in) {
  std::string lo, hi;
  data::Range r;
  if (!(in >> lo >> hi) || !parse_double(lo, r.min) || !parse_double(hi, r.max)) {
    throw Error(ErrorCode::Parse, "bad range in NARX text");
  }
  return r;
}

data::Range span_range(const Eigen::MatrixXd& m, std::span<const std::size_t> rows,
                       Eigen::Index first_col, Eigen::Index cols) {
  data::Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (auto i : rows) {
    for (Eigen::Index c = first_col; c < first_col + cols; ++c) {
      r.min = std::min(r.min, m(static_cast<Eigen::Index>(i), c));
      r.max = std::max(r.max, m(static_cast<Eigen::Index>(i), c));
    }
  }
  return r;
}

data::Range merge(const data::Range& a, const data::Range& b) {
  return {std::min(a.min, b.min), std::max(a.max, b.max)};
}

Samples select(const Samples& s, std::span<const std::size_t> rows) {
  Samples out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), s.x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()), s.y.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = s.x.row(static_cast<Eigen::Index>(rows[k]));
    out.y.row(static_cast<Eigen::Index>(k)) = s.y.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::MissingValue, std::string(what) + " series contains missing values");
    }
  }
}

}  // namespace

NarxSamples narx_prepare(std::span<const double> u, std::span<const double> y, std::size_t q) {
  if (q < 1) throw Error(ErrorCode::InvalidArgument, "delay order must be at least 1");
  if (u.size() != y.size()) throw Error(ErrorCode::Shape, "u and y must have equal length");
  if (y.size() <= q) {
    throw Error(ErrorCode::InsufficientHistory, "series of length " + std::to_string(y.size()) +
                                                    " is too short for " + std::to_string(q) +
                                                    " delays");
  }
  const auto rows = static_cast<Eigen::Index>(y.size() - q);
  const auto cols = static_cast<Eigen::Index>(2 * q);
  NarxSamples out;
  out.samples.x.resize(rows, cols);
  out.samples.y.resize(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t n = static_cast<std::size_t>(r) + q - 1;
    for (std::size_t d = 0; d < q; ++d) {
      out.samples.x(r, static_cast<Eigen::Index>(d)) = u[n - d];
      out.samples.x(r, static_cast<Eigen::Index>(q + d)) = y[n - d];
    }
    out.samples.y(r, 0) = y[n + 1];
    out.time.push_back(n + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------

NarxModel::NarxModel(std::size_t delays, MlpNetwork net, data::Range u_range, data::Range y_range)
    : delays_(delays), net_(std::move(net)), u_range_(u_range), y_range_(y_range) {
  if (delays_ < 1) throw Error(ErrorCode::InvalidArgument, "delay order must be at least 1");
  if (net_.inputs() != 2 * delays_ || net_.outputs() != 1) {
    throw Error(ErrorCode::Shape, "NARX network needs 2q inputs and one output");
  }
}

double NarxModel::step(std::span<const double> u_delays, std::span<const double> y_delays) const {
  if (u_delays.size() != delays_ || y_delays.size() != delays_) {
    throw Error(ErrorCode::Shape, "delay lines must hold " + std::to_string(delays_) + " values");
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(2 * delays_));
  for (std::size_t d = 0; d < delays_; ++d) {
    x[static_cast<Eigen::Index>(d)] = data::normalize_value(u_delays[d], u_range_);
    x[static_cast<Eigen::Index>(delays_ + d)] = data::normalize_value(y_delays[d], y_range_);
  }
  return data::denormalize_value(net_.forward(x)[0], y_range_);
}

std::string NarxModel::to_text() const {
  std::string out = "narx 1\ndelays " + std::to_string(delays_) + "\n";
  out += "u_range " + format_double(u_range_.min) + " " + format_double(u_range_.max) + "\n";
  out += "y_range " + format_double(y_range_.min) + " " + format_double(y_range_.max) + "\n";
  out += net_.to_text();
  out += "end\n";
  return out;
}

NarxModel NarxModel::read(std::istream& in) {
  expect(in, "narx");
  std::size_t version = 0, q = 0;
  if (!(in >> version) || version != 1) throw Error(ErrorCode::Parse, "unsupported NARX version");
  expect(in, "delays");
  if (!(in >> q)) throw Error(ErrorCode::Parse, "bad delay order");
  expect(in, "u_range");
  const auto u = read_range(in);
  expect(in, "y_range");
  const auto y = read_range(in);
  auto net = MlpNetwork::read(in);
  expect(in, "end");
  return NarxModel(q, std::move(net), u, y);
}

NarxModel NarxModel::parse(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

std::vector<double> narx_predict(const NarxModel& model, std::span<const double> u,
                                 std::span<const double> y, std::size_t origin,
                                 std::size_t horizon, NarxMode mode) {
  const std::size_t q = model.delays();
  if (origin + 1 < q || y.size() <= origin) {
    throw Error(ErrorCode::InsufficientHistory,
                "need " + std::to_string(q) + " measured outputs up to the forecast origin");
  }
  if (horizon == 0) return {};
  const std::size_t last = origin + horizon - 1;
  if (u.size() <= last) {
    throw Error(ErrorCode::InsufficientHistory, "exogenous series does not cover the horizon");
  }
  if (mode == NarxMode::OpenLoop && y.size() <= last) {
    throw Error(ErrorCode::InsufficientHistory, "open-loop prediction needs measured outputs");
  }

  // history[i] is the output used for time i; predictions overwrite it in
  // closed loop once i passes the origin.
  std::vector<double> history(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(origin + 1));
  std::vector<double> out;
  out.reserve(horizon);
  std::vector<double> ud(q), yd(q);
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::size_t n = origin + k;
    for (std::size_t d = 0; d < q; ++d) {
      ud[d] = u[n - d];
      yd[d] = mode == NarxMode::OpenLoop ? y[n - d] : history[n - d];
    }
    const double next = model.step(ud, yd);
    out.push_back(next);
    history.push_back(next);
  }
  return out;
}

NarxFit train_narx(std::span<const double> u, std::span<const double> y, const NarxOptions& options) {
  check_finite(u, "exogenous");
  check_finite(y, "target");
  const auto prepared = narx_prepare(u, y, options.delays);
  const auto& all = prepared.samples;
  NarxFit fit;
  fit.partition = data::split_holdout(all.rows(), options.split, derive_seed(options.seed, 0));

  const auto q = static_cast<Eigen::Index>(options.delays);
  data::Range u_range, y_range;
  if (options.normalize) {
    u_range = span_range(all.x, fit.partition.train, 0, q);
    y_range = merge(span_range(all.x, fit.partition.train, q, q),
                    span_range(all.y, fit.partition.train, 0, 1));
  }
  auto scale = [&](Samples s) {
    for (Eigen::Index r = 0; r < s.x.rows(); ++r) {
      for (Eigen::Index c = 0; c < q; ++c) {
        s.x(r, c) = data::normalize_value(s.x(r, c), u_range);
        s.x(r, q + c) = data::normalize_value(s.x(r, q + c), y_range);
      }
      s.y(r, 0) = data::normalize_value(s.y(r, 0), y_range);
    }
    return s;
  };
  const Samples train = scale(select(all, fit.partition.train));
  const Samples validation = scale(select(all, fit.partition.validation));

  if (options.restarts == 0) throw Error(ErrorCode::InvalidArgument, "restarts must be at least 1");
  // Open-loop data cannot pin down how the network reacts off the data
  // manifold, so an initialization can leave the fed-back loop unstable.
  // Each restart is scored by free-run simulation over the whole series.
  const std::size_t origin = options.delays - 1;
  const std::size_t horizon = y.size() - options.delays;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < options.restarts; ++r) {
    auto net = MlpNetwork::initialized({2 * options.delays, options.hidden, 1}, options.activation,
                                       derive_seed(options.seed, 1 + r));
    auto training = train_lm(std::move(net), train, validation, options.lm);
    NarxModel model(options.delays, training.network, u_range, y_range);
    double score = 0.0;
    if (options.restarts > 1) {
      const auto sim = narx_predict(model, u, y, origin, horizon, NarxMode::ClosedLoop);
      for (std::size_t k = 0; k < horizon; ++k) {
        const double e = sim[k] - y[origin + 1 + k];
        score += e * e;
      }
      if (!std::isfinite(score)) score = std::numeric_limits<double>::max();
    }
    if (r == 0 || score < best_score) {
      best_score = score;
      fit.training = std::move(training);
      fit.model = std::move(model);
    }
  }
  return fit;
}

}  // namespace duracast::neural
