#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "duracast/data.hpp"
#include "duracast/neural.hpp"

namespace duracast::neural {

/// Open-loop training rows. For every n in [q-1, L-2] (0-based) the features
/// are [u(n), ..., u(n-q+1), y(n), ..., y(n-q+1)] and the target is y(n+1),
/// giving L - q rows. `time` holds n + 1, the index of each target.
struct NarxSamples {
  Samples samples;
  std::vector<std::size_t> time;
};

/// Throws InsufficientHistory when the series are no longer than q, Shape
/// when they differ in length.
NarxSamples narx_prepare(std::span<const double> u, std::span<const double> y, std::size_t q);

enum class NarxMode { OpenLoop, ClosedLoop };

/// Network with 2q inputs plus the min-max scaling applied to u and y.
class NarxModel {
 public:
  NarxModel() = default;
  NarxModel(std::size_t delays, MlpNetwork net, data::Range u_range, data::Range y_range);

  std::size_t delays() const noexcept { return delays_; }
  const MlpNetwork& network() const noexcept { return net_; }
  const data::Range& u_range() const noexcept { return u_range_; }
  const data::Range& y_range() const noexcept { return y_range_; }

  /// One-step prediction of y(n+1) from raw-unit delay lines, newest first.
  double step(std::span<const double> u_delays, std::span<const double> y_delays) const;

  std::string to_text() const;
  static NarxModel read(std::istream& in);
  static NarxModel parse(const std::string& text);

 private:
  std::size_t delays_ = 0;
  MlpNetwork net_;
  data::Range u_range_;
  data::Range y_range_;
};

/// Predicts y(origin + 1), ..., y(origin + horizon). Delay lines start from
/// the measured y up to `origin`. OpenLoop keeps feeding measured y (so `y`
/// must cover origin + horizon - 1); ClosedLoop feeds predictions back.
/// `u` must cover origin + horizon - 1.
std::vector<double> narx_predict(const NarxModel& model, std::span<const double> u,
                                 std::span<const double> y, std::size_t origin,
                                 std::size_t horizon, NarxMode mode);

struct NarxOptions {
  std::size_t delays = 2;
  std::size_t hidden = 10;
  Activation activation = Activation::tanh();
  /// Train / validation / test shares of the supervised rows, drawn at random.
  std::array<double, 3> split = {0.75, 0.15, 0.10};
  LmOptions lm;
  /// Map u and y to [-1, 1] using the training rows.
  bool normalize = true;
  std::uint64_t seed = 0;
  /// Independent initializations; the one with the lowest closed-loop
  /// simulation error over the training series is kept.
  std::size_t restarts = 5;
};

struct NarxFit {
  NarxModel model;
  TrainResult training;
  data::Holdout partition;  ///< indices into the supervised rows
};

NarxFit train_narx(std::span<const double> u, std::span<const double> y, const NarxOptions& options);

}  // namespace duracast::neural
