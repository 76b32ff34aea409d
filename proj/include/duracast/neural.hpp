#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace duracast::neural {

enum class ActivationKind { Linear, Logistic, Tanh };

struct Activation {
  ActivationKind kind = ActivationKind::Tanh;
  /// Slope of the logistic function; unused otherwise.
  double slope = 1.0;

  double operator()(double v) const;
  /// Derivative expressed through the activation output.
  double derivative(double output) const;

  static Activation linear() { return {ActivationKind::Linear, 1.0}; }
  static Activation tanh() { return {ActivationKind::Tanh, 1.0}; }
  static Activation logistic(double a = 1.0) { return {ActivationKind::Logistic, a}; }
};

bool operator==(const Activation& a, const Activation& b);

/// Fully connected feedforward network. Layer l maps sizes[l] inputs to
/// sizes[l+1] outputs through weights(l) (out x in) and bias(l). The output
/// layer is always linear.
class MlpNetwork {
 public:
  MlpNetwork() = default;
  /// Zero weights. `hidden` applies to every hidden layer.
  MlpNetwork(std::vector<std::size_t> sizes, Activation hidden);
  MlpNetwork(std::vector<std::size_t> sizes, std::vector<Activation> activations);

  /// Uniform weights in +-1/sqrt(fan_in), zero biases.
  static MlpNetwork initialized(std::vector<std::size_t> sizes, Activation hidden,
                                std::uint64_t seed);

  std::size_t inputs() const { return sizes_.front(); }
  std::size_t outputs() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  const Activation& activation(std::size_t layer) const { return activations_.at(layer); }

  Eigen::MatrixXd& weights(std::size_t layer) { return weights_.at(layer); }
  const Eigen::MatrixXd& weights(std::size_t layer) const { return weights_.at(layer); }
  Eigen::VectorXd& bias(std::size_t layer) { return biases_.at(layer); }
  const Eigen::VectorXd& bias(std::size_t layer) const { return biases_.at(layer); }

  /// Throws Shape when |x| differs from the input size.
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  double forward_scalar(std::span<const double> x) const;
  /// One sample per row.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

  /// Layer by layer: weights in row-major order, then biases.
  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& p);

  std::string to_text() const;
  static MlpNetwork read(std::istream& in);
  static MlpNetwork parse(const std::string& text);

  friend bool operator==(const MlpNetwork&, const MlpNetwork&);

 private:
  void check() const;

  std::vector<std::size_t> sizes_;
  std::vector<Activation> activations_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Supervised samples, one per row.
struct Samples {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  bool empty() const { return x.rows() == 0; }
};

/// Prediction minus target, stacked sample by sample.
Eigen::VectorXd residuals(const MlpNetwork& net, const Samples& s);
double sse(const MlpNetwork& net, const Samples& s);
double mse(const MlpNetwork& net, const Samples& s);

/// Derivatives of every network output for every sample with respect to
/// every parameter: (N * outputs) x parameter_count, rows ordered as in
/// `residuals`.
Eigen::MatrixXd jacobian(const MlpNetwork& net, const Samples& s);

/// How a configured learning rate enters the LM iteration.
enum class LearningRateRole {
  Ignored,         ///< recorded only; the update uses mu alone
  InitialDamping,  ///< used as mu_0
  StepScale,       ///< multiplies every trial step
};

struct LmOptions {
  double mu = 1e-3;
  double mu_increase = 10.0;
  double mu_decrease = 10.0;
  double mu_max = 1e10;
  std::size_t max_epochs = 1000;
  /// Epochs without a new validation minimum before stopping.
  std::size_t patience = 6;
  double min_gradient = 1e-10;
  /// Stop once the training MSE reaches this value.
  double goal = 0.0;
  std::optional<double> learning_rate;
  LearningRateRole learning_rate_role = LearningRateRole::Ignored;
};

enum class StopReason { MaxEpochs, ValidationPatience, MuLimit, MinGradient, Goal };

std::string stop_reason_name(StopReason r);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  /// NaN when no validation set was given.
  double validation_mse = 0.0;
  double mu = 0.0;
};

struct TrainResult {
  MlpNetwork network;
  /// Entry 0 holds the initial weights.
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  StopReason reason = StopReason::MaxEpochs;
};

/// Solves (J'J + mu I) delta = -J'e at the current weights. Throws
/// TrainingFailure when the system cannot be factorized.
Eigen::VectorXd lm_step(const MlpNetwork& net, const Samples& s, double mu);

/// Levenberg-Marquardt with validation early stopping. Returns the weights
/// of the epoch with the lowest validation MSE (training MSE when the
/// validation set is empty).
TrainResult train_lm(MlpNetwork net, const Samples& train, const Samples& validation,
                     const LmOptions& options);

struct EarlyStoppingCurve {
  std::size_t best_epoch = 0;
  std::vector<double> train;
  std::vector<double> validation;
};

EarlyStoppingCurve early_stopping_curve(const std::vector<EpochRecord>& history);

struct HiddenSweepPoint {
  std::size_t hidden = 0;
  double validation_mse = 0.0;
  std::size_t best_epoch = 0;
};

struct HiddenSweep {
  std::vector<HiddenSweepPoint> points;
  std::size_t best_hidden = 0;
};

/// Trains one single-hidden-layer network per candidate size and keeps the
/// lowest validation MSE (first candidate wins ties).
HiddenSweep sweep_hidden_sizes(const Samples& train, const Samples& validation,
                               std::span<const std::size_t> hidden_sizes, Activation hidden,
                               const LmOptions& options, std::uint64_t seed);

}  // namespace duracast::neural
