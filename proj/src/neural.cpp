#include "duracast/neural.hpp"

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

constexpr double kMuFloor = 1e-20;

std::string activation_text(const Activation& a) {
  switch (a.kind) {
    case ActivationKind::Linear:
      return "linear";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Logistic:
      return "logistic " + format_double(a.slope);
  }
  return "linear";
}

void expect(std::istream& in, const char* keyword) {
  std::string token;
  if (!(in >> token) || token != keyword) {
    throw Error(ErrorCode::Parse, std::string("expected '") + keyword + "', got '" + token + "'");
  }
}

double read_double(std::istream& in) {
  std::string token;
  double v = 0;
  if (!(in >> token) || !parse_double(token, v)) {
    throw Error(ErrorCode::Parse, "bad number '" + token + "' in network text");
  }
  return v;
}

std::size_t read_size(std::istream& in) {
  std::size_t v = 0;
  if (!(in >> v)) throw Error(ErrorCode::Parse, "bad count in network text");
  return v;
}

// Outputs of every layer for one sample; acts[0] is the input.
std::vector<Eigen::VectorXd> forward_all(const MlpNetwork& net, const Eigen::VectorXd& x) {
  std::vector<Eigen::VectorXd> acts;
  acts.reserve(net.layer_count() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Eigen::VectorXd z = net.weights(l) * acts.back() + net.bias(l);
    const auto& act = net.activation(l);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = act(z[i]);
    acts.push_back(std::move(z));
  }
  return acts;
}

void check_samples(const MlpNetwork& net, const Samples& s) {
  if (static_cast<std::size_t>(s.x.cols()) != net.inputs() ||
      static_cast<std::size_t>(s.y.cols()) != net.outputs() || s.x.rows() != s.y.rows()) {
    throw Error(ErrorCode::Shape, "samples do not match the network shape");
  }
}

double mse_or_nan(const MlpNetwork& net, const Samples& s) {
  return s.empty() ? std::numeric_limits<double>::quiet_NaN() : mse(net, s);
}

}  // namespace

double Activation::operator()(double v) const {
  switch (kind) {
    case ActivationKind::Linear:
      return v;
    case ActivationKind::Tanh:
      return std::tanh(v);
    case ActivationKind::Logistic:
      return 1.0 / (1.0 + std::exp(-slope * v));
  }
  return v;
}

double Activation::derivative(double output) const {
  switch (kind) {
    case ActivationKind::Linear:
      return 1.0;
    case ActivationKind::Tanh:
      return 1.0 - output * output;
    case ActivationKind::Logistic:
      return slope * output * (1.0 - output);
  }
  return 1.0;
}

bool operator==(const Activation& a, const Activation& b) {
  if (a.kind != b.kind) return false;
  return a.kind != ActivationKind::Logistic || a.slope == b.slope;
}

// ---------------------------------------------------------------------------

MlpNetwork::MlpNetwork(std::vector<std::size_t> sizes, Activation hidden)
    : MlpNetwork(sizes, [&] {
        std::vector<Activation> acts(sizes.size() < 2 ? 0 : sizes.size() - 1, hidden);
        if (!acts.empty()) acts.back() = Activation::linear();
        return acts;
      }()) {}

MlpNetwork::MlpNetwork(std::vector<std::size_t> sizes, std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2) throw Error(ErrorCode::InvalidArgument, "a network needs input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sizes_[l + 1]),
                                             static_cast<Eigen::Index>(sizes_[l])));
    biases_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sizes_[l + 1])));
  }
  check();
}

void MlpNetwork::check() const {
  for (auto s : sizes_) {
    if (s == 0) throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
  }
  if (activations_.size() != sizes_.size() - 1) {
    throw Error(ErrorCode::InvalidArgument, "need one activation per layer");
  }
  if (activations_.back().kind != ActivationKind::Linear) {
    throw Error(ErrorCode::InvalidArgument, "the output layer must be linear");
  }
  for (const auto& a : activations_) {
    if (a.kind == ActivationKind::Logistic && !(a.slope > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "logistic slope must be positive");
    }
  }
}

MlpNetwork MlpNetwork::initialized(std::vector<std::size_t> sizes, Activation hidden,
                                   std::uint64_t seed) {
  MlpNetwork net(std::move(sizes), hidden);
  Rng rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    auto& w = net.weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    }
  }
  return net;
}

Eigen::VectorXd MlpNetwork::forward(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != inputs()) {
    throw Error(ErrorCode::Shape, "expected " + std::to_string(inputs()) + " inputs, got " +
                                      std::to_string(x.size()));
  }
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * a + biases_[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = activations_[l](z[i]);
    a = std::move(z);
  }
  return a;
}

double MlpNetwork::forward_scalar(std::span<const double> x) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
  return forward(v)[0];
}

Eigen::MatrixXd MlpNetwork::forward_batch(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != inputs()) {
    throw Error(ErrorCode::Shape, "expected " + std::to_string(inputs()) + " input columns");
  }
  Eigen::MatrixXd a = x.transpose();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
    a = z.unaryExpr([&](double v) { return activations_[l](v); });
  }
  return a.transpose();
}

std::size_t MlpNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Eigen::VectorXd MlpNetwork::parameters() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) p[k++] = w(r, c);
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) p[k++] = biases_[l][r];
  }
  return p;
}

void MlpNetwork::set_parameters(const Eigen::VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != parameter_count()) {
    throw Error(ErrorCode::Shape, "parameter vector has the wrong length");
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = p[k++];
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l][r] = p[k++];
  }
}

std::string MlpNetwork::to_text() const {
  std::string out = "mlp 1\nlayers " + std::to_string(sizes_.size());
  for (auto s : sizes_) out += " " + std::to_string(s);
  out += "\n";
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out += "activation " + std::to_string(l) + " " + activation_text(activations_[l]) + "\n";
    out += "weights " + std::to_string(l);
    const auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out += " " + format_double(w(r, c));
    }
    out += "\nbias " + std::to_string(l);
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) out += " " + format_double(biases_[l][r]);
    out += "\n";
  }
  out += "end\n";
  return out;
}

MlpNetwork MlpNetwork::read(std::istream& in) {
  expect(in, "mlp");
  if (read_size(in) != 1) throw Error(ErrorCode::Parse, "unsupported network version");
  expect(in, "layers");
  std::vector<std::size_t> sizes(read_size(in));
  if (sizes.size() < 2) throw Error(ErrorCode::Parse, "network needs at least two layer sizes");
  for (auto& s : sizes) s = read_size(in);

  std::vector<Activation> acts(sizes.size() - 1);
  std::vector<Eigen::VectorXd> params;
  for (std::size_t l = 0; l < acts.size(); ++l) {
    expect(in, "activation");
    if (read_size(in) != l) throw Error(ErrorCode::Parse, "layers out of order");
    std::string kind;
    in >> kind;
    if (kind == "linear") {
      acts[l] = Activation::linear();
    } else if (kind == "tanh") {
      acts[l] = Activation::tanh();
    } else if (kind == "logistic") {
      acts[l] = Activation::logistic(read_double(in));
    } else {
      throw Error(ErrorCode::Parse, "unknown activation '" + kind + "'");
    }
    expect(in, "weights");
    if (read_size(in) != l) throw Error(ErrorCode::Parse, "layers out of order");
    Eigen::VectorXd block(static_cast<Eigen::Index>(sizes[l] * sizes[l + 1] + sizes[l + 1]));
    const auto nw = static_cast<Eigen::Index>(sizes[l] * sizes[l + 1]);
    for (Eigen::Index k = 0; k < nw; ++k) block[k] = read_double(in);
    expect(in, "bias");
    if (read_size(in) != l) throw Error(ErrorCode::Parse, "layers out of order");
    for (Eigen::Index k = nw; k < block.size(); ++k) block[k] = read_double(in);
    params.push_back(std::move(block));
  }
  expect(in, "end");

  MlpNetwork net(std::move(sizes), std::move(acts));
  Eigen::VectorXd all(static_cast<Eigen::Index>(net.parameter_count()));
  Eigen::Index k = 0;
  for (const auto& b : params) {
    all.segment(k, b.size()) = b;
    k += b.size();
  }
  net.set_parameters(all);
  return net;
}

MlpNetwork MlpNetwork::parse(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

bool operator==(const MlpNetwork& a, const MlpNetwork& b) {
  return a.sizes_ == b.sizes_ && a.activations_ == b.activations_ && a.weights_ == b.weights_ &&
         a.biases_ == b.biases_;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd residuals(const MlpNetwork& net, const Samples& s) {
  check_samples(net, s);
  const Eigen::MatrixXd diff = net.forward_batch(s.x) - s.y;
  // Row-major flattening keeps the outputs of one sample together.
  Eigen::VectorXd e(diff.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < diff.rows(); ++i) {
    for (Eigen::Index j = 0; j < diff.cols(); ++j) e[k++] = diff(i, j);
  }
  return e;
}

double sse(const MlpNetwork& net, const Samples& s) { return residuals(net, s).squaredNorm(); }

double mse(const MlpNetwork& net, const Samples& s) {
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "no samples");
  return sse(net, s) / static_cast<double>(s.x.rows() * s.y.cols());
}

Eigen::MatrixXd jacobian(const MlpNetwork& net, const Samples& s) {
  check_samples(net, s);
  const auto layers = net.layer_count();
  const auto n_out = static_cast<Eigen::Index>(net.outputs());
  Eigen::MatrixXd jac(s.x.rows() * n_out, static_cast<Eigen::Index>(net.parameter_count()));

  std::vector<Eigen::Index> offset(layers);
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offset[l] = total;
    total += net.weights(l).size() + net.bias(l).size();
  }

  for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
    const auto acts = forward_all(net, s.x.row(i).transpose());
    for (Eigen::Index m = 0; m < n_out; ++m) {
      auto row = jac.row(i * n_out + m);
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(n_out);
      delta[m] = 1.0;
      for (std::size_t l = layers; l-- > 0;) {
        const auto& out = acts[l + 1];
        for (Eigen::Index r = 0; r < delta.size(); ++r) delta[r] *= net.activation(l).derivative(out[r]);
        const auto& in = acts[l];
        const auto cols = in.size();
        for (Eigen::Index r = 0; r < delta.size(); ++r) {
          row.segment(offset[l] + r * cols, cols) = delta[r] * in.transpose();
        }
        row.segment(offset[l] + delta.size() * cols, delta.size()) = delta.transpose();
        if (l > 0) delta = net.weights(l).transpose() * delta;
      }
    }
  }
  return jac;
}

Eigen::VectorXd lm_step(const MlpNetwork& net, const Samples& s, double mu) {
  const Eigen::MatrixXd jac = jacobian(net, s);
  const Eigen::VectorXd e = residuals(net, s);
  Eigen::MatrixXd a = jac.transpose() * jac;
  a.diagonal().array() += mu;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::TrainingFailure, "damped normal matrix is not positive definite");
  }
  return llt.solve(-(jac.transpose() * e));
}

std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::MaxEpochs:
      return "max_epochs";
    case StopReason::ValidationPatience:
      return "validation_patience";
    case StopReason::MuLimit:
      return "mu_limit";
    case StopReason::MinGradient:
      return "min_gradient";
    case StopReason::Goal:
      return "goal";
  }
  return "unknown";
}

TrainResult train_lm(MlpNetwork net, const Samples& train, const Samples& validation,
                     const LmOptions& options) {
  if (train.empty()) throw Error(ErrorCode::InvalidArgument, "training set is empty");
  check_samples(net, train);
  if (!validation.empty()) check_samples(net, validation);
  if (!(options.mu_increase > 1.0) || !(options.mu_decrease > 1.0) || !(options.mu_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mu factors must exceed 1");
  }

  double mu = options.mu;
  double step_scale = 1.0;
  if (options.learning_rate) {
    if (!(*options.learning_rate > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
    }
    if (options.learning_rate_role == LearningRateRole::InitialDamping) mu = *options.learning_rate;
    if (options.learning_rate_role == LearningRateRole::StepScale) step_scale = *options.learning_rate;
  }
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");

  const bool has_validation = !validation.empty();
  const double outputs = static_cast<double>(train.x.rows() * train.y.cols());
  Eigen::VectorXd params = net.parameters();
  Eigen::VectorXd e = residuals(net, train);
  double current = e.squaredNorm();
  if (!std::isfinite(current)) throw Error(ErrorCode::Divergence, "initial loss is not finite");

  TrainResult result;
  result.history.push_back({0, current / outputs, mse_or_nan(net, validation), mu});
  double best_metric = has_validation ? result.history[0].validation_mse : result.history[0].train_mse;
  Eigen::VectorXd best_params = params;
  std::size_t since_best = 0;
  result.reason = StopReason::MaxEpochs;

  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    if (current / outputs <= options.goal) {
      result.reason = StopReason::Goal;
      break;
    }
    const Eigen::MatrixXd jac = jacobian(net, train);
    const Eigen::VectorXd g = jac.transpose() * e;
    if (g.norm() < options.min_gradient) {
      result.reason = StopReason::MinGradient;
      break;
    }
    const Eigen::MatrixXd h = jac.transpose() * jac;

    bool accepted = false;
    bool factor_failed = false;
    while (mu <= options.mu_max) {
      Eigen::MatrixXd a = h;
      a.diagonal().array() += mu;
      Eigen::LLT<Eigen::MatrixXd> llt(a);
      factor_failed = llt.info() != Eigen::Success;
      if (!factor_failed) {
        const Eigen::VectorXd delta = step_scale * llt.solve(-g);
        net.set_parameters(params + delta);
        Eigen::VectorXd trial_e = residuals(net, train);
        const double trial = trial_e.squaredNorm();
        if (std::isfinite(trial) && trial < current) {
          params += delta;
          e = std::move(trial_e);
          current = trial;
          mu = std::max(mu / options.mu_decrease, kMuFloor);
          accepted = true;
          break;
        }
      }
      mu *= options.mu_increase;
    }
    if (!accepted) {
      net.set_parameters(params);
      if (factor_failed) {
        throw Error(ErrorCode::TrainingFailure, "damped normal matrix stayed singular");
      }
      result.reason = StopReason::MuLimit;
      break;
    }

    EpochRecord rec{epoch, current / outputs, mse_or_nan(net, validation), mu};
    result.history.push_back(rec);
    const double metric = has_validation ? rec.validation_mse : rec.train_mse;
    if (!std::isfinite(metric)) throw Error(ErrorCode::Divergence, "loss became non-finite");
    if (metric < best_metric) {
      best_metric = metric;
      best_params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (has_validation && ++since_best >= options.patience) {
      result.reason = StopReason::ValidationPatience;
      break;
    }
  }

  net.set_parameters(best_params);
  result.network = std::move(net);
  return result;
}

EarlyStoppingCurve early_stopping_curve(const std::vector<EpochRecord>& history) {
  EarlyStoppingCurve curve;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : history) {
    curve.train.push_back(rec.train_mse);
    curve.validation.push_back(rec.validation_mse);
    const double metric = std::isnan(rec.validation_mse) ? rec.train_mse : rec.validation_mse;
    if (metric < best) {
      best = metric;
      curve.best_epoch = rec.epoch;
    }
  }
  return curve;
}

HiddenSweep sweep_hidden_sizes(const Samples& train, const Samples& validation,
                               std::span<const std::size_t> hidden_sizes, Activation hidden,
                               const LmOptions& options, std::uint64_t seed) {
  if (hidden_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "no hidden sizes to sweep");
  HiddenSweep sweep;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hidden_sizes.size(); ++i) {
    auto net = MlpNetwork::initialized({static_cast<std::size_t>(train.x.cols()), hidden_sizes[i],
                                        static_cast<std::size_t>(train.y.cols())},
                                       hidden, derive_seed(seed, i));
    auto fit = train_lm(std::move(net), train, validation, options);
    const double score = validation.empty() ? mse(fit.network, train) : mse(fit.network, validation);
    sweep.points.push_back({hidden_sizes[i], score, fit.best_epoch});
    if (score < best) {
      best = score;
      sweep.best_hidden = hidden_sizes[i];
    }
  }
  return sweep;
}

}  // namespace duracast::neural
