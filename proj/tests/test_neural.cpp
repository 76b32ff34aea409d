#include <doctest.h>

#include <cmath>

#include "duracast/error.hpp"
#include "duracast/narx.hpp"
#include "duracast/neural.hpp"
#include "duracast/random.hpp"
#include "oracles.hpp"

using namespace duracast;
using namespace duracast::neural;

namespace {

Samples noisy_sine(int n, std::uint64_t seed, double noise) {
  Rng rng(seed);
  Samples s{Eigen::MatrixXd(n, 1), Eigen::MatrixXd(n, 1)};
  for (int i = 0; i < n; ++i) {
    s.x(i, 0) = rng.uniform(-1, 1);
    s.y(i, 0) = std::sin(3 * s.x(i, 0)) + noise * rng.normal();
  }
  return s;
}

}  // namespace

TEST_CASE("activations") {
  CHECK(Activation::logistic(1.0)(0.0) == 0.5);
  CHECK(Activation::tanh()(0.5) == doctest::Approx(0.46211716));
  CHECK(Activation::linear()(-3.0) == -3.0);
  const auto lg = Activation::logistic(2.0);
  const double y = lg(0.3);
  CHECK(lg.derivative(y) == doctest::Approx((lg(0.3 + 1e-6) - lg(0.3 - 1e-6)) / 2e-6).epsilon(1e-6));
}

TEST_CASE("forward pass") {
  MlpNetwork zero({3, 4, 1}, Activation::tanh());
  CHECK(zero.forward(Eigen::Vector3d(1, -2, 5))[0] == 0.0);

  MlpNetwork unit({1, 1, 1}, Activation::tanh());
  unit.weights(0)(0, 0) = 1.0;
  unit.weights(1)(0, 0) = 1.0;
  CHECK(unit.forward_scalar(std::vector<double>{0.5}) == doctest::Approx(0.46212).epsilon(1e-5));
  CHECK_THROWS_AS(unit.forward(Eigen::Vector2d(1, 2)), Error);

  const auto net = MlpNetwork::initialized({2, 5, 3, 1}, Activation::tanh(), 4);
  Eigen::MatrixXd batch(2, 2);
  batch << 0.1, 0.2, -0.7, 0.4;
  const auto out = net.forward_batch(batch);
  CHECK(out(1, 0) == doctest::Approx(net.forward(Eigen::Vector2d(-0.7, 0.4))[0]));
}

TEST_CASE("initialization bounds and determinism") {
  const auto a = MlpNetwork::initialized({4, 6, 1}, Activation::tanh(), 9);
  CHECK(a == MlpNetwork::initialized({4, 6, 1}, Activation::tanh(), 9));
  CHECK(a.weights(0).cwiseAbs().maxCoeff() <= 0.5);
  CHECK(a.weights(1).cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(6.0));
  CHECK(a.bias(0).isZero());
  CHECK(a.parameter_count() == 4 * 6 + 6 + 6 + 1);
}

TEST_CASE("parameters and text round trip") {
  auto net = MlpNetwork::initialized({2, 3, 1}, Activation::logistic(1.5), 2);
  Eigen::VectorXd p = net.parameters();
  p[0] = 0.125;
  net.set_parameters(p);
  CHECK(net.weights(0)(0, 0) == 0.125);
  CHECK(MlpNetwork::parse(net.to_text()) == net);
  CHECK_THROWS_AS(MlpNetwork({2, 1}, std::vector<Activation>{Activation::tanh()}), Error);
}

TEST_CASE("jacobian agrees with central differences") {
  for (std::uint64_t k = 0; k < 5; ++k) {
    auto net = MlpNetwork::initialized({2, 3, 1}, Activation::tanh(), k);
    Rng rng(k + 50);
    Eigen::VectorXd p = net.parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.normal();
    net.set_parameters(p);
    const auto s = noisy_sine(8, k, 0.0);
    Samples two{Eigen::MatrixXd(8, 2), s.y};
    two.x << s.x, s.x.array().square();
    const auto jac = jacobian(net, two);
    auto f = [&](const std::vector<double>& q) {
      auto c = net;
      c.set_parameters(Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size())));
      const Eigen::VectorXd r = residuals(c, two);
      return std::vector<double>(r.data(), r.data() + r.size());
    };
    const auto fd = oracle::finite_jacobian(f, std::vector<double>(p.data(), p.data() + p.size()), 1e-5);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      for (std::size_t j = 0; j < fd[i].size(); ++j) {
        CHECK(jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
              doctest::Approx(fd[i][j]).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("levenberg-marquardt step") {
  // Linear hidden layer: the whole net is linear in x, so a single
  // undamped step solves the least-squares problem.
  MlpNetwork lin({2, 2, 1}, Activation::linear());
  lin.weights(0) << 1.0, 0.5, -0.3, 0.8;
  lin.weights(1) << 0.7, -1.1;
  Rng rng(3);
  Samples s{Eigen::MatrixXd(30, 2), Eigen::MatrixXd(30, 1)};
  for (int i = 0; i < 30; ++i) {
    s.x(i, 0) = rng.uniform(-1, 1);
    s.x(i, 1) = rng.uniform(-1, 1);
    s.y(i, 0) = 2 * s.x(i, 0) - s.x(i, 1) + 0.3 + 0.05 * rng.normal();
  }
  oracle::Matrix xs;
  std::vector<long double> ys;
  for (int i = 0; i < 30; ++i) {
    xs.push_back({s.x(i, 0), s.x(i, 1), 1.0L});
    ys.push_back(s.y(i, 0));
  }
  const auto beta = oracle::normal_equations(xs, ys);
  // The product parameterization is overdetermined, so compare fits, not
  // weights: a few near-undamped steps reach the optimum.
  auto net = lin;
  for (int k = 0; k < 5; ++k) net.set_parameters(net.parameters() + lm_step(net, s, 1e-12));
  for (int i = 0; i < 30; ++i) {
    const double want = static_cast<double>(beta[0] * s.x(i, 0) + beta[1] * s.x(i, 1) + beta[2]);
    CHECK(net.forward(s.x.row(i).transpose())[0] == doctest::Approx(want).epsilon(1e-6));
  }

  // A single linear layer already at the least-squares weights does not move.
  MlpNetwork ols({2, 1}, std::vector<Activation>{Activation::linear()});
  ols.set_parameters(Eigen::Vector3d(static_cast<double>(beta[0]), static_cast<double>(beta[1]),
                                     static_cast<double>(beta[2])));
  CHECK(lm_step(ols, s, 1e-12).norm() < 1e-10);
}

TEST_CASE("training with early stopping") {
  const auto train = noisy_sine(30, 1, 0.3);
  const auto val = noisy_sine(30, 2, 0.3);
  LmOptions opt;
  opt.max_epochs = 300;
  const auto net = MlpNetwork::initialized({1, 25, 1}, Activation::tanh(), 6);
  const auto r = train_lm(net, train, val, opt);
  CHECK(r.best_epoch <= r.history.back().epoch);
  CHECK(r.history.front().epoch == 0);
  const auto curve = early_stopping_curve(r.history);
  CHECK(curve.best_epoch == r.best_epoch);
  CHECK(mse(r.network, val) == doctest::Approx(r.history[r.best_epoch].validation_mse));
  if (r.reason == StopReason::ValidationPatience) {
    CHECK(r.best_epoch + opt.patience == r.history.back().epoch);
    CHECK(r.best_epoch < r.history.back().epoch);
  }

  SUBCASE("no validation set keeps the best training epoch") {
    LmOptions o;
    o.max_epochs = 20;
    const auto r2 = train_lm(net, train, Samples{}, o);
    CHECK(std::isnan(r2.history.back().validation_mse));
    CHECK(r2.reason == StopReason::MaxEpochs);
    for (std::size_t e = 1; e < r2.history.size(); ++e) {
      CHECK(r2.history[e].train_mse <= r2.history[e - 1].train_mse);
    }
  }
  SUBCASE("goal") {
    LmOptions o;
    o.goal = 1e9;
    CHECK(train_lm(net, train, val, o).reason == StopReason::Goal);
  }
}

TEST_CASE("hidden size sweep") {
  const auto train = noisy_sine(60, 3, 0.05);
  const auto val = noisy_sine(40, 4, 0.05);
  const std::vector<std::size_t> sizes = {1, 8};
  LmOptions o;
  o.max_epochs = 200;
  const auto sw = sweep_hidden_sizes(train, val, sizes, Activation::tanh(), o, 1);
  REQUIRE(sw.points.size() == 2);
  CHECK(sw.best_hidden == 8);
}

TEST_CASE("narx windows") {
  const std::vector<double> u = {1, 2, 3, 4}, y = {10, 20, 30, 40};
  const auto s = narx_prepare(u, y, 2);
  REQUIRE(s.samples.rows() == 2);
  const Eigen::RowVectorXd last = s.samples.x.row(1);
  CHECK(last(0) == 3);
  CHECK(last(1) == 2);
  CHECK(last(2) == 30);
  CHECK(last(3) == 20);
  CHECK(s.samples.y(1, 0) == 40);
  CHECK(s.time[1] == 3);
  // Shifting the y delay column by one row reproduces the target column.
  CHECK(s.samples.x(1, 2) == s.samples.y(0, 0));

  CHECK_THROWS_AS(narx_prepare(u, y, 4), Error);
  CHECK_THROWS_AS(narx_prepare(std::vector<double>{1, 2}, y, 1), Error);
}

TEST_CASE("narx copy task and prediction modes") {
  // y repeats u one step later, which a single linear delay reproduces.
  Rng rng(5);
  std::vector<double> u(200), y(200, 0.0);
  for (auto& v : u) v = rng.uniform(-1, 1);
  for (std::size_t n = 0; n + 1 < u.size(); ++n) y[n + 1] = u[n];
  NarxOptions opt;
  opt.delays = 1;
  opt.hidden = 1;
  opt.activation = Activation::linear();
  opt.restarts = 1;
  const auto fit = train_narx(u, y, opt);
  CHECK(fit.training.history[fit.training.best_epoch].train_mse < 1e-8);
  CHECK(NarxModel::parse(fit.model.to_text()).to_text() == fit.model.to_text());

  const auto open = narx_predict(fit.model, u, y, 50, 1, NarxMode::OpenLoop);
  const auto closed = narx_predict(fit.model, u, y, 50, 1, NarxMode::ClosedLoop);
  CHECK(open == closed);
  CHECK_THROWS_AS(narx_predict(fit.model, u, y, 199, 5, NarxMode::OpenLoop), Error);
}

TEST_CASE("closed loop accumulates error on noisy data") {
  Rng rng(6);
  const std::size_t n = 400;
  std::vector<double> u(n), y(n, 0.0);
  for (auto& v : u) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i + 1 < n; ++i) y[i + 1] = 0.6 * y[i] + 0.4 * std::sin(2 * u[i]) + 0.05 * rng.normal();
  NarxOptions opt;
  opt.hidden = 5;
  const auto fit = train_narx(std::span(u).first(300), std::span(y).first(300), opt);
  const auto open = narx_predict(fit.model, u, y, 309, 80, NarxMode::OpenLoop);
  const auto closed = narx_predict(fit.model, u, y, 309, 80, NarxMode::ClosedLoop);
  double eo = 0, ec = 0;
  for (std::size_t k = 0; k < 80; ++k) {
    eo += std::pow(open[k] - y[310 + k], 2);
    ec += std::pow(closed[k] - y[310 + k], 2);
  }
  CHECK(ec >= eo);
}
