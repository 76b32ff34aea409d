#include <doctest.h>

#include <cmath>

#include "duracast/baselines.hpp"
#include "duracast/error.hpp"
#include "oracles.hpp"

using namespace duracast;
using namespace duracast::baselines;

TEST_CASE("square-root carbonation") {
  CHECK(carbonation_sqrt(2.0, 0.0) == 0.0);
  CHECK(carbonation_sqrt(2.0, 9.0) == doctest::Approx(6.0));
  for (double k : {0.3, 2.0, 7.7}) CHECK(std::fabs(fit_k(carbonation_sqrt(k, 3.3), 3.3) - k) < 1e-12);
  CHECK_THROWS_AS(carbonation_sqrt(1.0, -1.0), Error);
  CHECK_THROWS_AS(fit_k(1.0, 0.0), Error);
}

TEST_CASE("fib carbonation") {
  FibCarbonationParams p;
  p.r_inv = 50.0;
  p.ca = 0.00082;
  CHECK(carbonation_fib(p, 0.0) == 0.0);
  CHECK(carbonation_fib(p, 50.0) == doctest::Approx(std::sqrt(4.1)));
  CHECK(carbonation_fib(p, 50.0) == doctest::Approx(2.0248).epsilon(1e-4));
  p.w = [](double t) { return std::pow(1.0 / t, 0.1); };
  CHECK(carbonation_fib(p, 1.0) == doctest::Approx(std::sqrt(2 * 50 * 0.00082)));
  CHECK(carbonation_fib(p, 16.0, FibForm::Nested) ==
        doctest::Approx(std::sqrt(2 * 50 * 0.00082 * std::pow(1 / 16.0, 0.1) * 4.0)));
}

TEST_CASE("erf approximation") {
  // The published coefficients sum to 0.999999999, so erf(0) is 1e-9.
  CHECK(std::fabs(erf_approx(0.0)) <= 1e-9);
  CHECK(erf_approx(-0.7) == -erf_approx(0.7));
  for (double x = -3.0; x <= 6.0; x += 0.01) {
    CHECK(std::fabs(erf_approx(x) - static_cast<double>(oracle::erf_series(x))) <= 1.5e-7);
  }
  CHECK(static_cast<double>(oracle::erf_series(0.5)) == doctest::Approx(0.5204998778));
}

TEST_CASE("chloride profile") {
  const ChlorideErfParams p{0.5, 0.0, 1e-12, LengthUnit::Meter, TimeUnit::Second};
  const Duration t{1e7, TimeUnit::Second};
  CHECK(std::fabs(chloride_erf(p, {0.0, LengthUnit::Meter}, t) - 0.5) <= 1e-9);
  // x / (2 sqrt(D t)) = 0.5
  const double x = 0.5 * 2.0 * std::sqrt(1e-12 * 1e7);
  CHECK(chloride_erf(p, {x, LengthUnit::Meter}, t) == doctest::Approx(0.23975006).epsilon(1e-6));
  const ChlorideErfParams q{0.6, 0.05, 1e-12, LengthUnit::Meter, TimeUnit::Second};
  CHECK(std::fabs(chloride_erf(q, {1.0, LengthUnit::Meter}, t) - 0.05) < 1e-9);

  CHECK_THROWS_AS(chloride_erf(p, {1.0, LengthUnit::Millimeter}, t), Error);
  CHECK_THROWS_AS(chloride_erf(p, {1.0, LengthUnit::Meter}, {1.0, TimeUnit::Year}), Error);
  CHECK_THROWS_AS(chloride_erf(p, {1.0, LengthUnit::Meter}, {0.0, TimeUnit::Second}), Error);
  const ChlorideErfParams bad{0.1, 0.2, 1e-12, LengthUnit::Meter, TimeUnit::Second};
  CHECK_THROWS_AS(chloride_erf(bad, {0.0, LengthUnit::Meter}, t), Error);
}

TEST_CASE("ageing diffusion coefficient") {
  DnssAgingParams p{1, 1, 1, 1e-11, 0.0767, 0.5};
  CHECK(dnss_at(p, 0.0767) == doctest::Approx(1e-11));
  CHECK(dnss_at(p, 10.0) == doctest::Approx(8.7579e-13).epsilon(1e-4));
  p.n = 0.0;
  CHECK(dnss_at(p, 3.0) == dnss_at(p, 30.0));
  CHECK_THROWS_AS(dnss_at(p, 0.0), Error);
}

TEST_CASE("baseline comparison") {
  SUBCASE("data that follows k sqrt(t) exactly") {
    std::vector<CarbonationObservation> obs;
    for (int s = 0; s < 3; ++s) {
      const double k = 1.0 + s;
      for (double t : {1.0, 4.0, 9.0}) obs.push_back({"S" + std::to_string(s), t, k * std::sqrt(t), 0.0});
    }
    const auto cmp = baseline_comparison(obs);
    CHECK(cmp.find("baseline", "all").report.mse == doctest::Approx(0.0));
    CHECK(cmp.find("baseline", "all").report.n == 6);
    CHECK(cmp.find("model", "4").report.n == 3);
    CHECK(cmp.to_csv().rfind("model,age,mse,mae,rmse,median_resid,q1,q3\n", 0) == 0);
  }
  SUBCASE("specimens without the fit age are skipped") {
    std::vector<CarbonationObservation> obs = {
        {"A", 1.0, 1.0, 1.0}, {"A", 4.0, 2.0, 2.0}, {"B", 2.0, 1.0, 1.0}, {"B", 4.0, 1.5, 1.5}};
    const auto cmp = baseline_comparison(obs, 1.0);
    CHECK(cmp.warnings.size() == 1);
    CHECK(cmp.find("baseline", "all").report.n == 1);
    const std::vector<CarbonationObservation> only_b = {{"B", 2.0, 1.0, 1.0}};
    CHECK_THROWS_AS(baseline_comparison(only_b, 1.0), Error);
  }
}
