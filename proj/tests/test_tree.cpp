#include <doctest.h>

#include <cmath>
#include <sstream>

#include "duracast/data.hpp"
#include "duracast/error.hpp"
#include "duracast/random.hpp"
#include "duracast/tree.hpp"
#include "oracles.hpp"

using namespace duracast;
using namespace duracast::tree;

namespace {

data::Design design_of(std::size_t p, std::vector<double> x, std::vector<double> y) {
  data::Design d;
  for (std::size_t j = 0; j < p; ++j) d.features.push_back({"x" + std::to_string(j), data::ColumnKind::Continuous, 0});
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

StoppingCriteria loose() {
  StoppingCriteria s;
  s.min_leaf = 1;
  s.min_branch = 2;
  return s;
}

}  // namespace

TEST_CASE("trivial trees") {
  const auto one = grow(design_of(1, {3.0}, {7.0}), loose(), 0);
  CHECK(one.leaf_count() == 1);
  CHECK(one.predict(std::vector<double>{100.0}) == 7.0);

  const auto flat = grow(design_of(1, {1, 2, 3, 4}, {2, 2, 2, 2}), loose(), 0);
  CHECK(flat.leaf_count() == 1);
  CHECK(flat.root().value == 2.0);
  CHECK(flat.root().risk == 0.0);
  CHECK(prune_info(flat).empty());
}

TEST_CASE("four-row step") {
  const auto d = design_of(1, {0, 1, 2, 3}, {0, 0, 1, 1});
  const auto t = grow(d, loose(), 0);
  REQUIRE(t.leaf_count() == 2);
  CHECK(t.root().rule.threshold > 1.0);
  CHECK(t.root().rule.threshold < 2.0);
  CHECK(t.predict(std::vector<double>{0.5}) == 0.0);
  CHECK(t.predict(std::vector<double>{2.5}) == 1.0);
  CHECK(tree::training_sse(t, d, d.y, std::vector<std::size_t>{0, 1, 2, 3}) == 0.0);

  const auto info = prune_info(t);
  REQUIRE(info.size() == 1);
  CHECK(info[0].gain == doctest::Approx(1.0));  // total sum of squares of y

  const std::vector<std::vector<double>> rows = {{0}, {1}, {2}, {3}};
  CHECK(oracle::greedy_tree_fit(rows, d.y, {1, 2}) == std::vector<double>{0, 0, 1, 1});
}

TEST_CASE("ties prefer the lower feature") {
  // Both features give the same partition.
  const auto d = design_of(2, {0, 0, 1, 1, 2, 2, 3, 3}, {0, 0, 1, 1});
  const auto t = grow(d, loose(), 0);
  CHECK(t.root().rule.feature == 0);
}

TEST_CASE("default leaf and branch sizes limit growth") {
  std::vector<double> x, y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(i);
    y.push_back(i);
  }
  StoppingCriteria s;  // min_branch 10
  CHECK(grow(design_of(1, x, y), s, 0).leaf_count() == 1);
  StoppingCriteria bad;
  bad.min_leaf = 6;
  bad.min_branch = 10;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("split budget") {
  std::vector<double> x, y;
  for (int i = 0; i < 32; ++i) {
    x.push_back(i);
    y.push_back(std::sin(i * 0.7) * 5 + i);
  }
  auto s = loose();
  s.max_splits = 3;
  const auto t = grow(design_of(1, x, y), s, 0);
  CHECK(t.leaf_count() == 4);
}

TEST_CASE("matches the exhaustive oracle on random data") {
  for (std::uint64_t k = 0; k < 30; ++k) {
    Rng rng(k);
    const std::size_t n = 5 + rng.index(20);
    std::vector<std::vector<double>> rows;
    std::vector<double> flat, y;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back({rng.uniform(), std::floor(rng.uniform(0, 3))});
      flat.insert(flat.end(), rows.back().begin(), rows.back().end());
      y.push_back(rng.normal());
    }
    const auto d = design_of(2, flat, y);
    const oracle::TreeRules r{1 + k % 3, 2 * (1 + k % 3) + k % 2};
    StoppingCriteria s;
    s.min_leaf = r.min_leaf;
    s.min_branch = r.min_branch;
    const auto t = grow(d, s, 0);
    const auto ref = oracle::greedy_tree_fit(rows, y, r);
    for (std::size_t i = 0; i < n; ++i) CHECK(t.predict(d.row(i)) == ref[i]);
  }
}

TEST_CASE("nominal splits group levels") {
  data::Design d;
  d.features.push_back({"binder", data::ColumnKind::Nominal, 4});
  d.x = {0, 1, 2, 3, 0, 1, 2, 3};
  d.y = {5, 1, 5, 1, 5, 1, 5, 1};
  const auto t = grow(d, loose(), 0);
  REQUIRE(t.leaf_count() == 2);
  const auto& rule = t.root().rule;
  CHECK(rule.kind == data::ColumnKind::Nominal);
  CHECK(rule.left_levels[0] == rule.left_levels[2]);
  CHECK(rule.left_levels[1] == rule.left_levels[3]);
  CHECK(rule.left_levels[0] != rule.left_levels[1]);
}

TEST_CASE("association") {
  const auto d = design_of(2, {0, 0, 1, 1, 2, 0, 3, 0}, {0, 0, 1, 1});
  const std::vector<std::size_t> rows = {0, 1, 2, 3};
  SplitRule best;
  best.feature = 0;
  best.threshold = 1.5;
  CHECK(*association(d, rows, best, best) == doctest::Approx(1.0));

  // x1 = {0,1,0,0} is a poor stand-in.
  SplitRule weak;
  weak.feature = 1;
  weak.threshold = 0.5;
  CHECK(*association(d, rows, best, weak) <= 1.0);

  // Sends every row the other way, with PL = PR = 0.5.
  const auto flip = design_of(2, {0, 3, 1, 2, 2, 1, 3, 0}, {0, 0, 1, 1});
  SplitRule opposite;
  opposite.feature = 1;
  opposite.threshold = 1.5;
  CHECK(*association(flip, rows, best, opposite) == doctest::Approx(-1.0));
}

TEST_CASE("surrogates route rows with a missing split value") {
  // x1 mirrors x0 closely, so it becomes the surrogate.
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    x.push_back(i < 10 ? 0.0 : 1.0);
    y.push_back(i < 10 ? 0.0 : 10.0);
  }
  const auto t = grow(design_of(2, x, y), loose(), 0);
  REQUIRE_FALSE(t.root().surrogates.empty());
  CHECK(t.root().surrogates.front().rule.feature == 1);
  CHECK(t.predict(std::vector<double>{data::kMissing, 1.0}) == 10.0);
  CHECK(t.predict(std::vector<double>{data::kMissing, 0.0}) == 0.0);
  CHECK_THROWS_AS(t.predict(std::vector<double>{1.0}), Error);
}

TEST_CASE("training rejects missing inputs") {
  const auto d = design_of(1, {1, data::kMissing}, {0, 1});
  CHECK_THROWS_AS(grow(d, loose(), 0), Error);
}

TEST_CASE("text round trip") {
  Rng rng(4);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(rng.uniform());
    x.push_back(rng.uniform());
    y.push_back(rng.normal());
  }
  const auto t = grow(design_of(2, x, y), loose(), 0);
  const auto back = RegressionTree::parse(t.to_text());
  CHECK(back == t);
  CHECK(back.to_text() == t.to_text());
}
