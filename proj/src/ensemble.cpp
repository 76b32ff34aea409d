#include "duracast/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "duracast/error.hpp"
#include "duracast/io.hpp"
#include "duracast/random.hpp"

namespace duracast::ensemble {

namespace {

std::string optional_text(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string("none");
}

std::optional<std::size_t> read_optional(std::istream& in) {
  std::string token;
  in >> token;
  if (token == "none") return std::nullopt;
  double v = 0;
  if (!parse_double(token, v) || v < 0) throw Error(ErrorCode::Parse, "bad count '" + token + "'");
  return static_cast<std::size_t>(v);
}

void expect(std::istream& in, const char* keyword) {
  std::string token;
  if (!(in >> token) || token != keyword) {
    throw Error(ErrorCode::Parse, std::string("expected '") + keyword + "', got '" + token + "'");
  }
}

template <typename T>
T read_value(std::istream& in) {
  T v{};
  if (!(in >> v)) throw Error(ErrorCode::Parse, "malformed ensemble header");
  return v;
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng, std::vector<bool>& in_bag) {
  std::vector<std::size_t> rows(n);
  in_bag.assign(n, false);
  for (auto& r : rows) {
    r = rng.index(n);
    in_bag[r] = true;
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

double sample_std(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------------------

EnsembleModel::EnsembleModel(EnsembleKind kind, double learning_rate,
                             std::vector<tree::RegressionTree> trees,
                             std::vector<std::vector<bool>> in_bag, tree::StoppingCriteria stop,
                             std::uint64_t seed, std::size_t arity)
    : kind_(kind),
      learning_rate_(learning_rate),
      trees_(std::move(trees)),
      in_bag_(std::move(in_bag)),
      stop_(stop),
      seed_(seed),
      arity_(arity) {
  if (trees_.empty()) throw Error(ErrorCode::InvalidArgument, "an ensemble needs at least one tree");
  if (kind_ == EnsembleKind::Bagged && in_bag_.size() != trees_.size()) {
    throw Error(ErrorCode::InvalidArgument, "bagged ensemble needs one in-bag mask per tree");
  }
}

double EnsembleModel::predict(std::span<const double> x) const {
  return predict_prefix(x, trees_.size());
}

double EnsembleModel::predict_prefix(std::span<const double> x, std::size_t count) const {
  if (x.size() != arity_) {
    throw Error(ErrorCode::Shape, "expected " + std::to_string(arity_) + " features, got " +
                                      std::to_string(x.size()));
  }
  count = std::min(count, trees_.size());
  double sum = 0.0;
  if (kind_ == EnsembleKind::Bagged) {
    for (std::size_t t = 0; t < count; ++t) sum += trees_[t].predict(x);
    return sum / static_cast<double>(count);
  }
  for (std::size_t t = 0; t < count; ++t) sum += learning_rate_ * trees_[t].predict(x);
  return sum;
}

std::vector<double> EnsembleModel::predict_batch(const data::Design& design) const {
  if (design.cols() != arity_) {
    throw Error(ErrorCode::Shape, "expected " + std::to_string(arity_) + " features, got " +
                                      std::to_string(design.cols()));
  }
  std::vector<double> out(design.rows());
  for (std::size_t i = 0; i < design.rows(); ++i) out[i] = predict(design.row(i));
  return out;
}

std::string EnsembleModel::to_text() const {
  const std::size_t rows = in_bag_.empty() ? 0 : in_bag_.front().size();
  std::string out = "ensemble 1\nkind ";
  out += kind_ == EnsembleKind::Bagged ? "bagged" : "boosted";
  out += "\nT " + std::to_string(trees_.size());
  out += "\nlambda " + format_double(learning_rate_);
  out += "\nseed " + std::to_string(seed_);
  out += "\narity " + std::to_string(arity_);
  out += "\nrows " + std::to_string(rows);
  out += "\nstop max_splits " + optional_text(stop_.max_splits) + " min_leaf " +
         std::to_string(stop_.min_leaf) + " min_branch " + std::to_string(stop_.min_branch) +
         " m " + optional_text(stop_.features_per_split) + " surrogates " +
         std::to_string(stop_.max_surrogates) + "\n";
  for (const auto& t : trees_) out += t.to_text();
  for (std::size_t t = 0; t < in_bag_.size(); ++t) {
    out += "inbag " + std::to_string(t) + " ";
    for (bool b : in_bag_[t]) out.push_back(b ? '1' : '0');
    out += "\n";
  }
  out += "end\n";
  return out;
}

EnsembleModel EnsembleModel::read(std::istream& in) {
  expect(in, "ensemble");
  if (read_value<int>(in) != 1) throw Error(ErrorCode::Parse, "unsupported ensemble version");
  expect(in, "kind");
  const auto kind_text = read_value<std::string>(in);
  EnsembleKind kind;
  if (kind_text == "bagged") {
    kind = EnsembleKind::Bagged;
  } else if (kind_text == "boosted") {
    kind = EnsembleKind::Boosted;
  } else {
    throw Error(ErrorCode::Parse, "unknown ensemble kind '" + kind_text + "'");
  }
  expect(in, "T");
  const auto count = read_value<std::size_t>(in);
  expect(in, "lambda");
  double lambda = 0;
  if (!parse_double(read_value<std::string>(in), lambda)) {
    throw Error(ErrorCode::Parse, "bad learning rate");
  }
  expect(in, "seed");
  const auto seed = read_value<std::uint64_t>(in);
  expect(in, "arity");
  const auto arity = read_value<std::size_t>(in);
  expect(in, "rows");
  const auto rows = read_value<std::size_t>(in);
  tree::StoppingCriteria stop;
  expect(in, "stop");
  expect(in, "max_splits");
  stop.max_splits = read_optional(in);
  expect(in, "min_leaf");
  stop.min_leaf = read_value<std::size_t>(in);
  expect(in, "min_branch");
  stop.min_branch = read_value<std::size_t>(in);
  expect(in, "m");
  stop.features_per_split = read_optional(in);
  expect(in, "surrogates");
  stop.max_surrogates = read_value<std::size_t>(in);

  std::vector<tree::RegressionTree> trees;
  trees.reserve(count);
  for (std::size_t t = 0; t < count; ++t) trees.push_back(tree::RegressionTree::read(in));

  std::vector<std::vector<bool>> in_bag;
  std::string token;
  while (in >> token) {
    if (token == "end") {
      return EnsembleModel(kind, lambda, std::move(trees), std::move(in_bag), stop, seed, arity);
    }
    if (token != "inbag") throw Error(ErrorCode::Parse, "unexpected token '" + token + "'");
    const auto t = read_value<std::size_t>(in);
    const auto bits = read_value<std::string>(in);
    if (t != in_bag.size() || bits.size() != rows) {
      throw Error(ErrorCode::Parse, "malformed in-bag line");
    }
    std::vector<bool> mask(rows);
    for (std::size_t i = 0; i < rows; ++i) mask[i] = bits[i] == '1';
    in_bag.push_back(std::move(mask));
  }
  throw Error(ErrorCode::Parse, "ensemble text ended without 'end'");
}

EnsembleModel EnsembleModel::parse(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

// ---------------------------------------------------------------------------

std::size_t default_subspace(std::size_t features) { return std::max<std::size_t>(1, features / 3); }

EnsembleModel train_bagged(const data::Design& design, const BagOptions& options) {
  if (options.trees < 1) throw Error(ErrorCode::InvalidArgument, "need at least one tree");
  if (design.rows() == 0) throw Error(ErrorCode::InvalidArgument, "no training rows");
  tree::StoppingCriteria stop = options.stop;
  stop.features_per_split =
      options.features_per_split.value_or(default_subspace(design.cols()));
  stop.validate();

  const std::size_t count = options.trees;
  std::vector<tree::RegressionTree> trees(count);
  std::vector<std::vector<bool>> in_bag(count);

  auto build = [&](std::size_t t) {
    Rng rng(derive_seed(options.seed, t));
    const auto rows = bootstrap_rows(design.rows(), rng, in_bag[t]);
    trees[t] = tree::grow(design, design.y, rows, stop, rng.next());
  };

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, count);
  if (workers == 1) {
    for (std::size_t t = 0; t < count; ++t) build(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < count; t = next++) {
          try {
            build(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }
  return EnsembleModel(EnsembleKind::Bagged, 1.0, std::move(trees), std::move(in_bag), stop,
                       options.seed, design.cols());
}

EnsembleModel train_lsboost(const data::Design& design, const BoostOptions& options) {
  if (options.trees < 1) throw Error(ErrorCode::InvalidArgument, "need at least one tree");
  if (!(options.learning_rate > 0.0 && options.learning_rate <= 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "learning rate must lie in (0, 2]");
  }
  options.stop.validate();
  std::vector<std::size_t> rows(design.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;

  std::vector<double> residual = design.y;
  std::vector<tree::RegressionTree> trees;
  trees.reserve(options.trees);
  for (std::size_t t = 0; t < options.trees; ++t) {
    auto stage = tree::grow(design, residual, rows, options.stop, derive_seed(options.seed, t));
    for (std::size_t i = 0; i < residual.size(); ++i) {
      residual[i] -= options.learning_rate * stage.predict(design.row(i));
    }
    trees.push_back(std::move(stage));
  }
  return EnsembleModel(EnsembleKind::Boosted, options.learning_rate, std::move(trees), {},
                       options.stop, options.seed, design.cols());
}

std::vector<double> staged_training_mse(const EnsembleModel& model, const data::Design& design) {
  const std::size_t n = design.rows();
  std::vector<double> fitted(n, 0.0);
  std::vector<double> out;
  out.reserve(model.trees().size());
  for (std::size_t t = 0; t < model.trees().size(); ++t) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (model.kind() == EnsembleKind::Boosted) {
        fitted[i] += model.learning_rate() * model.trees()[t].predict(design.row(i));
        const double d = design.y[i] - fitted[i];
        sse += d * d;
      } else {
        fitted[i] += model.trees()[t].predict(design.row(i));
        const double d = design.y[i] - fitted[i] / static_cast<double>(t + 1);
        sse += d * d;
      }
    }
    out.push_back(sse / static_cast<double>(n));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void require_oob(const EnsembleModel& model, const data::Design& design) {
  if (model.kind() != EnsembleKind::Bagged) {
    throw Error(ErrorCode::InvalidArgument, "out-of-bag evaluation needs a bagged ensemble");
  }
  if (model.in_bag().front().size() != design.rows()) {
    throw Error(ErrorCode::Shape, "design rows do not match the in-bag masks");
  }
}

}  // namespace

OobResult oob_error(const EnsembleModel& model, const data::Design& design) {
  require_oob(model, design);
  const std::size_t n = design.rows();
  OobResult result;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < model.trees().size(); ++t) {
      if (model.in_bag()[t][i]) continue;
      sum += model.trees()[t].predict(design.row(i));
      ++count;
    }
    if (count == 0) {
      ++result.uncovered;
      continue;
    }
    const double d = design.y[i] - sum / static_cast<double>(count);
    sse += d * d;
    ++result.covered;
  }
  if (result.covered == 0) {
    throw Error(ErrorCode::NoCoverage, "no row is out of bag for any tree");
  }
  result.mse = sse / static_cast<double>(result.covered);
  return result;
}

std::vector<double> oob_error_curve(const EnsembleModel& model, const data::Design& design) {
  require_oob(model, design);
  const std::size_t n = design.rows();
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> counts(n, 0);
  std::vector<double> curve;
  for (std::size_t t = 0; t < model.trees().size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (model.in_bag()[t][i]) continue;
      sums[i] += model.trees()[t].predict(design.row(i));
      ++counts[i];
    }
    double sse = 0.0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i] == 0) continue;
      const double d = design.y[i] - sums[i] / static_cast<double>(counts[i]);
      sse += d * d;
      ++covered;
    }
    curve.push_back(covered ? sse / static_cast<double>(covered)
                            : std::numeric_limits<double>::quiet_NaN());
  }
  return curve;
}

std::vector<LeafSweepPoint> leaf_size_sweep(const data::Design& design,
                                            std::span<const std::size_t> leaf_sizes,
                                            const BagOptions& base) {
  std::vector<LeafSweepPoint> out;
  for (auto leaf : leaf_sizes) {
    BagOptions options = base;
    options.stop.min_leaf = leaf;
    options.stop.min_branch = std::max(options.stop.min_branch, 2 * leaf);
    const auto model = train_bagged(design, options);
    out.push_back(LeafSweepPoint{leaf, oob_error_curve(model, design)});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> ImportanceReport::ranking() const {
  std::vector<std::size_t> order(variables.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto score = [&](std::size_t i) {
    return has_permutation ? variables[i].permutation : variables[i].splitgain;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
  return order;
}

double ImportanceReport::top_k_share(std::size_t k) const {
  const auto order = ranking();
  double total = 0.0;
  double top = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& v = variables[order[r]];
    const double s = has_permutation ? v.permutation : v.splitgain;
    total += s;
    if (r < k) top += s;
  }
  return total != 0.0 ? top / total : 0.0;
}

std::string ImportanceReport::to_csv() const {
  std::string out = "variable,permutation_score,splitgain_score,rank,cumulative_share\n";
  const auto order = ranking();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& v = variables[order[r]];
    out += csv_field(v.name) + "," + format_double(v.permutation) + "," +
           format_double(v.splitgain) + "," + std::to_string(r + 1) + "," +
           format_double(top_k_share(r + 1)) + "\n";
  }
  return out;
}

std::vector<double> splitgain_scores(const EnsembleModel& model) {
  const std::size_t p = model.arity();
  std::vector<double> average(p, 0.0);
  for (const auto& t : model.trees()) {
    std::vector<double> credit(p, 0.0);
    for (const auto& node : t.nodes()) {
      if (node.leaf) continue;
      credit[node.rule.feature] += node.gain;
      for (const auto& s : node.surrogates) {
        credit[s.rule.feature] += node.gain * std::max(s.association, 0.0);
      }
    }
    for (std::size_t j = 0; j < p; ++j) average[j] += credit[j];
  }
  double total = 0.0;
  for (auto& v : average) {
    v /= static_cast<double>(model.trees().size());
    total += v;
  }
  if (total > 0.0) {
    for (auto& v : average) v /= total;
  }
  return average;
}

ImportanceReport splitgain_importance(const EnsembleModel& model, const data::Design& design) {
  if (design.cols() != model.arity()) throw Error(ErrorCode::Shape, "feature count mismatch");
  ImportanceReport report;
  const auto scores = splitgain_scores(model);
  for (std::size_t j = 0; j < scores.size(); ++j) {
    report.variables.push_back(VariableScore{design.features[j].name, 0.0, scores[j], false});
  }
  report.iterations = 1;
  report.seeds = {model.seed()};
  return report;
}

ImportanceReport permutation_importance(const EnsembleModel& model, const data::Design& design,
                                        const PermutationOptions& options) {
  require_oob(model, design);
  if (options.iterations < 1) throw Error(ErrorCode::InvalidArgument, "need at least one iteration");
  const std::size_t p = design.cols();
  const std::size_t count = model.trees().size();

  std::vector<std::vector<std::size_t>> oob(count);
  std::vector<std::vector<bool>> used(count);
  std::vector<double> base_error(count, 0.0);
  std::vector<bool> presence(p, false);
  for (std::size_t t = 0; t < count; ++t) {
    const auto& tr = model.trees()[t];
    for (std::size_t i = 0; i < design.rows(); ++i) {
      if (!model.in_bag()[t][i]) oob[t].push_back(i);
    }
    used[t] = tr.features_used();
    if (oob[t].empty()) continue;
    double sse = 0.0;
    for (auto i : oob[t]) {
      const double d = design.y[i] - tr.predict(design.row(i));
      sse += d * d;
    }
    base_error[t] = sse / static_cast<double>(oob[t].size());
    for (std::size_t j = 0; j < p; ++j) {
      if (used[t][j]) presence[j] = true;
    }
  }

  std::vector<double> scores(p, 0.0);
  std::vector<double> diffs(count);
  std::vector<double> row(p);
  ImportanceReport report;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const auto seed = derive_seed(options.seed, it);
    report.seeds.push_back(seed);
    Rng rng(seed);
    std::vector<std::vector<double>> per_tree(p, std::vector<double>(count, 0.0));
    for (std::size_t t = 0; t < count; ++t) {
      const auto& rows = oob[t];
      if (rows.empty()) continue;
      const auto& tr = model.trees()[t];
      for (std::size_t j = 0; j < p; ++j) {
        if (!used[t][j]) continue;
        std::vector<double> permuted(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) permuted[k] = design.at(rows[k], j);
        rng.shuffle(std::span<double>(permuted));
        double sse = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          const auto src = design.row(rows[k]);
          std::copy(src.begin(), src.end(), row.begin());
          row[j] = permuted[k];
          const double d = design.y[rows[k]] - tr.predict(row);
          sse += d * d;
        }
        per_tree[j][t] = sse / static_cast<double>(rows.size()) - base_error[t];
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      double mean = 0.0;
      for (double d : per_tree[j]) mean += d;
      mean /= static_cast<double>(count);
      double spread = sample_std(per_tree[j], mean);
      if (options.scaling == PermutationScaling::StdError) {
        spread /= std::sqrt(static_cast<double>(count));
      }
      const double score = spread > 0.0 ? mean / spread : 0.0;
      scores[j] += score / static_cast<double>(options.iterations);
    }
  }

  const auto gains = splitgain_scores(model);
  for (std::size_t j = 0; j < p; ++j) {
    report.variables.push_back(
        VariableScore{design.features[j].name, scores[j], gains[j], !presence[j]});
  }
  report.iterations = options.iterations;
  report.has_permutation = true;
  return report;
}

ImportanceReport scenario_importance(const data::Dataset& ds, const Scenario& scenario,
                                     const ScenarioConfig& config) {
  if (config.iterations < 1) throw Error(ErrorCode::InvalidArgument, "need at least one iteration");
  data::Dataset selected = ds;
  if (!scenario.filters.empty()) {
    selected = data::filter_rows(ds, data::make_predicate(ds.schema(), scenario.filters));
  }
  if (!scenario.drop_columns.empty()) {
    selected = data::drop_columns(selected, scenario.drop_columns);
  }
  const auto design = data::to_design(selected);

  ImportanceReport report;
  report.has_permutation = true;
  report.iterations = config.iterations;
  for (const auto& f : design.features) report.variables.push_back(VariableScore{f.name});
  std::vector<std::size_t> presence_misses(design.cols(), 0);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    BagOptions bag = config.bag;
    bag.seed = derive_seed(config.bag.seed, it);
    PermutationOptions perm = config.permutation;
    perm.seed = derive_seed(config.permutation.seed ^ 0xA5A5A5A5ULL, it);
    report.seeds.push_back(bag.seed);
    const auto model = train_bagged(design, bag);
    const auto single = permutation_importance(model, design, perm);
    const double w = 1.0 / static_cast<double>(config.iterations);
    for (std::size_t j = 0; j < design.cols(); ++j) {
      report.variables[j].permutation += w * single.variables[j].permutation;
      report.variables[j].splitgain += w * single.variables[j].splitgain;
      if (single.variables[j].no_oob_presence) ++presence_misses[j];
    }
  }
  for (std::size_t j = 0; j < design.cols(); ++j) {
    report.variables[j].no_oob_presence = presence_misses[j] == config.iterations;
  }
  return report;
}

}  // namespace duracast::ensemble
