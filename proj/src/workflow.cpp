#include "duracast/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include "duracast/error.hpp"
#include "duracast/io.hpp"
#include "duracast/random.hpp"

namespace duracast::workflow {

namespace {

tree::StoppingCriteria stopping(const ModelConfig& c, std::size_t default_leaf,
                                std::optional<std::size_t> default_splits) {
  tree::StoppingCriteria stop;
  stop.min_leaf = c.min_leaf.value_or(default_leaf);
  stop.min_branch = std::max<std::size_t>(10, 2 * stop.min_leaf);
  stop.max_splits = c.max_splits ? c.max_splits : default_splits;
  stop.max_surrogates = c.max_surrogates;
  return stop;
}

neural::Samples to_samples(const data::Design& d) {
  neural::Samples s;
  s.x.resize(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(d.cols()));
  s.y.resize(static_cast<Eigen::Index>(d.rows()), 1);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d.at(i, j);
    }
    s.y(static_cast<Eigen::Index>(i), 0) = d.y[i];
  }
  return s;
}

std::size_t narx_input_column(const data::Schema& schema, const std::string& name) {
  if (!name.empty()) return schema.index_of(name);
  const auto inputs = schema.input_indices();
  for (auto c : inputs) {
    if (schema.column(c).kind == data::ColumnKind::Continuous) return c;
  }
  throw Error(ErrorCode::SchemaViolation, "NARX needs a continuous input column");
}

std::vector<double> design_predictions(const Model& m, const data::Dataset& ds) {
  const auto design = data::to_design(ds, data::MissingPolicy::AllowAll);
  std::vector<double> out(design.rows());
  for (std::size_t i = 0; i < design.rows(); ++i) {
    out[i] = m.ensemble() ? m.ensemble()->predict(design.row(i)) : m.tree()->predict(design.row(i));
  }
  return out;
}

std::vector<std::size_t> pick_indices(const std::vector<std::size_t>& base,
                                      std::span<const std::size_t> idx) {
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(base[i]);
  return out;
}

void expect_line(std::istream& in, std::string& line, const std::string& prefix) {
  if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) {
    throw Error(ErrorCode::Parse, "model bundle: expected '" + prefix + "'");
  }
}

}  // namespace

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tree:
      return "tree";
    case ModelKind::Bag:
      return "bag";
    case ModelKind::Boost:
      return "boost";
    case ModelKind::Mlp:
      return "mlp";
    case ModelKind::Narx:
      return "narx";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::Tree, ModelKind::Bag, ModelKind::Boost, ModelKind::Mlp, ModelKind::Narx}) {
    if (kind_name(k) == text) return k;
  }
  throw Error(ErrorCode::Config, "unknown model kind '" + std::string(text) + "'");
}

std::array<double, 3> default_split(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mlp:
      return {0.6, 0.2, 0.2};
    case ModelKind::Narx:
      return {0.75, 0.15, 0.10};
    default:
      return {0.7, 0.0, 0.3};
  }
}

// ---------------------------------------------------------------------------

Model fit(const data::Dataset& ds, std::span<const std::size_t> train,
          std::span<const std::size_t> validation, const ModelConfig& config, std::uint64_t seed) {
  if (train.empty()) throw Error(ErrorCode::InvalidArgument, "no training rows");
  Model m;
  m.kind_ = config.kind;
  m.schema_ = ds.schema();

  switch (config.kind) {
    case ModelKind::Tree: {
      const auto design = data::to_design(ds.select_rows(train));
      m.model_ = tree::grow(design, stopping(config, 1, std::nullopt), seed);
      break;
    }
    case ModelKind::Bag: {
      const auto design = data::to_design(ds.select_rows(train));
      ensemble::BagOptions opts;
      opts.trees = config.trees;
      opts.stop = stopping(config, 5, std::nullopt);
      opts.features_per_split = config.features_per_split;
      opts.seed = seed;
      opts.threads = config.threads;
      m.model_ = ensemble::train_bagged(design, opts);
      break;
    }
    case ModelKind::Boost: {
      const auto design = data::to_design(ds.select_rows(train));
      ensemble::BoostOptions opts;
      opts.trees = config.trees;
      opts.learning_rate = config.rate;
      opts.stop = stopping(config, 1, std::size_t{10});
      opts.seed = seed;
      m.model_ = ensemble::train_lsboost(design, opts);
      break;
    }
    case ModelKind::Mlp: {
      if (config.hidden.empty()) throw Error(ErrorCode::Config, "mlp needs at least one hidden layer size");
      const auto encoded = data::encode_one_of_n(ds);
      auto norm = data::Normalization::fit(encoded, train);
      const auto scaled = norm.apply(encoded);
      const auto tr = to_samples(data::to_design(scaled.select_rows(train)));
      neural::Samples va;
      if (!validation.empty()) va = to_samples(data::to_design(scaled.select_rows(validation)));
      std::vector<std::size_t> sizes{static_cast<std::size_t>(tr.x.cols())};
      sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
      sizes.push_back(1);
      auto net = neural::MlpNetwork::initialized(sizes, neural::Activation::tanh(), seed);
      m.model_ = neural::train_lm(std::move(net), tr, va, config.lm).network;
      m.normalization_ = std::move(norm);
      break;
    }
    case ModelKind::Narx: {
      const auto& schema = ds.schema();
      m.narx_input_ = narx_input_column(schema, config.input_column);
      std::vector<double> u, y;
      for (auto r : train) {
        u.push_back(ds.at(r, m.narx_input_));
        y.push_back(ds.at(r, schema.target_index()));
      }
      neural::NarxOptions opts;
      opts.delays = config.delays;
      opts.restarts = config.restarts;
      opts.hidden = config.hidden.empty() ? 10 : config.hidden.front();
      opts.lm = config.lm;
      opts.seed = seed;
      auto narx = neural::train_narx(u, y, opts);
      m.model_ = std::move(narx.model);
      m.narx_partition_ = std::move(narx.partition);
      break;
    }
  }
  return m;
}

std::vector<double> Model::predict(const data::Dataset& ds) const {
  if (!schema_) throw Error(ErrorCode::InvalidArgument, "model is empty");
  if (ds.schema().to_text() != schema_->to_text()) {
    throw Error(ErrorCode::SchemaViolation, "dataset schema differs from the model schema");
  }
  if (ensemble() || tree()) return design_predictions(*this, ds);

  if (const auto* net = network()) {
    const auto scaled = normalization_->apply(data::encode_one_of_n(ds));
    const auto design = data::to_design(scaled, data::MissingPolicy::AllowAll);
    const auto target = scaled.schema().target_index();
    std::vector<double> out(design.rows());
    for (std::size_t i = 0; i < design.rows(); ++i) {
      const auto row = design.row(i);
      if (std::any_of(row.begin(), row.end(), data::is_missing)) {
        throw Error(ErrorCode::MissingValue, "network input missing in row " + std::to_string(i + 1));
      }
      out[i] = normalization_->invert(target, net->forward_scalar(row));
    }
    return out;
  }

  const auto* nx = narx();
  const std::size_t q = nx->delays();
  const auto target = schema_->target_index();
  std::vector<double> out(ds.rows(), data::kMissing);
  std::vector<double> ud(q), yd(q);
  for (std::size_t n = q - 1; n + 1 < ds.rows(); ++n) {
    bool complete = true;
    for (std::size_t d = 0; d < q; ++d) {
      ud[d] = ds.at(n - d, narx_input_);
      yd[d] = ds.at(n - d, target);
      complete = complete && !data::is_missing(ud[d]) && !data::is_missing(yd[d]);
    }
    if (complete) out[n + 1] = nx->step(ud, yd);
  }
  return out;
}

std::string Model::to_text() const {
  if (!schema_) throw Error(ErrorCode::InvalidArgument, "model is empty");
  std::string out = "duracast-model 1\nkind " + std::string(kind_name(kind_)) + "\n";
  const auto schema_text = schema_->to_text();
  const auto lines = std::count(schema_text.begin(), schema_text.end(), '\n');
  out += "schema " + std::to_string(lines) + "\n" + schema_text;
  if (normalization_) {
    out += "normalization " + std::to_string(normalization_->size()) + " " +
           format_double(normalization_->lower()) + " " + format_double(normalization_->upper()) + "\n";
    for (std::size_t c = 0; c < normalization_->size(); ++c) {
      const auto& r = normalization_->range(c);
      out += "range " + std::to_string(c);
      out += r ? " " + format_double(r->min) + " " + format_double(r->max) + "\n" : " none\n";
    }
  }
  if (kind_ == ModelKind::Narx) out += "narx_input " + std::to_string(narx_input_) + "\n";
  if (const auto* e = ensemble()) out += e->to_text();
  if (const auto* t = tree()) out += t->to_text();
  if (const auto* n = network()) out += n->to_text();
  if (const auto* x = narx()) out += x->to_text();
  return out;
}

Model Model::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  expect_line(in, line, "duracast-model 1");
  expect_line(in, line, "kind ");
  Model m;
  m.kind_ = parse_model_kind(line.substr(5));
  expect_line(in, line, "schema ");
  double count = 0;
  if (!parse_double(line.substr(7), count) || count < 1) throw Error(ErrorCode::Parse, "bad schema size");
  std::string schema_text;
  for (int i = 0; i < static_cast<int>(count); ++i) {
    if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "truncated schema");
    schema_text += line + "\n";
  }
  m.schema_ = data::Schema::parse(schema_text);

  if (m.kind_ == ModelKind::Mlp) {
    expect_line(in, line, "normalization ");
    std::istringstream head(line.substr(14));
    std::size_t n = 0;
    std::string lo_text, hi_text;
    double lower = 0, upper = 0;
    if (!(head >> n >> lo_text >> hi_text) || !parse_double(lo_text, lower) ||
        !parse_double(hi_text, upper)) {
      throw Error(ErrorCode::Parse, "bad normalization header");
    }
    std::vector<std::optional<data::Range>> ranges(n);
    for (std::size_t c = 0; c < n; ++c) {
      expect_line(in, line, "range " + std::to_string(c) + " ");
      const auto parts = split(line, ' ');
      if (parts.size() == 3 && parts[2] == "none") continue;
      data::Range r;
      if (parts.size() != 4 || !parse_double(parts[2], r.min) || !parse_double(parts[3], r.max)) {
        throw Error(ErrorCode::Parse, "bad range line '" + line + "'");
      }
      ranges[c] = r;
    }
    m.normalization_ = data::Normalization(std::move(ranges), lower, upper);
  }
  if (m.kind_ == ModelKind::Narx) {
    expect_line(in, line, "narx_input ");
    double idx = 0;
    if (!parse_double(line.substr(11), idx) || idx < 0) throw Error(ErrorCode::Parse, "bad narx_input");
    m.narx_input_ = static_cast<std::size_t>(idx);
  }
  switch (m.kind_) {
    case ModelKind::Tree:
      m.model_ = tree::RegressionTree::read(in);
      break;
    case ModelKind::Bag:
    case ModelKind::Boost:
      m.model_ = ensemble::EnsembleModel::read(in);
      break;
    case ModelKind::Mlp:
      m.model_ = neural::MlpNetwork::read(in);
      break;
    case ModelKind::Narx:
      m.model_ = neural::NarxModel::read(in);
      break;
  }
  return m;
}

// ---------------------------------------------------------------------------

std::vector<double> target_values(const data::Dataset& ds, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(ds.at(r, ds.schema().target_index()));
  return out;
}

std::vector<double> pick(std::span<const double> values, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(values[r]);
  return out;
}

HoldoutRun train_and_evaluate(const data::Dataset& ds, const ModelConfig& config,
                              const std::array<double, 3>& split, std::uint64_t seed) {
  HoldoutRun run;
  if (config.kind == ModelKind::Narx) {
    std::vector<std::size_t> all(ds.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    ModelConfig c = config;
    run.model = fit(ds, all, {}, c, seed);
    const auto pred = run.model.predict(ds);
    const auto q = run.model.narx()->delays();
    // Supervised row r predicts series index r + q.
    auto shift = [&](const std::vector<std::size_t>& rows) {
      std::vector<std::size_t> out;
      for (auto r : rows) out.push_back(r + q);
      return out;
    };
    run.partition = *run.model.narx_partition();
    const auto train_rows = shift(run.partition.train);
    const auto test_rows = shift(run.partition.test);
    if (test_rows.empty()) throw Error(ErrorCode::DegenerateSplit, "test share is empty");
    run.train = metrics::evaluate(pick(pred, train_rows), target_values(ds, train_rows));
    run.test = metrics::evaluate(pick(pred, test_rows), target_values(ds, test_rows));
    return run;
  }

  run.partition = data::split_holdout(ds, split, derive_seed(seed, 0));
  if (run.partition.test.empty()) throw Error(ErrorCode::DegenerateSplit, "test share is empty");
  run.model = fit(ds, run.partition.train, run.partition.validation, config, derive_seed(seed, 1));
  const auto pred = run.model.predict(ds);
  run.train = metrics::evaluate(pick(pred, run.partition.train), target_values(ds, run.partition.train));
  run.test = metrics::evaluate(pick(pred, run.partition.test), target_values(ds, run.partition.test));
  return run;
}

CrossValidation cross_validate(const data::Dataset& ds, const ModelConfig& config, std::size_t k,
                               std::uint64_t seed) {
  if (config.kind == ModelKind::Narx) {
    throw Error(ErrorCode::Config, "cross-validation is not defined for NARX models");
  }
  const auto folds = data::kfold(ds, k, derive_seed(seed, 0));
  CrossValidation cv;
  for (std::size_t f = 0; f < k; ++f) {
    const auto test = folds.members(f);
    const auto train = folds.complement(f);
    std::vector<std::size_t> validation;
    std::vector<std::size_t> fit_rows = train;
    if (config.kind == ModelKind::Mlp) {
      // Hold a share of the training folds back for early stopping.
      const auto inner = data::split_holdout(train.size(), {0.8, 0.2, 0.0}, derive_seed(seed, 1000 + f));
      validation = pick_indices(train, inner.validation);
      fit_rows = pick_indices(train, inner.train);
    }
    const auto model = fit(ds, fit_rows, validation, config, derive_seed(seed, f + 1));
    const auto pred = model.predict(ds);
    const auto report = metrics::evaluate(pick(pred, test), target_values(ds, test));
    cv.fold_mse.push_back(report.mse);
    cv.fold_size.push_back(test.size());
  }
  double sum = 0.0;
  for (double v : cv.fold_mse) sum += v;
  cv.cv = sum / static_cast<double>(cv.fold_mse.size());
  return cv;
}

metrics::RepeatedReport repeated_holdout(const data::Dataset& ds, const ModelConfig& config,
                                         const std::array<double, 3>& split, std::size_t rounds,
                                         std::uint64_t seed) {
  return metrics::repeated_evaluation(
      [&](std::uint64_t round_seed) {
        const auto run = train_and_evaluate(ds, config, split, round_seed);
        std::vector<std::size_t> test = run.partition.test;
        const auto all = run.model.predict(ds);
        if (config.kind == ModelKind::Narx) {
          const auto q = run.model.narx()->delays();
          for (auto& r : test) r += q;
        }
        return std::make_pair(pick(all, test), target_values(ds, test));
      },
      rounds, seed);
}

CarbonationComparison compare_with_baseline(const data::Dataset& ds, const CarbonationSetup& setup,
                                            const ModelConfig& config, std::uint64_t seed) {
  if (config.kind == ModelKind::Narx) {
    throw Error(ErrorCode::Config, "baseline comparison needs a tabular model");
  }
  if (!(setup.test_fraction > 0.0 && setup.test_fraction < 1.0)) {
    throw Error(ErrorCode::Config, "test fraction must lie in (0, 1)");
  }
  const auto& schema = ds.schema();
  const auto specimen_col = schema.index_of(setup.specimen_column);
  const auto age_col = schema.index_of(setup.age_column);
  const auto target = schema.target_index();

  std::vector<std::string> specimens;
  std::map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const auto name = ds.cell_text(r, specimen_col);
    if (name.empty()) throw Error(ErrorCode::MissingValue, "specimen missing in row " + std::to_string(r + 1));
    auto& list = rows_of[name];
    if (list.empty()) specimens.push_back(name);
    list.push_back(r);
  }
  if (specimens.size() < 2) throw Error(ErrorCode::DegenerateSplit, "need at least two specimens");

  Rng rng(derive_seed(seed, 0));
  rng.shuffle(std::span<std::string>(specimens));
  auto n_test = static_cast<std::size_t>(std::llround(setup.test_fraction * static_cast<double>(specimens.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, specimens.size() - 1);

  CarbonationComparison out;
  out.test_specimens.assign(specimens.begin(), specimens.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(out.test_specimens.begin(), out.test_specimens.end());
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < specimens.size(); ++i) {
    auto& dest = i < n_test ? test_rows : train_rows;
    const auto& list = rows_of[specimens[i]];
    dest.insert(dest.end(), list.begin(), list.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  std::vector<std::size_t> validation;
  if (config.kind == ModelKind::Mlp) {
    const auto inner = data::split_holdout(train_rows.size(), {0.8, 0.2, 0.0}, derive_seed(seed, 2));
    validation = pick_indices(train_rows, inner.validation);
    train_rows = pick_indices(train_rows, inner.train);
  }
  const auto model = fit(ds, train_rows, validation, config, derive_seed(seed, 1));
  const auto pred = model.predict(ds);

  std::vector<baselines::CarbonationObservation> obs;
  for (auto r : test_rows) {
    if (ds.missing(r, target) || ds.missing(r, age_col)) continue;
    obs.push_back({ds.cell_text(r, specimen_col), ds.at(r, age_col), ds.at(r, target), pred[r]});
  }
  out.table = baselines::baseline_comparison(obs, setup.fit_age, std::string(kind_name(config.kind)));
  return out;
}

}  // namespace duracast::workflow
