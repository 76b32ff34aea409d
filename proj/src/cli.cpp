#include "duracast/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>

#include "duracast/baselines.hpp"
#include "duracast/data.hpp"
#include "duracast/durability.hpp"
#include "duracast/ensemble.hpp"
#include "duracast/error.hpp"
#include "duracast/io.hpp"
#include "duracast/metrics.hpp"
#include "duracast/narx.hpp"
#include "duracast/random.hpp"
#include "duracast/workflow.hpp"

namespace duracast::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string data;
  std::string schema;
  std::string out;
  std::string preset;
  std::uint64_t seed = 0;
};

struct ModelFlags {
  std::string model = "bag";
  std::size_t trees = 150;
  double rate = 0.1;
  std::size_t min_leaf = 0;
  std::size_t max_splits = 0;
  std::size_t features_per_split = 0;
  std::size_t surrogates = 5;
  std::vector<std::size_t> hidden = {10};
  std::size_t delays = 2;
  std::size_t restarts = 5;
  std::size_t patience = 6;
  std::size_t max_epochs = 1000;
  double mu = 1e-3;
  double learning_rate = 0.0;
  std::string learning_rate_role = "ignored";
  std::string input_column;
  std::vector<double> split;
  std::size_t threads = 1;

  // Every subcommand registers its own copy of each flag.
  std::multimap<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    const auto [lo, hi] = opts.equal_range(name);
    return std::any_of(lo, hi, [](const auto& kv) { return kv.second->count() > 0; });
  }
};

struct Settings {
  Common common;
  ModelFlags model;
  // ingest
  std::size_t fill_window = 0;
  std::vector<std::string> percent_columns;
  // predict
  std::string model_path;
  std::string mode = "open";
  std::size_t origin = 0;
  std::size_t horizon = 0;
  // crossval / report
  std::size_t k = 10;
  std::size_t rounds = 10;
  // importance
  std::vector<std::string> filters;
  std::vector<std::string> drops;
  std::size_t iterations = 10;
  std::size_t permutation_rounds = 1;
  std::string scaling = "std";
  CLI::Option* iterations_opt = nullptr;
  // baseline
  std::string specimen_column = "specimen";
  std::string age_column = "age";
  double fit_age = 0.0;
  CLI::Option* fit_age_opt = nullptr;
  double test_fraction = 0.3;
  // risk
  std::string kind = "all";
  double width = 1.0;
  std::size_t smooth = 1;
  bool rh_percent = false;
  std::size_t cell_size = 8;
};

void add_common(CLI::App* app, Common& c, bool needs_schema) {
  app->add_option("--data", c.data, "input CSV")->required();
  auto* schema = app->add_option("--schema", c.schema, "schema file");
  if (needs_schema) schema->required();
  app->add_option("--out", c.out, "output directory")->required();
  app->add_option("--seed", c.seed, "random seed (DURACAST_SEED overrides)");
}

void add_model_flags(CLI::App* app, ModelFlags& m, Common& c) {
  app->add_option("--preset", c.preset, "caprm-bag | caprm-boost | chloride-vi | hygro-narx");
  auto reg = [&](const char* key, CLI::Option* opt) {
    m.opts.emplace(key, opt);
    return opt;
  };
  reg("model", app->add_option("--model", m.model, "tree | bag | boost | mlp | narx"));
  reg("trees", app->add_option("--trees", m.trees, "ensemble size"))->check(CLI::PositiveNumber);
  reg("rate", app->add_option("--rate", m.rate, "boosting learning rate"));
  reg("min_leaf", app->add_option("--min-leaf", m.min_leaf, "minimum leaf size"));
  reg("max_splits", app->add_option("--max-splits", m.max_splits, "split budget per tree"));
  reg("features_per_split",
      app->add_option("--features-per-split", m.features_per_split, "random subspace size"));
  reg("surrogates", app->add_option("--surrogates", m.surrogates, "surrogate splits kept per node"));
  reg("hidden", app->add_option("--hidden", m.hidden, "hidden layer sizes"));
  reg("delays", app->add_option("--delays", m.delays, "NARX delay order"))->check(CLI::PositiveNumber);
  reg("restarts", app->add_option("--restarts", m.restarts, "NARX initializations tried"))
      ->check(CLI::PositiveNumber);
  reg("patience", app->add_option("--patience", m.patience, "validation failures before stopping"));
  reg("max_epochs", app->add_option("--max-epochs", m.max_epochs, "LM epoch limit"));
  reg("mu", app->add_option("--mu", m.mu, "initial LM damping"));
  reg("learning_rate", app->add_option("--learning-rate", m.learning_rate, "LM learning rate"));
  reg("learning_rate_role", app->add_option("--learning-rate-role", m.learning_rate_role,
                                            "ignored | initial-damping | step-scale"));
  reg("input_column", app->add_option("--input-column", m.input_column, "NARX exogenous column"));
  reg("split", app->add_option("--split", m.split, "train validation test shares"))->expected(3);
  reg("threads", app->add_option("--threads", m.threads, "worker threads for bagging"));
}

void apply_preset(Settings& s) {
  auto& m = s.model;
  const auto& name = s.common.preset;
  if (name.empty()) return;
  auto set = [&](const std::string& key, auto& field, auto value) {
    if (!m.given(key)) field = value;
  };
  if (name == "caprm-bag") {
    set("model", m.model, std::string("bag"));
    set("trees", m.trees, std::size_t{150});
    set("min_leaf", m.min_leaf, std::size_t{5});
  } else if (name == "caprm-boost") {
    set("model", m.model, std::string("boost"));
    set("trees", m.trees, std::size_t{150});
    set("rate", m.rate, 0.1);
    set("max_splits", m.max_splits, std::size_t{10});
  } else if (name == "chloride-vi") {
    set("model", m.model, std::string("bag"));
    set("trees", m.trees, std::size_t{100});
    set("min_leaf", m.min_leaf, std::size_t{5});
    if (s.iterations_opt == nullptr || s.iterations_opt->count() == 0) s.iterations = 10;
  } else if (name == "hygro-narx") {
    set("model", m.model, std::string("narx"));
    set("delays", m.delays, std::size_t{2});
    set("hidden", m.hidden, std::vector<std::size_t>{10});
    set("split", m.split, std::vector<double>{0.75, 0.15, 0.10});
  } else {
    throw Error(ErrorCode::Config, "unknown preset '" + name + "'");
  }
}

void apply_seed_override(Common& c) {
  if (const char* env = std::getenv("DURACAST_SEED")) {
    double v = 0;
    if (!parse_double(env, v) || v < 0 || v != std::floor(v) || v > 1.8e19) {
      throw Error(ErrorCode::Config, std::string("DURACAST_SEED is not an unsigned integer: ") + env);
    }
    c.seed = std::strtoull(env, nullptr, 10);
  }
}

workflow::ModelConfig model_config(const ModelFlags& f) {
  workflow::ModelConfig c;
  c.kind = workflow::parse_model_kind(f.model);
  c.trees = f.trees;
  c.rate = f.rate;
  if (f.min_leaf > 0) c.min_leaf = f.min_leaf;
  if (f.given("max_splits") || f.max_splits > 0) c.max_splits = f.max_splits;
  if (f.features_per_split > 0) c.features_per_split = f.features_per_split;
  c.max_surrogates = f.surrogates;
  c.hidden = f.hidden;
  c.delays = f.delays;
  c.restarts = f.restarts;
  c.lm.patience = f.patience;
  c.lm.max_epochs = f.max_epochs;
  c.lm.mu = f.mu;
  if (f.given("learning_rate")) c.lm.learning_rate = f.learning_rate;
  if (f.learning_rate_role == "ignored") {
    c.lm.learning_rate_role = neural::LearningRateRole::Ignored;
  } else if (f.learning_rate_role == "initial-damping") {
    c.lm.learning_rate_role = neural::LearningRateRole::InitialDamping;
  } else if (f.learning_rate_role == "step-scale") {
    c.lm.learning_rate_role = neural::LearningRateRole::StepScale;
  } else {
    throw Error(ErrorCode::Config, "unknown learning-rate role '" + f.learning_rate_role + "'");
  }
  c.input_column = f.input_column;
  c.threads = std::max<std::size_t>(1, f.threads);
  return c;
}

std::array<double, 3> split_of(const ModelFlags& f, workflow::ModelKind kind) {
  if (f.split.empty()) return workflow::default_split(kind);
  if (f.split.size() != 3) throw Error(ErrorCode::Config, "--split needs three shares");
  return {f.split[0], f.split[1], f.split[2]};
}

json model_json(const ModelFlags& f, const workflow::ModelConfig& c, workflow::ModelKind kind) {
  json j;
  j["model"] = std::string(workflow::kind_name(c.kind));
  j["trees"] = c.trees;
  j["rate"] = c.rate;
  j["min_leaf"] = c.min_leaf ? json(*c.min_leaf) : json("default");
  j["max_splits"] = c.max_splits ? json(*c.max_splits) : json("default");
  j["features_per_split"] = c.features_per_split ? json(*c.features_per_split) : json("default");
  j["surrogates"] = c.max_surrogates;
  j["hidden"] = c.hidden;
  j["delays"] = c.delays;
  j["restarts"] = c.restarts;
  j["patience"] = c.lm.patience;
  j["max_epochs"] = c.lm.max_epochs;
  j["mu"] = c.lm.mu;
  j["learning_rate"] = c.lm.learning_rate ? json(*c.lm.learning_rate) : json(nullptr);
  j["learning_rate_role"] = f.learning_rate_role;
  j["input_column"] = c.input_column;
  const auto sp = split_of(f, kind);
  j["split"] = {sp[0], sp[1], sp[2]};
  j["threads"] = c.threads;
  return j;
}

json common_json(const std::string& command, const Common& c) {
  json j;
  j["command"] = command;
  j["data"] = c.data;
  j["schema"] = c.schema;
  j["out"] = c.out;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  return j;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::Io, "cannot create output directory " + dir);
  }
  return fs::path(dir);
}

void write_config(const fs::path& dir, const json& config) {
  write_file_atomic(dir / "config.json", config.dump(2) + "\n");
}

data::Dataset load_dataset(const Common& c) {
  return data::ingest_csv(c.data, data::Schema::load(c.schema));
}

std::string predictions_csv(const data::Dataset& ds, const std::vector<double>& pred,
                            const data::Holdout* part) {
  std::vector<std::string> role(ds.rows(), "");
  if (part) {
    for (auto r : part->train) role[r] = "train";
    for (auto r : part->validation) role[r] = "validation";
    for (auto r : part->test) role[r] = "test";
  }
  const auto target = ds.schema().target_index();
  std::string out = part ? "row,split,target,prediction\n" : "row,target,prediction\n";
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    out += std::to_string(r + 1) + ",";
    if (part) out += role[r] + ",";
    out += ds.cell_text(r, target) + "," + (data::is_missing(pred[r]) ? "" : format_double(pred[r])) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_ingest(Settings& s, std::ostream& out) {
  auto ds = load_dataset(s.common);
  const auto& schema = ds.schema();
  std::vector<double> values(ds.values().begin(), ds.values().end());
  const std::size_t cols = ds.cols();
  for (const auto& name : s.percent_columns) {
    const auto c = schema.index_of(name);
    if (schema.column(c).kind != data::ColumnKind::Continuous) {
      throw Error(ErrorCode::SchemaViolation, "percent column " + name + " is not continuous");
    }
    for (std::size_t r = 0; r < ds.rows(); ++r) values[r * cols + c] /= 100.0;
  }
  std::size_t missing_before = 0;
  for (double v : values) missing_before += data::is_missing(v) ? 1 : 0;
  if (s.fill_window > 0) {
    data::SmoothingOptions opts;
    opts.half_window = s.fill_window;
    for (auto c : schema.input_indices()) {
      if (schema.column(c).kind != data::ColumnKind::Continuous) continue;
      std::vector<double> col(ds.rows());
      for (std::size_t r = 0; r < ds.rows(); ++r) col[r] = values[r * cols + c];
      if (std::none_of(col.begin(), col.end(), data::is_missing)) continue;
      col = data::moving_average_fill(col, opts);
      for (std::size_t r = 0; r < ds.rows(); ++r) values[r * cols + c] = col[r];
    }
  }
  std::size_t missing_after = 0;
  for (double v : values) missing_after += data::is_missing(v) ? 1 : 0;
  const data::Dataset cleaned(schema, std::move(values));

  const auto dir = prepare_out(s.common.out);
  write_file_atomic(dir / "data.csv", data::to_csv(cleaned));
  write_file_atomic(dir / "schema.txt", schema.to_text());
  std::string summary = "metric,value\n";
  summary += "rows," + std::to_string(cleaned.rows()) + "\n";
  summary += "columns," + std::to_string(cleaned.cols()) + "\n";
  summary += "missing_before," + std::to_string(missing_before) + "\n";
  summary += "missing_after," + std::to_string(missing_after) + "\n";
  write_file_atomic(dir / "ingest.csv", summary);
  auto config = common_json("ingest", s.common);
  config["fill_window"] = s.fill_window;
  config["percent_columns"] = s.percent_columns;
  write_config(dir, config);
  out << "ingested " << cleaned.rows() << " rows, " << missing_before - missing_after
      << " cells filled\n";
  return 0;
}

int cmd_train(Settings& s, std::ostream& out) {
  const auto ds = load_dataset(s.common);
  const auto config = model_config(s.model);
  const auto split = split_of(s.model, config.kind);
  const auto run = workflow::train_and_evaluate(ds, config, split, s.common.seed);

  const auto dir = prepare_out(s.common.out);
  write_file_atomic(dir / "model.txt", run.model.to_text());
  write_file_atomic(dir / "report.csv", metrics::report_csv(run.test));
  write_file_atomic(dir / "train_report.csv", metrics::report_csv(run.train));
  const auto pred = run.model.predict(ds);
  if (config.kind == workflow::ModelKind::Narx) {
    write_file_atomic(dir / "predictions.csv", predictions_csv(ds, pred, nullptr));
  } else {
    write_file_atomic(dir / "predictions.csv", predictions_csv(ds, pred, &run.partition));
  }
  auto cfg = common_json("train", s.common);
  cfg["model_config"] = model_json(s.model, config, config.kind);
  write_config(dir, cfg);
  out << "test mse=" << format_double(run.test.mse) << " mae=" << format_double(run.test.mae)
      << " rmse=" << format_double(run.test.rmse) << "\n";
  return 0;
}

int cmd_predict(Settings& s, std::ostream& out) {
  const auto model = workflow::Model::parse(read_file(s.model_path));
  const auto ds = data::ingest_csv(s.common.data, model.schema());
  const auto dir = prepare_out(s.common.out);
  json cfg = common_json("predict", s.common);
  cfg["model_path"] = s.model_path;

  if (model.kind() == workflow::ModelKind::Narx && s.horizon > 0) {
    const auto mode = s.mode == "closed" ? neural::NarxMode::ClosedLoop : neural::NarxMode::OpenLoop;
    if (s.mode != "open" && s.mode != "closed") throw Error(ErrorCode::Config, "mode must be open or closed");
    const auto u = ds.column(model.narx_input());
    const auto y = ds.column(ds.schema().target_index());
    const auto pred = neural::narx_predict(*model.narx(), u, y, s.origin, s.horizon, mode);
    std::string csv = "step,index,prediction\n";
    for (std::size_t k = 0; k < pred.size(); ++k) {
      csv += std::to_string(k + 1) + "," + std::to_string(s.origin + k + 1) + "," +
             format_double(pred[k]) + "\n";
    }
    write_file_atomic(dir / "predictions.csv", csv);
    cfg["mode"] = s.mode;
    cfg["origin"] = s.origin;
    cfg["horizon"] = s.horizon;
    write_config(dir, cfg);
    out << "predicted " << pred.size() << " steps\n";
    return 0;
  }

  const auto pred = model.predict(ds);
  write_file_atomic(dir / "predictions.csv", predictions_csv(ds, pred, nullptr));
  std::vector<double> p, t;
  const auto target = ds.schema().target_index();
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    if (!data::is_missing(pred[r]) && !ds.missing(r, target)) {
      p.push_back(pred[r]);
      t.push_back(ds.at(r, target));
    }
  }
  if (!p.empty()) write_file_atomic(dir / "report.csv", metrics::report_csv(metrics::evaluate(p, t)));
  write_config(dir, cfg);
  out << "predicted " << pred.size() << " rows\n";
  return 0;
}

int cmd_crossval(Settings& s, std::ostream& out) {
  const auto ds = load_dataset(s.common);
  const auto config = model_config(s.model);
  const auto cv = workflow::cross_validate(ds, config, s.k, s.common.seed);
  const auto dir = prepare_out(s.common.out);
  std::string csv = "fold,n,mse\n";
  for (std::size_t f = 0; f < cv.fold_mse.size(); ++f) {
    csv += std::to_string(f + 1) + "," + std::to_string(cv.fold_size[f]) + "," +
           format_double(cv.fold_mse[f]) + "\n";
  }
  csv += "cv," + std::to_string(ds.rows()) + "," + format_double(cv.cv) + "\n";
  write_file_atomic(dir / "cv.csv", csv);
  auto cfg = common_json("crossval", s.common);
  cfg["k"] = s.k;
  cfg["model_config"] = model_json(s.model, config, config.kind);
  write_config(dir, cfg);
  out << "cv mse=" << format_double(cv.cv) << " over " << s.k << " folds\n";
  return 0;
}

int cmd_importance(Settings& s, std::ostream& out) {
  const auto ds = load_dataset(s.common);
  const auto config = model_config(s.model);
  ensemble::Scenario scenario;
  for (const auto& f : s.filters) scenario.filters.push_back(data::parse_condition(f));
  scenario.drop_columns = s.drops;
  if (s.iterations < 1) throw Error(ErrorCode::Config, "need at least one iteration");

  ensemble::ImportanceReport report;
  if (config.kind == workflow::ModelKind::Bag) {
    ensemble::ScenarioConfig sc;
    sc.bag.trees = config.trees;
    sc.bag.stop.min_leaf = config.min_leaf.value_or(5);
    sc.bag.stop.min_branch = std::max<std::size_t>(10, 2 * sc.bag.stop.min_leaf);
    sc.bag.stop.max_splits = config.max_splits;
    sc.bag.stop.max_surrogates = config.max_surrogates;
    sc.bag.features_per_split = config.features_per_split;
    sc.bag.seed = s.common.seed;
    sc.bag.threads = config.threads;
    sc.permutation.iterations = s.permutation_rounds;
    sc.permutation.seed = derive_seed(s.common.seed, 7);
    if (s.scaling == "std") {
      sc.permutation.scaling = ensemble::PermutationScaling::StdOverTrees;
    } else if (s.scaling == "stderr") {
      sc.permutation.scaling = ensemble::PermutationScaling::StdError;
    } else {
      throw Error(ErrorCode::Config, "scaling must be std or stderr");
    }
    sc.iterations = s.iterations;
    report = ensemble::scenario_importance(ds, scenario, sc);
  } else if (config.kind == workflow::ModelKind::Boost) {
    data::Dataset selected = ds;
    if (!scenario.filters.empty()) {
      selected = data::filter_rows(ds, data::make_predicate(ds.schema(), scenario.filters));
    }
    if (!scenario.drop_columns.empty()) selected = data::drop_columns(selected, scenario.drop_columns);
    const auto design = data::to_design(selected);
    for (std::size_t it = 0; it < s.iterations; ++it) {
      ensemble::BoostOptions bo;
      bo.trees = config.trees;
      bo.learning_rate = config.rate;
      bo.stop.min_leaf = config.min_leaf.value_or(1);
      bo.stop.min_branch = std::max<std::size_t>(10, 2 * bo.stop.min_leaf);
      bo.stop.max_splits = config.max_splits.value_or(10);
      bo.stop.max_surrogates = config.max_surrogates;
      bo.seed = derive_seed(s.common.seed, it);
      const auto single = ensemble::splitgain_importance(ensemble::train_lsboost(design, bo), design);
      if (it == 0) {
        report = single;
        for (auto& v : report.variables) v.splitgain = 0.0;
        report.seeds.clear();
      }
      report.seeds.push_back(bo.seed);
      for (std::size_t j = 0; j < design.cols(); ++j) {
        report.variables[j].splitgain += single.variables[j].splitgain / static_cast<double>(s.iterations);
      }
    }
    report.iterations = s.iterations;
  } else {
    throw Error(ErrorCode::Config, "importance needs a bag or boost model");
  }

  const auto dir = prepare_out(s.common.out);
  write_file_atomic(dir / "importance.csv", report.to_csv());
  auto cfg = common_json("importance", s.common);
  cfg["model_config"] = model_json(s.model, config, config.kind);
  cfg["filters"] = s.filters;
  cfg["drop"] = s.drops;
  cfg["iterations"] = s.iterations;
  cfg["permutation_rounds"] = s.permutation_rounds;
  cfg["scaling"] = s.scaling;
  write_config(dir, cfg);
  const auto order = report.ranking();
  out << "top variable " << report.variables[order.front()].name << ", top-6 share "
      << format_double(report.top_k_share(6)) << "\n";
  return 0;
}

int cmd_baseline(Settings& s, std::ostream& out, std::ostream& err) {
  const auto ds = load_dataset(s.common);
  const auto config = model_config(s.model);
  workflow::CarbonationSetup setup;
  setup.specimen_column = s.specimen_column;
  setup.age_column = s.age_column;
  if (s.fit_age_opt->count() > 0) setup.fit_age = s.fit_age;
  setup.test_fraction = s.test_fraction;
  const auto cmp = workflow::compare_with_baseline(ds, setup, config, s.common.seed);
  for (const auto& w : cmp.table.warnings) err << "warning: " << w << "\n";

  const auto dir = prepare_out(s.common.out);
  write_file_atomic(dir / "baseline.csv", cmp.table.to_csv());
  auto cfg = common_json("baseline", s.common);
  cfg["model_config"] = model_json(s.model, config, config.kind);
  cfg["specimen_column"] = s.specimen_column;
  cfg["age_column"] = s.age_column;
  cfg["fit_age"] = setup.fit_age ? json(*setup.fit_age) : json("earliest");
  cfg["test_fraction"] = s.test_fraction;
  cfg["test_specimens"] = cmp.test_specimens;
  write_config(dir, cfg);
  const auto label = std::string(workflow::kind_name(config.kind));
  out << "baseline mse=" << format_double(cmp.table.find("baseline", "all").report.mse) << " "
      << label << " mse=" << format_double(cmp.table.find(label, "all").report.mse) << "\n";
  return 0;
}

std::vector<durability::ElementSeries> read_hygro(const std::string& path, bool percent) {
  const auto records = parse_csv_records(read_file(path));
  if (records.empty()) throw Error(ErrorCode::Parse, path + ": empty file");
  const auto& header = records[0];
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::SchemaViolation, path + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto ce = col("element"), ct = col("time"), ctemp = col("temperature"), crh = col("rh");
  std::vector<durability::ElementSeries> series;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::Parse, path + ": row " + std::to_string(i + 1) + " has wrong field count");
    }
    auto number = [&](std::size_t c, bool allow_missing) {
      const auto text = trim(rec[c]);
      if (text.empty()) {
        if (!allow_missing) {
          throw Error(ErrorCode::MissingValue, path + ": row " + std::to_string(i + 1) + " lacks " + header[c]);
        }
        return data::kMissing;
      }
      double v = 0;
      if (!parse_double(text, v)) {
        throw Error(ErrorCode::Parse, path + ": row " + std::to_string(i + 1) + ", column " + header[c] +
                                          ": '" + std::string(text) + "' is not a number");
      }
      return v;
    };
    auto [it, added] = index.emplace(rec[ce], series.size());
    if (added) series.push_back({rec[ce], {}});
    double rh = number(crh, true);
    if (percent && !data::is_missing(rh)) rh /= 100.0;
    series[it->second].samples.push_back({number(ct, false), number(ctemp, true), rh});
  }
  return series;
}

int cmd_risk(Settings& s, std::ostream& out) {
  const auto series = read_hygro(s.common.data, s.rh_percent);
  durability::GridOptions opts;
  opts.width = s.width;
  opts.smoothing_half_window = s.smooth;
  std::vector<durability::RiskKind> kinds;
  if (s.kind == "all") {
    kinds = {durability::RiskKind::Corrosion, durability::RiskKind::Frost, durability::RiskKind::Chemical};
  } else {
    kinds = {durability::parse_kind(s.kind)};
  }
  const auto dir = prepare_out(s.common.out);
  for (auto kind : kinds) {
    const auto grid = durability::build_risk_grid(series, kind, opts);
    durability::render_grid(grid, dir / std::string(durability::kind_name(kind)), s.cell_size);
  }
  auto cfg = common_json("risk", s.common);
  cfg["kind"] = s.kind;
  cfg["width"] = s.width;
  cfg["smooth"] = s.smooth;
  cfg["rh_percent"] = s.rh_percent;
  cfg["cell_size"] = s.cell_size;
  write_config(dir, cfg);
  out << "rendered " << kinds.size() << " grid(s) for " << series.size() << " element(s)\n";
  return 0;
}

int cmd_report(Settings& s, std::ostream& out) {
  const auto ds = load_dataset(s.common);
  const auto config = model_config(s.model);
  const auto split = split_of(s.model, config.kind);
  const auto rep = workflow::repeated_holdout(ds, config, split, s.rounds, s.common.seed);
  const auto dir = prepare_out(s.common.out);
  write_file_atomic(dir / "report.csv", metrics::report_csv(rep));
  auto cfg = common_json("report", s.common);
  cfg["rounds"] = s.rounds;
  cfg["model_config"] = model_json(s.model, config, config.kind);
  write_config(dir, cfg);
  out << "mean test mse=" << format_double(rep.mean.mse) << " over " << s.rounds << " rounds\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Durability modelling toolkit: tree ensembles, LM networks, NARX, baselines, risk grids",
               "duracast"};
  app.require_subcommand(1);
  Settings s;

  auto* ingest = app.add_subcommand("ingest", "validate a CSV against a schema and write a clean copy");
  add_common(ingest, s.common, true);
  ingest->add_option("--fill-window", s.fill_window, "moving-average half window for gap filling (0 = off)");
  ingest->add_option("--percent-columns", s.percent_columns, "columns given in percent")->delimiter(',');

  auto* train = app.add_subcommand("train", "train a model and evaluate it on a held-out split");
  add_common(train, s.common, true);
  add_model_flags(train, s.model, s.common);

  auto* predict = app.add_subcommand("predict", "apply a saved model to a CSV");
  predict->add_option("--model", s.model_path, "model file")->required();
  predict->add_option("--data", s.common.data, "input CSV")->required();
  predict->add_option("--out", s.common.out, "output directory")->required();
  predict->add_option("--mode", s.mode, "NARX mode: open | closed");
  predict->add_option("--origin", s.origin, "NARX forecast origin (0-based row)");
  predict->add_option("--horizon", s.horizon, "NARX forecast steps (0 = one-step over all rows)");

  auto* crossval = app.add_subcommand("crossval", "K-fold cross-validation estimate");
  add_common(crossval, s.common, true);
  add_model_flags(crossval, s.model, s.common);
  crossval->add_option("--k", s.k, "number of folds")->check(CLI::Range(2, 1000000));

  auto* importance = app.add_subcommand("importance", "variable importance over repeated model builds");
  add_common(importance, s.common, true);
  add_model_flags(importance, s.model, s.common);
  importance->add_option("--filter", s.filters, "row condition such as depth<=4.5");
  importance->add_option("--drop", s.drops, "column to exclude");
  s.iterations_opt = importance->add_option("--iterations", s.iterations, "model builds averaged");
  importance->add_option("--permutation-rounds", s.permutation_rounds, "permutations per build");
  importance->add_option("--scaling", s.scaling, "std | stderr");

  auto* baseline = app.add_subcommand("baseline", "compare a model with the square-root-of-time fit");
  add_common(baseline, s.common, true);
  add_model_flags(baseline, s.model, s.common);
  baseline->add_option("--specimen-column", s.specimen_column, "specimen identifier column");
  baseline->add_option("--age-column", s.age_column, "age column");
  s.fit_age_opt = baseline->add_option("--fit-age", s.fit_age, "age used to fit k (earliest when omitted)");
  baseline->add_option("--test-fraction", s.test_fraction, "share of specimens held out");

  auto* risk = app.add_subcommand("risk", "corrosion, frost and chemical risk grids");
  add_common(risk, s.common, false);
  risk->add_option("--kind", s.kind, "corrosion | frost | chemical | all");
  risk->add_option("--width", s.width, "time-bin width");
  risk->add_option("--smooth", s.smooth, "moving-average half window (0 = off)");
  risk->add_flag("--rh-percent", s.rh_percent, "rh column is in percent");
  risk->add_option("--cell-size", s.cell_size, "pixels per cell")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "average test statistics over repeated splits");
  add_common(report, s.common, true);
  add_model_flags(report, s.model, s.common);
  report->add_option("--rounds", s.rounds, "number of rounds")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error code=config message=" << msg << "\n";
    return 2;
  }

  try {
    apply_seed_override(s.common);
    apply_preset(s);
    if (ingest->parsed()) return cmd_ingest(s, out);
    if (train->parsed()) return cmd_train(s, out);
    if (predict->parsed()) return cmd_predict(s, out);
    if (crossval->parsed()) return cmd_crossval(s, out);
    if (importance->parsed()) return cmd_importance(s, out);
    if (baseline->parsed()) return cmd_baseline(s, out, err);
    if (risk->parsed()) return cmd_risk(s, out);
    if (report->parsed()) return cmd_report(s, out);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error code=" << code_name(e.code()) << " message=" << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error code=internal message=" << msg << "\n";
    return 1;
  }
  return 1;
}

}  // namespace duracast::cli
