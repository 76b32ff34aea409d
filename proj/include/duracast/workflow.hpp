#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "duracast/baselines.hpp"
#include "duracast/data.hpp"
#include "duracast/ensemble.hpp"
#include "duracast/metrics.hpp"
#include "duracast/narx.hpp"
#include "duracast/neural.hpp"
#include "duracast/tree.hpp"

namespace duracast::workflow {

enum class ModelKind { Tree, Bag, Boost, Mlp, Narx };

std::string_view kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelConfig {
  ModelKind kind = ModelKind::Bag;
  std::size_t trees = 150;
  double rate = 0.1;
  /// Leaf size; 5 for bagging and 1 otherwise when empty.
  std::optional<std::size_t> min_leaf;
  /// Split budget; 10 for boosting and unlimited otherwise when empty.
  std::optional<std::size_t> max_splits;
  std::optional<std::size_t> features_per_split;
  std::size_t max_surrogates = 5;
  std::vector<std::size_t> hidden = {10};
  std::size_t delays = 2;
  /// NARX initializations; the most stable in closed loop is kept.
  std::size_t restarts = 5;
  neural::LmOptions lm;
  /// Exogenous column for NARX; the first input column when empty.
  std::string input_column;
  std::size_t threads = 1;
};

/// Train / validation / test shares used when none are configured.
std::array<double, 3> default_split(ModelKind kind);

/// A trained model together with everything needed to apply it to a raw
/// dataset of the same schema.
class Model {
 public:
  Model() = default;

  ModelKind kind() const noexcept { return kind_; }
  const data::Schema& schema() const { return *schema_; }

  /// One prediction per row. NARX models give open-loop one-step predictions
  /// with the first q rows missing.
  std::vector<double> predict(const data::Dataset& ds) const;

  const ensemble::EnsembleModel* ensemble() const { return std::get_if<ensemble::EnsembleModel>(&model_); }
  const tree::RegressionTree* tree() const { return std::get_if<tree::RegressionTree>(&model_); }
  const neural::MlpNetwork* network() const { return std::get_if<neural::MlpNetwork>(&model_); }
  const neural::NarxModel* narx() const { return std::get_if<neural::NarxModel>(&model_); }
  /// Index of the NARX exogenous column.
  std::size_t narx_input() const noexcept { return narx_input_; }
  /// Supervised-window partition used while training a NARX model (not
  /// persisted).
  const std::optional<data::Holdout>& narx_partition() const noexcept { return narx_partition_; }

  std::string to_text() const;
  static Model parse(const std::string& text);

  friend Model fit(const data::Dataset& ds, std::span<const std::size_t> train,
                   std::span<const std::size_t> validation, const ModelConfig& config,
                   std::uint64_t seed);

 private:
  ModelKind kind_ = ModelKind::Bag;
  std::optional<data::Schema> schema_;
  std::variant<std::monostate, tree::RegressionTree, ensemble::EnsembleModel, neural::MlpNetwork,
               neural::NarxModel>
      model_;
  /// Network models: ranges of the 1-of-N encoded columns.
  std::optional<data::Normalization> normalization_;
  std::size_t narx_input_ = 0;
  std::optional<data::Holdout> narx_partition_;
};

/// Trains on `train` rows. Only network models use `validation` (for early
/// stopping); NARX models use the rows as a contiguous series and split
/// their supervised windows internally.
Model fit(const data::Dataset& ds, std::span<const std::size_t> train,
          std::span<const std::size_t> validation, const ModelConfig& config, std::uint64_t seed);

std::vector<double> target_values(const data::Dataset& ds, std::span<const std::size_t> rows);
std::vector<double> pick(std::span<const double> values, std::span<const std::size_t> rows);

struct HoldoutRun {
  Model model;
  data::Holdout partition;
  metrics::EvalReport train;
  metrics::EvalReport test;
};

/// Splits, trains and evaluates on the test share.
HoldoutRun train_and_evaluate(const data::Dataset& ds, const ModelConfig& config,
                              const std::array<double, 3>& split, std::uint64_t seed);

struct CrossValidation {
  std::vector<double> fold_mse;
  std::vector<std::size_t> fold_size;
  double cv = 0.0;  ///< mean of the fold MSEs
};

CrossValidation cross_validate(const data::Dataset& ds, const ModelConfig& config, std::size_t k,
                               std::uint64_t seed);

/// Rounds of train_and_evaluate with derived seeds, averaged.
metrics::RepeatedReport repeated_holdout(const data::Dataset& ds, const ModelConfig& config,
                                         const std::array<double, 3>& split, std::size_t rounds,
                                         std::uint64_t seed);

struct CarbonationSetup {
  std::string specimen_column;
  std::string age_column;
  std::optional<double> fit_age;
  /// Share of specimens whose rows are held out for the comparison.
  double test_fraction = 0.3;
};

struct CarbonationComparison {
  baselines::Comparison table;
  std::vector<std::string> test_specimens;
};

/// Holds out whole specimens, trains the data-driven model on the rest and
/// compares it with the per-specimen square-root fit on the held-out rows.
CarbonationComparison compare_with_baseline(const data::Dataset& ds, const CarbonationSetup& setup,
                                            const ModelConfig& config, std::uint64_t seed);

}  // namespace duracast::workflow
