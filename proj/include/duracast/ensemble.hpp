#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duracast/data.hpp"
#include "duracast/tree.hpp"

namespace duracast::ensemble {

enum class EnsembleKind { Bagged, Boosted };

/// Trained tree ensemble. Bagged models average their trees; boosted models
/// sum the trees scaled by the learning rate.
class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(EnsembleKind kind, double learning_rate, std::vector<tree::RegressionTree> trees,
                std::vector<std::vector<bool>> in_bag, tree::StoppingCriteria stop,
                std::uint64_t seed, std::size_t arity);

  EnsembleKind kind() const noexcept { return kind_; }
  double learning_rate() const noexcept { return learning_rate_; }
  const std::vector<tree::RegressionTree>& trees() const noexcept { return trees_; }
  /// in_bag()[t][i]: row i was drawn at least once for tree t (bagged only).
  const std::vector<std::vector<bool>>& in_bag() const noexcept { return in_bag_; }
  const tree::StoppingCriteria& stopping() const noexcept { return stop_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t arity() const noexcept { return arity_; }

  /// Throws Shape on arity mismatch.
  double predict(std::span<const double> x) const;
  /// Prediction using only the first `count` trees.
  double predict_prefix(std::span<const double> x, std::size_t count) const;
  std::vector<double> predict_batch(const data::Design& design) const;

  /// Header (`ensemble 1`, kind, T, lambda, seed, rows) followed by the trees
  /// and one in-bag bit string per tree.
  std::string to_text() const;
  static EnsembleModel read(std::istream& in);
  static EnsembleModel parse(const std::string& text);

 private:
  EnsembleKind kind_ = EnsembleKind::Bagged;
  double learning_rate_ = 1.0;
  std::vector<tree::RegressionTree> trees_;
  std::vector<std::vector<bool>> in_bag_;
  tree::StoppingCriteria stop_;
  std::uint64_t seed_ = 0;
  std::size_t arity_ = 0;
};

/// Random-subspace size used by default for bagged regression: max(1, p/3).
std::size_t default_subspace(std::size_t features);

struct BagOptions {
  std::size_t trees = 150;
  /// Per-split stopping rules; bagged trees default to a leaf size of 5.
  tree::StoppingCriteria stop = {std::nullopt, 5, 10, std::nullopt, 5};
  /// Features tried per split. Empty selects default_subspace(p); set it to
  /// p for plain bagging.
  std::optional<std::size_t> features_per_split;
  std::uint64_t seed = 0;
  /// Worker threads; results do not depend on this.
  std::size_t threads = 1;
};

/// Each tree grows on an independent bootstrap sample of size N drawn with
/// a generator seeded from (seed, tree index).
EnsembleModel train_bagged(const data::Design& design, const BagOptions& options);

struct BoostOptions {
  std::size_t trees = 150;
  double learning_rate = 0.1;
  /// Weak learners default to at most 10 splits.
  tree::StoppingCriteria stop = {10, 1, 10, std::nullopt, 5};
  std::uint64_t seed = 0;
};

/// Least-squares boosting: start from f = 0 and r = y, then per stage fit a
/// tree to r, add it scaled by the learning rate and shrink r accordingly.
EnsembleModel train_lsboost(const data::Design& design, const BoostOptions& options);

/// Training MSE after every boosting stage (entry t uses the first t+1 trees).
std::vector<double> staged_training_mse(const EnsembleModel& model, const data::Design& design);

struct OobResult {
  double mse = 0.0;
  std::size_t covered = 0;
  std::size_t uncovered = 0;
};

/// Out-of-bag MSE over rows that were left out by at least one tree. Throws
/// NoCoverage when no row is ever out of bag. `design` must be the training
/// design.
OobResult oob_error(const EnsembleModel& model, const data::Design& design);

/// OOB MSE of the first t trees for t = 1..T (NaN while no row is covered).
std::vector<double> oob_error_curve(const EnsembleModel& model, const data::Design& design);

struct LeafSweepPoint {
  std::size_t leaf_size = 0;
  std::vector<double> oob_curve;
};

/// Grows one bagged ensemble per leaf size and reports each OOB curve.
std::vector<LeafSweepPoint> leaf_size_sweep(const data::Design& design,
                                            std::span<const std::size_t> leaf_sizes,
                                            const BagOptions& base);

// ---------------------------------------------------------------------------
// Variable importance.

enum class PermutationScaling {
  StdOverTrees,  ///< mean / std of the per-tree differences
  StdError,      ///< mean / (std / sqrt(T))
};

struct VariableScore {
  std::string name;
  double permutation = 0.0;
  double splitgain = 0.0;
  /// True when the variable never had out-of-bag presence in a split tree.
  bool no_oob_presence = false;
};

struct ImportanceReport {
  std::vector<VariableScore> variables;
  std::size_t iterations = 0;
  std::vector<std::uint64_t> seeds;
  bool has_permutation = false;

  /// Variable indices from most to least important (permutation score for
  /// bagged reports, split-gain otherwise; ties keep column order).
  std::vector<std::size_t> ranking() const;
  /// Sum of the top-k scores of the ranking measure divided by their total.
  double top_k_share(std::size_t k) const;
  /// `variable,permutation_score,splitgain_score,rank,cumulative_share`, where
  /// cumulative_share is top_k_share(rank).
  std::string to_csv() const;
};

struct PermutationOptions {
  std::size_t iterations = 10;
  std::uint64_t seed = 0;
  PermutationScaling scaling = PermutationScaling::StdOverTrees;
};

/// Per tree and variable: permute the variable within the tree's OOB rows
/// and take the OOB error increase (zero for variables the tree never splits
/// on). Scores are the mean over trees divided by their spread, averaged
/// over `iterations` permutation rounds. Split-gain scores are filled in too.
ImportanceReport permutation_importance(const EnsembleModel& model, const data::Design& design,
                                        const PermutationOptions& options);

/// Each internal node credits its risk reduction to the split variable and
/// reduction * max(association, 0) to every surrogate variable; credits are
/// summed per tree, averaged over trees and scaled to sum to one.
std::vector<double> splitgain_scores(const EnsembleModel& model);

ImportanceReport splitgain_importance(const EnsembleModel& model, const data::Design& design);

struct Scenario {
  std::vector<data::Condition> filters;
  std::vector<std::string> drop_columns;
};

struct ScenarioConfig {
  BagOptions bag;
  PermutationOptions permutation{1, 0, PermutationScaling::StdOverTrees};
  /// Independent model builds averaged into the report.
  std::size_t iterations = 10;
};

/// Filters rows, drops columns, then repeats (train_bagged +
/// permutation_importance) with per-iteration seeds and averages the scores.
ImportanceReport scenario_importance(const data::Dataset& ds, const Scenario& scenario,
                                     const ScenarioConfig& config);

}  // namespace duracast::ensemble
