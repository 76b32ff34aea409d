#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duracast/data.hpp"

namespace duracast::tree {

/// Binary test at an internal node. Continuous features go left when
/// `value < threshold`; nominal features go left when the level is in
/// `left_levels`.
struct SplitRule {
  std::size_t feature = 0;
  data::ColumnKind kind = data::ColumnKind::Continuous;
  double threshold = 0.0;
  std::vector<bool> left_levels;
  /// Direction for rows whose value (and every surrogate) is missing.
  bool missing_left = true;

  /// `value` must not be missing.
  bool goes_left(double value) const;
};

struct Surrogate {
  SplitRule rule;
  double association = 0.0;
};

struct Node {
  bool leaf = true;
  /// Mean of the training targets that reached this node.
  double value = 0.0;
  std::size_t n = 0;
  /// Sum of squared deviations from `value`.
  double risk = 0.0;

  // Internal nodes only.
  SplitRule rule;
  std::vector<Surrogate> surrogates;  ///< ordered by decreasing association
  std::size_t left = 0;
  std::size_t right = 0;
  double gain = 0.0;  ///< risk reduction of `rule`
};

struct StoppingCriteria {
  /// Defaults to N - 1 for the rows the tree is grown on.
  std::optional<std::size_t> max_splits;
  std::size_t min_leaf = 1;
  std::size_t min_branch = 10;
  /// Random feature subset size per split; all features when empty.
  std::optional<std::size_t> features_per_split;
  std::size_t max_surrogates = 5;

  /// Throws InvalidArgument unless min_leaf >= 1 and min_branch >= 2 * min_leaf.
  void validate() const;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<Node> nodes, std::size_t arity);

  /// Throws Shape on arity mismatch.
  double predict(std::span<const double> x) const;
  std::size_t leaf_of(std::span<const double> x) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  std::size_t arity() const noexcept { return arity_; }
  std::size_t leaf_count() const;
  /// Features that appear as a primary split anywhere in the tree.
  std::vector<bool> features_used() const;

  /// Versioned line format; doubles at 17 significant digits.
  std::string to_text() const;
  /// Reads one tree written by `to_text` from the stream.
  static RegressionTree read(std::istream& in);
  static RegressionTree parse(const std::string& text);

  friend bool operator==(const RegressionTree&, const RegressionTree&);

 private:
  std::vector<Node> nodes_;
  std::size_t arity_ = 0;
};

bool operator==(const SplitRule& a, const SplitRule& b);
bool operator==(const Surrogate& a, const Surrogate& b);
bool operator==(const Node& a, const Node& b);

/// Grows a least-squares regression tree on `rows` (duplicates allowed, as
/// in bootstrap samples) against `targets`. Inputs must be complete.
/// At each node the split with the largest risk reduction wins; ties go to
/// the lowest feature index, then the lowest threshold.
RegressionTree grow(const data::Design& design, std::span<const double> targets,
                    std::span<const std::size_t> rows, const StoppingCriteria& stop,
                    std::uint64_t seed);

RegressionTree grow(const data::Design& design, std::span<const std::size_t> rows,
                    const StoppingCriteria& stop, std::uint64_t seed);

/// Grows on every row of the design.
RegressionTree grow(const data::Design& design, const StoppingCriteria& stop, std::uint64_t seed);

/// Predictive association between the node's best split and a candidate
/// surrogate, computed over `rows` that have both features present:
///   (min(PL, PR) - (1 - PLL - PRR)) / min(PL, PR).
/// Empty when min(PL, PR) is zero.
std::optional<double> association(const data::Design& design, std::span<const std::size_t> rows,
                                  const SplitRule& best, const SplitRule& candidate);

struct NodeRisk {
  std::size_t node = 0;
  std::size_t feature = 0;
  double gain = 0.0;
  std::size_t n = 0;
};

/// One row per internal node, in node order.
std::vector<NodeRisk> prune_info(const RegressionTree& tree);

/// Sum of squared errors on `rows` of the design.
double training_sse(const RegressionTree& tree, const data::Design& design,
                    std::span<const double> targets, std::span<const std::size_t> rows);

}  // namespace duracast::tree
