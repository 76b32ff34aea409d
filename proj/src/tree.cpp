#include "duracast/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <sstream>

#include "duracast/error.hpp"
#include "duracast/io.hpp"
#include "duracast/random.hpp"

namespace duracast::tree {

namespace {

using data::ColumnKind;
using data::is_missing;

// Relative tolerance on risk reductions. A candidate has to beat the current
// best by more than this fraction of the node risk to replace it, which keeps
// tie-breaking stable against summation-order noise.
constexpr double kGainTolerance = 1e-10;

// Nominal features with at most this many levels get an exhaustive subset
// search; larger ones fall back to one-vs-rest.
constexpr std::size_t kExhaustiveLevels = 10;

std::optional<double> association_from_counts(std::size_t total, std::size_t left,
                                              std::size_t both_left, std::size_t both_right) {
  // Counts stay integral so that a surrogate no better than the majority
  // rule scores exactly zero.
  const std::size_t smaller = std::min(left, total - left);
  if (total == 0 || smaller == 0) return std::nullopt;
  const double disagree = static_cast<double>(total - both_left - both_right);
  return (static_cast<double>(smaller) - disagree) / static_cast<double>(smaller);
}

struct Candidate {
  SplitRule rule;
  double gain = 0.0;
  bool found = false;
};

double mean_of(std::span<const double> targets, std::span<const std::size_t> rows) {
  double sum = 0.0;
  for (auto r : rows) sum += targets[r];
  return sum / static_cast<double>(rows.size());
}

double sse_of(std::span<const double> targets, std::span<const std::size_t> rows, double mean) {
  double sse = 0.0;
  for (auto r : rows) {
    const double d = targets[r] - mean;
    sse += d * d;
  }
  return sse;
}

double split_gain(double sum_l, double n_l, double sum_r, double n_r) {
  const double diff = sum_l / n_l - sum_r / n_r;
  return n_l * n_r / (n_l + n_r) * diff * diff;
}

class Grower {
 public:
  Grower(const data::Design& design, std::span<const double> targets,
         const StoppingCriteria& stop, std::uint64_t seed)
      : design_(design), targets_(targets), stop_(stop), rng_(seed) {}

  RegressionTree run(std::span<const std::size_t> rows) {
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "cannot grow a tree on zero rows");
    stop_.validate();
    const std::size_t max_splits = stop_.max_splits.value_or(rows.size() - 1);

    std::vector<std::size_t> root_rows(rows.begin(), rows.end());
    std::sort(root_rows.begin(), root_rows.end());
    for (auto r : root_rows) {
      for (std::size_t f = 0; f < design_.cols(); ++f) {
        if (is_missing(design_.at(r, f))) {
          throw Error(ErrorCode::MissingValue,
                      "tree growth needs complete inputs (row " + std::to_string(r + 1) +
                          ", feature '" + design_.features[f].name + "')");
        }
      }
      if (!std::isfinite(targets_[r])) {
        throw Error(ErrorCode::MissingValue, "missing target at row " + std::to_string(r + 1));
      }
    }

    std::vector<Node> nodes;
    std::deque<std::pair<std::size_t, std::vector<std::size_t>>> queue;
    nodes.push_back(make_leaf(root_rows));
    queue.emplace_back(0, std::move(root_rows));
    std::size_t splits = 0;

    // Breadth-first so that a split budget trims the deepest levels first.
    while (!queue.empty()) {
      auto [id, node_rows] = std::move(queue.front());
      queue.pop_front();
      if (splits >= max_splits) continue;
      auto best = find_split(node_rows, nodes[id].risk);
      if (!best.found) continue;

      std::vector<std::size_t> left_rows;
      std::vector<std::size_t> right_rows;
      for (auto r : node_rows) {
        (best.rule.goes_left(design_.at(r, best.rule.feature)) ? left_rows : right_rows).push_back(r);
      }
      best.rule.missing_left = left_rows.size() >= right_rows.size();

      Node& node = nodes[id];
      node.leaf = false;
      node.rule = best.rule;
      node.gain = best.gain;
      node.surrogates = find_surrogates(node_rows, best.rule);
      node.left = nodes.size();
      node.right = nodes.size() + 1;
      nodes.push_back(make_leaf(left_rows));
      nodes.push_back(make_leaf(right_rows));
      queue.emplace_back(nodes.size() - 2, std::move(left_rows));
      queue.emplace_back(nodes.size() - 1, std::move(right_rows));
      ++splits;
    }
    return RegressionTree(std::move(nodes), design_.cols());
  }

 private:
  Node make_leaf(std::span<const std::size_t> rows) const {
    Node node;
    node.n = rows.size();
    node.value = mean_of(targets_, rows);
    node.risk = sse_of(targets_, rows, node.value);
    return node;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(design_.cols());
    std::iota(features.begin(), features.end(), std::size_t{0});
    const auto m = stop_.features_per_split;
    if (m && *m < features.size()) {
      for (std::size_t i = 0; i < *m; ++i) {
        std::swap(features[i], features[i + rng_.index(features.size() - i)]);
      }
      features.resize(std::max<std::size_t>(*m, 1));
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  Candidate find_split(const std::vector<std::size_t>& rows, double node_risk) {
    Candidate best;
    const std::size_t n = rows.size();
    if (n < stop_.min_branch || n < 2 * stop_.min_leaf) return best;
    const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(), [&](auto a, auto b) {
      return targets_[a] < targets_[b];
    });
    if (targets_[*lo] == targets_[*hi]) return best;

    const double tol = kGainTolerance * node_risk;
    best.gain = tol;
    auto consider = [&](double gain, const SplitRule& rule) {
      if (gain > best.gain + (best.found ? tol : 0.0)) {
        best.gain = gain;
        best.rule = rule;
        best.found = true;
      }
    };

    for (auto f : candidate_features()) {
      if (design_.features[f].kind == ColumnKind::Nominal) {
        search_nominal(rows, f, consider);
      } else {
        search_continuous(rows, f, consider);
      }
    }
    return best;
  }

  template <typename Consider>
  void search_continuous(const std::vector<std::size_t>& rows, std::size_t f, Consider& consider) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(rows.size());
    for (auto r : rows) pairs.emplace_back(design_.at(r, f), targets_[r]);
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double total = 0.0;
    for (const auto& p : pairs) total += p.second;
    const std::size_t n = pairs.size();
    double sum_l = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      sum_l += pairs[i].second;
      const std::size_t n_l = i + 1;
      if (pairs[i].first == pairs[i + 1].first) continue;
      if (n_l < stop_.min_leaf || n - n_l < stop_.min_leaf) continue;
      const double gain = split_gain(sum_l, static_cast<double>(n_l), total - sum_l,
                                     static_cast<double>(n - n_l));
      SplitRule rule;
      rule.feature = f;
      rule.kind = ColumnKind::Continuous;
      rule.threshold = midpoint(pairs[i].first, pairs[i + 1].first);
      consider(gain, rule);
    }
  }

  template <typename Consider>
  void search_nominal(const std::vector<std::size_t>& rows, std::size_t f, Consider& consider) {
    const std::size_t levels = design_.features[f].levels;
    std::vector<double> sums(levels, 0.0);
    std::vector<std::size_t> counts(levels, 0);
    for (auto r : rows) {
      const auto level = static_cast<std::size_t>(design_.at(r, f));
      sums[level] += targets_[r];
      counts[level] += 1;
    }
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < levels; ++l) {
      if (counts[l] > 0) present.push_back(l);
    }
    if (present.size() < 2) return;
    const std::size_t n = rows.size();
    double total = 0.0;
    for (double s : sums) total += s;

    auto evaluate = [&](const std::vector<bool>& left) {
      double sum_l = 0.0;
      std::size_t n_l = 0;
      for (auto l : present) {
        if (left[l]) {
          sum_l += sums[l];
          n_l += counts[l];
        }
      }
      if (n_l < stop_.min_leaf || n - n_l < stop_.min_leaf) return;
      const double gain = split_gain(sum_l, static_cast<double>(n_l), total - sum_l,
                                     static_cast<double>(n - n_l));
      SplitRule rule;
      rule.feature = f;
      rule.kind = ColumnKind::Nominal;
      rule.left_levels = left;
      consider(gain, rule);
    };

    if (levels <= kExhaustiveLevels) {
      // The first present level always goes left so each partition is seen once.
      const std::size_t k = present.size();
      for (std::uint32_t mask = 1; mask < (1u << k) - 1; mask += 2) {
        std::vector<bool> left(levels, false);
        for (std::size_t b = 0; b < k; ++b) {
          if (mask & (1u << b)) left[present[b]] = true;
        }
        evaluate(left);
      }
    } else {
      for (auto l : present) {
        std::vector<bool> left(levels, false);
        left[l] = true;
        evaluate(left);
      }
    }
  }

  std::vector<Surrogate> find_surrogates(const std::vector<std::size_t>& rows,
                                         const SplitRule& best) const {
    std::vector<Surrogate> found;
    if (stop_.max_surrogates == 0) return found;
    for (std::size_t k = 0; k < design_.cols(); ++k) {
      if (k == best.feature) continue;
      std::optional<Surrogate> top;
      auto consider = [&](const SplitRule& rule, std::optional<double> xi) {
        if (!xi) return;
        if (!top || *xi > top->association + 1e-12) top = Surrogate{rule, *xi};
      };
      if (design_.features[k].kind == ColumnKind::Nominal) {
        surrogate_nominal(rows, k, best, consider);
      } else {
        surrogate_continuous(rows, k, best, consider);
      }
      if (top && top->association > 0.0) found.push_back(std::move(*top));
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
      return a.association > b.association;
    });
    if (found.size() > stop_.max_surrogates) found.resize(stop_.max_surrogates);
    return found;
  }

  // Both surrogate searches count agreement incrementally and hand the counts
  // to association_from_counts, so the result matches `association` exactly.
  template <typename Consider>
  void surrogate_continuous(const std::vector<std::size_t>& rows, std::size_t k,
                            const SplitRule& best, Consider& consider) const {
    std::vector<std::pair<double, bool>> pairs;  // (x_k, best goes left)
    std::size_t left = 0;
    for (auto r : rows) {
      const double v = design_.at(r, k);
      const double xj = design_.at(r, best.feature);
      if (is_missing(v) || is_missing(xj)) continue;
      const bool lj = best.goes_left(xj);
      pairs.emplace_back(v, lj);
      if (lj) ++left;
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t total = pairs.size();
    std::size_t prefix_left = 0;   // best-left rows among x_k < threshold
    std::size_t prefix_right = 0;  // best-right rows among x_k < threshold
    for (std::size_t i = 0; i + 1 < total; ++i) {
      (pairs[i].second ? prefix_left : prefix_right) += 1;
      if (pairs[i].first == pairs[i + 1].first) continue;
      const std::size_t both_right = (total - left) - prefix_right;
      SplitRule rule;
      rule.feature = k;
      rule.kind = ColumnKind::Continuous;
      rule.threshold = midpoint(pairs[i].first, pairs[i + 1].first);
      consider(rule, association_from_counts(total, left, prefix_left, both_right));
    }
  }

  template <typename Consider>
  void surrogate_nominal(const std::vector<std::size_t>& rows, std::size_t k,
                         const SplitRule& best, Consider& consider) const {
    const std::size_t levels = design_.features[k].levels;
    std::vector<std::size_t> with_left(levels, 0);
    std::vector<std::size_t> with_right(levels, 0);
    std::size_t total = 0;
    std::size_t left = 0;
    for (auto r : rows) {
      const double v = design_.at(r, k);
      const double xj = design_.at(r, best.feature);
      if (is_missing(v) || is_missing(xj)) continue;
      const auto level = static_cast<std::size_t>(v);
      const bool lj = best.goes_left(xj);
      (lj ? with_left : with_right)[level] += 1;
      ++total;
      if (lj) ++left;
    }
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < levels; ++l) {
      if (with_left[l] + with_right[l] > 0) present.push_back(l);
    }
    if (present.size() < 2) return;
    auto emit = [&](const std::vector<bool>& subset) {
      std::size_t both_left = 0;
      std::size_t right_in_subset = 0;
      for (auto l : present) {
        if (!subset[l]) continue;
        both_left += with_left[l];
        right_in_subset += with_right[l];
      }
      SplitRule rule;
      rule.feature = k;
      rule.kind = ColumnKind::Nominal;
      rule.left_levels = subset;
      consider(rule, association_from_counts(total, left, both_left,
                                             (total - left) - right_in_subset));
    };
    if (levels <= kExhaustiveLevels) {
      // Orientation matters for a surrogate, so both halves of each
      // partition are tried.
      const std::size_t count = present.size();
      for (std::uint32_t mask = 1; mask < (1u << count) - 1; ++mask) {
        std::vector<bool> subset(levels, false);
        for (std::size_t b = 0; b < count; ++b) {
          if (mask & (1u << b)) subset[present[b]] = true;
        }
        emit(subset);
      }
    } else {
      for (auto l : present) {
        std::vector<bool> subset(levels, false);
        subset[l] = true;
        emit(subset);
      }
    }
  }

  static double midpoint(double a, double b) {
    const double mid = a + (b - a) / 2.0;
    return mid > a ? mid : b;
  }

  const data::Design& design_;
  std::span<const double> targets_;
  StoppingCriteria stop_;
  Rng rng_;
};

std::string bits_text(const std::vector<bool>& bits) {
  std::string out;
  for (bool b : bits) out.push_back(b ? '1' : '0');
  return out;
}

std::vector<bool> parse_bits(const std::string& text) {
  std::vector<bool> out;
  for (char c : text) {
    if (c != '0' && c != '1') throw Error(ErrorCode::Parse, "bad level set '" + text + "'");
    out.push_back(c == '1');
  }
  return out;
}

std::string rule_text(const SplitRule& rule) {
  if (rule.kind == ColumnKind::Nominal) {
    return "splitset " + std::to_string(rule.feature) + " " + bits_text(rule.left_levels);
  }
  return "split " + std::to_string(rule.feature) + " " + format_double(rule.threshold);
}

double read_double(std::istream& in) {
  std::string token;
  double v = 0;
  if (!(in >> token) || !parse_double(token, v)) {
    throw Error(ErrorCode::Parse, "expected a number, got '" + token + "'");
  }
  return v;
}

std::size_t read_size(std::istream& in) {
  long long v = -1;
  if (!(in >> v) || v < 0) throw Error(ErrorCode::Parse, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

void expect(std::istream& in, const char* keyword) {
  std::string token;
  if (!(in >> token) || token != keyword) {
    throw Error(ErrorCode::Parse, std::string("expected '") + keyword + "', got '" + token + "'");
  }
}

SplitRule read_rule(std::istream& in, const std::string& kind) {
  SplitRule rule;
  rule.feature = read_size(in);
  if (kind == "split") {
    rule.kind = ColumnKind::Continuous;
    rule.threshold = read_double(in);
  } else if (kind == "splitset") {
    rule.kind = ColumnKind::Nominal;
    std::string bits;
    in >> bits;
    rule.left_levels = parse_bits(bits);
  } else {
    throw Error(ErrorCode::Parse, "unknown rule kind '" + kind + "'");
  }
  return rule;
}

}  // namespace

// ---------------------------------------------------------------------------

bool SplitRule::goes_left(double value) const {
  if (kind == ColumnKind::Nominal) {
    const auto level = static_cast<std::size_t>(value);
    return level < left_levels.size() && left_levels[level];
  }
  return value < threshold;
}

void StoppingCriteria::validate() const {
  if (min_leaf < 1) throw Error(ErrorCode::InvalidArgument, "min_leaf must be at least 1");
  if (min_branch < 2 * min_leaf) {
    throw Error(ErrorCode::InvalidArgument, "min_branch must be at least 2 * min_leaf");
  }
  if (features_per_split && *features_per_split < 1) {
    throw Error(ErrorCode::InvalidArgument, "feature subset size must be at least 1");
  }
}

RegressionTree::RegressionTree(std::vector<Node> nodes, std::size_t arity)
    : nodes_(std::move(nodes)), arity_(arity) {
  if (nodes_.empty()) throw Error(ErrorCode::InvalidArgument, "a tree needs at least one node");
}

std::size_t RegressionTree::leaf_of(std::span<const double> x) const {
  if (x.size() != arity_) {
    throw Error(ErrorCode::Shape, "expected " + std::to_string(arity_) + " features, got " +
                                      std::to_string(x.size()));
  }
  std::size_t id = 0;
  while (!nodes_[id].leaf) {
    const Node& node = nodes_[id];
    const double v = x[node.rule.feature];
    bool left = node.rule.missing_left;
    if (!is_missing(v)) {
      left = node.rule.goes_left(v);
    } else {
      for (const auto& s : node.surrogates) {
        const double sv = x[s.rule.feature];
        if (!is_missing(sv)) {
          left = s.rule.goes_left(sv);
          break;
        }
      }
    }
    id = left ? node.left : node.right;
  }
  return id;
}

double RegressionTree::predict(std::span<const double> x) const { return nodes_[leaf_of(x)].value; }

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

std::vector<bool> RegressionTree::features_used() const {
  std::vector<bool> used(arity_, false);
  for (const auto& node : nodes_) {
    if (!node.leaf) used[node.rule.feature] = true;
  }
  return used;
}

std::string RegressionTree::to_text() const {
  std::string out = "tree 1\narity " + std::to_string(arity_) + "\nnodes " +
                    std::to_string(nodes_.size()) + "\n";
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    out += "node " + std::to_string(id) + " ";
    if (node.leaf) {
      out += "leaf " + format_double(node.value) + " " + std::to_string(node.n) + " risk " +
             format_double(node.risk) + "\n";
      continue;
    }
    out += rule_text(node.rule) + " left " + std::to_string(node.left) + " right " +
           std::to_string(node.right) + " n " + std::to_string(node.n) + " risk " +
           format_double(node.risk) + " value " + format_double(node.value) + " gain " +
           format_double(node.gain) + " missing " + (node.rule.missing_left ? "L" : "R") + "\n";
    for (const auto& s : node.surrogates) {
      out += "surrogate " + std::to_string(id) + " " + rule_text(s.rule) + " xi " +
             format_double(s.association) + "\n";
    }
  }
  out += "end\n";
  return out;
}

RegressionTree RegressionTree::read(std::istream& in) {
  expect(in, "tree");
  if (read_size(in) != 1) throw Error(ErrorCode::Parse, "unsupported tree format version");
  expect(in, "arity");
  const std::size_t arity = read_size(in);
  expect(in, "nodes");
  std::vector<Node> nodes(read_size(in));
  std::string token;
  while (in >> token) {
    if (token == "end") {
      for (const auto& node : nodes) {
        if (!node.leaf && (node.left >= nodes.size() || node.right >= nodes.size())) {
          throw Error(ErrorCode::Parse, "child index out of range");
        }
      }
      return RegressionTree(std::move(nodes), arity);
    }
    if (token == "node") {
      const std::size_t id = read_size(in);
      if (id >= nodes.size()) throw Error(ErrorCode::Parse, "node id out of range");
      Node& node = nodes[id];
      std::string kind;
      in >> kind;
      if (kind == "leaf") {
        node.leaf = true;
        node.value = read_double(in);
        node.n = read_size(in);
        expect(in, "risk");
        node.risk = read_double(in);
        continue;
      }
      node.leaf = false;
      node.rule = read_rule(in, kind);
      expect(in, "left");
      node.left = read_size(in);
      expect(in, "right");
      node.right = read_size(in);
      expect(in, "n");
      node.n = read_size(in);
      expect(in, "risk");
      node.risk = read_double(in);
      expect(in, "value");
      node.value = read_double(in);
      expect(in, "gain");
      node.gain = read_double(in);
      expect(in, "missing");
      std::string side;
      in >> side;
      node.rule.missing_left = side == "L";
    } else if (token == "surrogate") {
      const std::size_t id = read_size(in);
      if (id >= nodes.size()) throw Error(ErrorCode::Parse, "node id out of range");
      std::string kind;
      in >> kind;
      Surrogate s;
      s.rule = read_rule(in, kind);
      expect(in, "xi");
      s.association = read_double(in);
      nodes[id].surrogates.push_back(std::move(s));
    } else {
      throw Error(ErrorCode::Parse, "unexpected token '" + token + "' in tree");
    }
  }
  throw Error(ErrorCode::Parse, "tree text ended without 'end'");
}

RegressionTree RegressionTree::parse(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

bool operator==(const SplitRule& a, const SplitRule& b) {
  return a.feature == b.feature && a.kind == b.kind && a.threshold == b.threshold &&
         a.left_levels == b.left_levels && a.missing_left == b.missing_left;
}

bool operator==(const Surrogate& a, const Surrogate& b) {
  return a.rule.feature == b.rule.feature && a.rule.kind == b.rule.kind &&
         a.rule.threshold == b.rule.threshold && a.rule.left_levels == b.rule.left_levels &&
         a.association == b.association;
}

bool operator==(const Node& a, const Node& b) {
  if (a.leaf != b.leaf || a.value != b.value || a.n != b.n || a.risk != b.risk) return false;
  if (a.leaf) return true;
  return a.rule == b.rule && a.surrogates == b.surrogates && a.left == b.left &&
         a.right == b.right && a.gain == b.gain;
}

bool operator==(const RegressionTree& a, const RegressionTree& b) {
  return a.arity_ == b.arity_ && a.nodes_ == b.nodes_;
}

// ---------------------------------------------------------------------------

RegressionTree grow(const data::Design& design, std::span<const double> targets,
                    std::span<const std::size_t> rows, const StoppingCriteria& stop,
                    std::uint64_t seed) {
  if (targets.size() != design.rows()) {
    throw Error(ErrorCode::Shape, "target count does not match the design");
  }
  return Grower(design, targets, stop, seed).run(rows);
}

RegressionTree grow(const data::Design& design, std::span<const std::size_t> rows,
                    const StoppingCriteria& stop, std::uint64_t seed) {
  return grow(design, design.y, rows, stop, seed);
}

RegressionTree grow(const data::Design& design, const StoppingCriteria& stop, std::uint64_t seed) {
  std::vector<std::size_t> rows(design.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return grow(design, design.y, rows, stop, seed);
}

std::optional<double> association(const data::Design& design, std::span<const std::size_t> rows,
                                  const SplitRule& best, const SplitRule& candidate) {
  std::size_t total = 0, left = 0, both_left = 0, both_right = 0;
  for (auto r : rows) {
    const double xj = design.at(r, best.feature);
    const double xk = design.at(r, candidate.feature);
    if (is_missing(xj) || is_missing(xk)) continue;
    ++total;
    const bool lj = best.goes_left(xj);
    const bool lk = candidate.goes_left(xk);
    if (lj) ++left;
    if (lj && lk) ++both_left;
    if (!lj && !lk) ++both_right;
  }
  return association_from_counts(total, left, both_left, both_right);
}

std::vector<NodeRisk> prune_info(const RegressionTree& tree) {
  std::vector<NodeRisk> out;
  const auto& nodes = tree.nodes();
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (nodes[id].leaf) continue;
    out.push_back(NodeRisk{id, nodes[id].rule.feature, nodes[id].gain, nodes[id].n});
  }
  return out;
}

double training_sse(const RegressionTree& tree, const data::Design& design,
                    std::span<const double> targets, std::span<const std::size_t> rows) {
  double sse = 0.0;
  for (auto r : rows) {
    const double d = targets[r] - tree.predict(design.row(r));
    sse += d * d;
  }
  return sse;
}

}  // namespace duracast::tree
