#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duracast::data {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double value) noexcept { return std::isnan(value); }

enum class ColumnKind { Continuous, Nominal };
enum class ColumnRole { Input, Target, Ignored };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  ColumnRole role = ColumnRole::Input;
  /// Ordered level labels; non-empty and duplicate-free for nominal columns.
  std::vector<std::string> levels;

  std::optional<std::size_t> level_index(std::string_view label) const;
};

/// Ordered column catalog with exactly one continuous target.
class Schema {
 public:
  explicit Schema(std::vector<Column> columns);

  /// Line format: `name,kind,role[,level;level;...]`. Blank lines and lines
  /// starting with '#' are skipped.
  static Schema parse(std::string_view text);
  static Schema load(const std::filesystem::path& path);
  std::string to_text() const;

  std::span<const Column> columns() const noexcept { return columns_; }
  const Column& column(std::size_t index) const { return columns_.at(index); }
  std::size_t size() const noexcept { return columns_.size(); }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws SchemaViolation when the column does not exist.
  std::size_t index_of(std::string_view name) const;
  std::size_t target_index() const noexcept { return target_; }
  std::vector<std::size_t> input_indices() const;

 private:
  std::vector<Column> columns_;
  std::size_t target_ = 0;
};

/// Immutable N x p table. Continuous cells hold reals, nominal cells hold
/// level indices; missing cells are NaN.
class Dataset {
 public:
  Dataset(Schema schema, std::vector<double> values);

  const Schema& schema() const noexcept { return schema_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return schema_.size(); }

  double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  bool missing(std::size_t row, std::size_t col) const { return is_missing(at(row, col)); }
  std::span<const double> row(std::size_t row) const {
    return std::span<const double>(values_).subspan(row * cols(), cols());
  }
  std::span<const double> values() const noexcept { return values_; }

  std::vector<double> column(std::size_t col) const;
  /// Text form of a cell as it would appear in CSV (empty when missing).
  std::string cell_text(std::size_t row, std::size_t col) const;

  Dataset select_rows(std::span<const std::size_t> rows) const;

 private:
  Schema schema_;
  std::vector<double> values_;
  std::size_t rows_ = 0;
};

Dataset parse_csv(std::string_view text, const Schema& schema);
Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema);
std::string to_csv(const Dataset& ds);

/// Replaces every nominal column with one 0/1 indicator column per level,
/// named `column=level`.
Dataset encode_one_of_n(const Dataset& ds);

// ---------------------------------------------------------------------------
// Min-max normalization into [lower, upper].

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool degenerate() const noexcept { return !(max > min) || !std::isfinite(min) || !std::isfinite(max); }
};

double normalize_value(double x, const Range& range, double lower = -1.0, double upper = 1.0);
double denormalize_value(double y, const Range& range, double lower = -1.0, double upper = 1.0);

/// Learns per-column ranges from training rows only; columns that are not
/// continuous (or whose range collapses) pass through unchanged.
class Normalization {
 public:
  Normalization() = default;
  Normalization(std::vector<std::optional<Range>> ranges, double lower = -1.0, double upper = 1.0);

  static Normalization fit(const Dataset& ds, std::span<const std::size_t> train_rows,
                           double lower = -1.0, double upper = 1.0);

  double apply(std::size_t column, double x) const;
  double invert(std::size_t column, double y) const;
  Dataset apply(const Dataset& ds) const;
  Dataset invert(const Dataset& ds) const;

  const std::optional<Range>& range(std::size_t column) const { return ranges_.at(column); }
  std::size_t size() const noexcept { return ranges_.size(); }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  std::vector<std::optional<Range>> ranges_;
  double lower_ = -1.0;
  double upper_ = 1.0;
};

// ---------------------------------------------------------------------------
// Moving-average smoothing and gap filling over a 2M+1 span.

struct SmoothingOptions {
  std::size_t half_window = 1;
  /// Replace observed points by their window mean as well.
  bool smooth_observed = false;
  /// Replace missing points by the mean of observed neighbours. When false,
  /// missing points stay missing.
  bool fill_missing = true;
};

/// Window is truncated symmetrically at the series ends. Throws
/// UnfillableGap when a missing point has no observed value in its window.
std::vector<double> moving_average_fill(std::span<const double> series,
                                        const SmoothingOptions& options = {});

// ---------------------------------------------------------------------------
// Partitioning.

/// Sizes proportional to `fractions` that sum to `n`, rounded by the
/// largest-remainder rule (ties go to the earlier part).
std::vector<std::size_t> allocate_largest_remainder(std::size_t n, std::span<const double> fractions);

struct Holdout {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

Holdout split_holdout(std::size_t n, const std::array<double, 3>& fractions, std::uint64_t seed);
inline Holdout split_holdout(const Dataset& ds, const std::array<double, 3>& fractions,
                             std::uint64_t seed) {
  return split_holdout(ds.rows(), fractions, seed);
}

struct Folds {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;

  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

Folds kfold(std::size_t n, std::size_t k, std::uint64_t seed);
inline Folds kfold(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  return kfold(ds.rows(), k, seed);
}

// ---------------------------------------------------------------------------
// Row filtering and column selection for scenario datasets.

using RowPredicate = std::function<bool(const Dataset&, std::size_t row)>;

/// Throws EmptySelection when no row passes.
Dataset filter_rows(const Dataset& ds, const RowPredicate& predicate);

struct Condition {
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge };
  std::string column;
  Op op = Op::Eq;
  std::string value;
};

/// Parses `column<op>value` with op one of = != < <= > >=.
Condition parse_condition(std::string_view text);

/// Conjunction of conditions. Nominal columns compare by level label and
/// only support = and !=. Missing cells never match.
RowPredicate make_predicate(const Schema& schema, std::span<const Condition> conditions);

/// Removes the named columns. The target cannot be dropped.
Dataset drop_columns(const Dataset& ds, std::span<const std::string> names);

// ---------------------------------------------------------------------------
// Learner-facing view: input columns and the target.

struct Feature {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::size_t levels = 0;
};

struct Design {
  std::vector<Feature> features;
  std::vector<double> x;  ///< row-major, rows() x cols()
  std::vector<double> y;

  std::size_t rows() const noexcept { return y.size(); }
  std::size_t cols() const noexcept { return features.size(); }
  double at(std::size_t row, std::size_t col) const { return x[row * cols() + col]; }
  std::span<const double> row(std::size_t row) const {
    return std::span<const double>(x).subspan(row * cols(), cols());
  }
  Design select_rows(std::span<const std::size_t> rows) const;
};

enum class MissingPolicy {
  Reject,       ///< training: any missing input or target is an error
  AllowInputs,  ///< inputs may be missing, target must be present
  AllowAll,     ///< prediction-only data
};

Design to_design(const Dataset& ds, MissingPolicy policy = MissingPolicy::Reject);

}  // namespace duracast::data
