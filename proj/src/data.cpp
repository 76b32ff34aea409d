#include "duracast/data.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "duracast/error.hpp"
#include "duracast/io.hpp"
#include "duracast/random.hpp"

namespace duracast::data {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

ColumnKind parse_kind(std::string_view text) {
  const auto key = lower(trim(text));
  if (key == "continuous" || key == "c") return ColumnKind::Continuous;
  if (key == "nominal" || key == "n") return ColumnKind::Nominal;
  throw Error(ErrorCode::SchemaViolation, "unknown column kind '" + std::string(text) + "'");
}

ColumnRole parse_role(std::string_view text) {
  const auto key = lower(trim(text));
  if (key == "input") return ColumnRole::Input;
  if (key == "target") return ColumnRole::Target;
  if (key == "ignored" || key == "ignore") return ColumnRole::Ignored;
  throw Error(ErrorCode::SchemaViolation, "unknown column role '" + std::string(text) + "'");
}

std::string_view kind_text(ColumnKind kind) {
  return kind == ColumnKind::Nominal ? "nominal" : "continuous";
}

std::string_view role_text(ColumnRole role) {
  switch (role) {
    case ColumnRole::Input: return "input";
    case ColumnRole::Target: return "target";
    case ColumnRole::Ignored: return "ignored";
  }
  return "input";
}

std::string cell_ref(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row + 1) + ", column '" + std::string(column) + "'";
}

}  // namespace

std::optional<std::size_t> Column::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == label) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
  std::set<std::string> names;
  std::size_t targets = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& col = columns_[i];
    if (col.name.empty()) throw Error(ErrorCode::SchemaViolation, "empty column name");
    if (!names.insert(col.name).second) {
      throw Error(ErrorCode::SchemaViolation, "duplicate column name '" + col.name + "'");
    }
    if (col.kind == ColumnKind::Nominal) {
      if (col.levels.empty()) {
        throw Error(ErrorCode::SchemaViolation, "nominal column '" + col.name + "' has no levels");
      }
      std::set<std::string> seen(col.levels.begin(), col.levels.end());
      if (seen.size() != col.levels.size()) {
        throw Error(ErrorCode::SchemaViolation, "duplicate level in column '" + col.name + "'");
      }
    } else if (!col.levels.empty()) {
      throw Error(ErrorCode::SchemaViolation, "continuous column '" + col.name + "' declares levels");
    }
    if (col.role == ColumnRole::Target) {
      if (col.kind != ColumnKind::Continuous) {
        throw Error(ErrorCode::SchemaViolation, "target column '" + col.name + "' must be continuous");
      }
      target_ = i;
      ++targets;
    }
  }
  if (targets != 1) {
    throw Error(ErrorCode::SchemaViolation,
                "schema needs exactly one target column, found " + std::to_string(targets));
  }
}

Schema Schema::parse(std::string_view text) {
  std::vector<Column> columns;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    // The level list is everything after the third comma, so labels such as
    // "CEM I 52,5 N" survive intact.
    std::vector<std::string_view> head;
    std::size_t start = 0;
    while (head.size() < 3) {
      const auto pos = body.find(',', start);
      if (pos == std::string_view::npos) {
        head.push_back(body.substr(start));
        start = body.size() + 1;
        break;
      }
      head.push_back(body.substr(start, pos - start));
      start = pos + 1;
    }
    if (head.size() < 3) {
      throw Error(ErrorCode::SchemaViolation,
                  "schema line " + std::to_string(line_no) + ": expected name,kind,role");
    }
    Column col;
    col.name = std::string(trim(head[0]));
    col.kind = parse_kind(head[1]);
    col.role = parse_role(head[2]);
    if (start <= body.size()) {
      for (const auto& level : split(body.substr(start), ';')) {
        const auto label = trim(level);
        if (!label.empty()) col.levels.emplace_back(label);
      }
    }
    columns.push_back(std::move(col));
  }
  return Schema(std::move(columns));
}

Schema Schema::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string Schema::to_text() const {
  std::string out;
  for (const auto& col : columns_) {
    out += col.name;
    out += ',';
    out += kind_text(col.kind);
    out += ',';
    out += role_text(col.role);
    if (!col.levels.empty()) {
      out += ',';
      for (std::size_t i = 0; i < col.levels.size(); ++i) {
        if (i) out += ';';
        out += col.levels[i];
      }
    }
    out += '\n';
  }
  return out;
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw Error(ErrorCode::SchemaViolation, "no column named '" + std::string(name) + "'");
}

std::vector<std::size_t> Schema::input_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].role == ColumnRole::Input) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------

Dataset::Dataset(Schema schema, std::vector<double> values)
    : schema_(std::move(schema)), values_(std::move(values)) {
  const auto p = schema_.size();
  if (p == 0 || values_.size() % p != 0) {
    throw Error(ErrorCode::Shape, "value count is not a multiple of the column count");
  }
  rows_ = values_.size() / p;
  if (rows_ == 0) throw Error(ErrorCode::EmptySelection, "dataset has no rows");
  for (std::size_t c = 0; c < p; ++c) {
    const auto& col = schema_.column(c);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double v = values_[r * p + c];
      if (is_missing(v)) continue;
      if (col.kind == ColumnKind::Nominal) {
        if (v < 0 || v != std::floor(v) || v >= static_cast<double>(col.levels.size())) {
          throw Error(ErrorCode::SchemaViolation, "invalid level index at " + cell_ref(r, col.name));
        }
      } else if (!std::isfinite(v)) {
        throw Error(ErrorCode::Parse, "non-finite value at " + cell_ref(r, col.name));
      }
    }
  }
}

std::vector<double> Dataset::column(std::size_t col) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, col);
  return out;
}

std::string Dataset::cell_text(std::size_t row, std::size_t col) const {
  const double v = at(row, col);
  if (is_missing(v)) return {};
  const auto& column = schema_.column(col);
  if (column.kind == ColumnKind::Nominal) return column.levels[static_cast<std::size_t>(v)];
  return format_double(v);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * cols());
  for (auto r : rows) {
    if (r >= rows_) throw Error(ErrorCode::Shape, "row index out of range");
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
  }
  return Dataset(schema_, std::move(values));
}

// ---------------------------------------------------------------------------

Dataset parse_csv(std::string_view text, const Schema& schema) {
  const auto records = parse_csv_records(text);
  if (records.empty()) throw Error(ErrorCode::Parse, "CSV has no header");
  const auto& header = records.front();
  if (header.size() != schema.size()) {
    throw Error(ErrorCode::SchemaViolation, "header has " + std::to_string(header.size()) +
                                                " columns, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) != schema.column(c).name) {
      throw Error(ErrorCode::SchemaViolation, "header column " + std::to_string(c + 1) + " is '" +
                                                  header[c] + "', schema expects '" +
                                                  schema.column(c).name + "'");
    }
  }
  std::vector<double> values;
  values.reserve((records.size() - 1) * schema.size());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const auto row = r - 1;
    if (rec.size() != schema.size()) {
      throw Error(ErrorCode::Parse, "row " + std::to_string(row + 1) + " has " +
                                        std::to_string(rec.size()) + " cells, expected " +
                                        std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < rec.size(); ++c) {
      const auto& col = schema.column(c);
      const auto cell = trim(rec[c]);
      if (cell.empty()) {
        values.push_back(kMissing);
      } else if (col.kind == ColumnKind::Nominal) {
        const auto level = col.level_index(cell);
        if (!level) {
          throw Error(ErrorCode::SchemaViolation, "unknown level '" + std::string(cell) + "' at " +
                                                      cell_ref(row, col.name));
        }
        values.push_back(static_cast<double>(*level));
      } else {
        double v = 0;
        if (!parse_double(cell, v) || !std::isfinite(v)) {
          throw Error(ErrorCode::Parse, "cannot parse '" + std::string(cell) + "' at " +
                                            cell_ref(row, col.name));
        }
        values.push_back(v);
      }
    }
  }
  if (values.empty()) throw Error(ErrorCode::EmptySelection, "CSV has no data rows");
  return Dataset(schema, std::move(values));
}

Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "no such file " + path.string());
  return parse_csv(read_file(path), schema);
}

std::string to_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    if (c) out += ',';
    out += csv_field(ds.schema().column(c).name);
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.cols(); ++c) {
      if (c) out += ',';
      out += csv_field(ds.cell_text(r, c));
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

Dataset encode_one_of_n(const Dataset& ds) {
  const auto& schema = ds.schema();
  std::vector<Column> columns;
  for (const auto& col : schema.columns()) {
    if (col.kind == ColumnKind::Nominal) {
      for (const auto& level : col.levels) {
        columns.push_back(Column{col.name + "=" + level, ColumnKind::Continuous, col.role, {}});
      }
    } else {
      columns.push_back(col);
    }
  }
  if (columns.size() == schema.size()) return ds;

  std::vector<double> values;
  values.reserve(ds.rows() * columns.size());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.cols(); ++c) {
      const auto& col = schema.column(c);
      const double v = ds.at(r, c);
      if (col.kind != ColumnKind::Nominal) {
        values.push_back(v);
        continue;
      }
      for (std::size_t level = 0; level < col.levels.size(); ++level) {
        if (is_missing(v)) {
          values.push_back(kMissing);
        } else {
          values.push_back(static_cast<std::size_t>(v) == level ? 1.0 : 0.0);
        }
      }
    }
  }
  return Dataset(Schema(std::move(columns)), std::move(values));
}

// ---------------------------------------------------------------------------

double normalize_value(double x, const Range& range, double lower, double upper) {
  if (range.degenerate()) return x;
  return (upper - lower) * (x - range.min) / (range.max - range.min) + lower;
}

double denormalize_value(double y, const Range& range, double lower, double upper) {
  if (range.degenerate()) return y;
  return (y - lower) * (range.max - range.min) / (upper - lower) + range.min;
}

Normalization::Normalization(std::vector<std::optional<Range>> ranges, double lower, double upper)
    : ranges_(std::move(ranges)), lower_(lower), upper_(upper) {
  if (!(lower_ < upper_)) {
    throw Error(ErrorCode::InvalidArgument, "normalization needs lower < upper");
  }
}

Normalization Normalization::fit(const Dataset& ds, std::span<const std::size_t> train_rows,
                                 double lower, double upper) {
  if (train_rows.empty()) throw Error(ErrorCode::InvalidArgument, "no training rows to fit on");
  std::vector<std::optional<Range>> ranges(ds.cols());
  for (std::size_t c = 0; c < ds.cols(); ++c) {
    if (ds.schema().column(c).kind != ColumnKind::Continuous) continue;
    Range range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    bool any = false;
    for (auto r : train_rows) {
      const double v = ds.at(r, c);
      if (is_missing(v)) continue;
      range.min = std::min(range.min, v);
      range.max = std::max(range.max, v);
      any = true;
    }
    if (any) ranges[c] = range;
  }
  return Normalization(std::move(ranges), lower, upper);
}

double Normalization::apply(std::size_t column, double x) const {
  const auto& range = ranges_.at(column);
  if (!range || is_missing(x)) return x;
  return normalize_value(x, *range, lower_, upper_);
}

double Normalization::invert(std::size_t column, double y) const {
  const auto& range = ranges_.at(column);
  if (!range || is_missing(y)) return y;
  return denormalize_value(y, *range, lower_, upper_);
}

namespace {

template <typename Fn>
Dataset map_columns(const Dataset& ds, std::size_t expected, Fn&& fn) {
  if (ds.cols() != expected) throw Error(ErrorCode::Shape, "normalization column count mismatch");
  std::vector<double> values(ds.values().begin(), ds.values().end());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.cols(); ++c) {
      auto& v = values[r * ds.cols() + c];
      v = fn(c, v);
    }
  }
  return Dataset(ds.schema(), std::move(values));
}

}  // namespace

Dataset Normalization::apply(const Dataset& ds) const {
  return map_columns(ds, ranges_.size(), [this](std::size_t c, double v) { return apply(c, v); });
}

Dataset Normalization::invert(const Dataset& ds) const {
  return map_columns(ds, ranges_.size(), [this](std::size_t c, double v) { return invert(c, v); });
}

// ---------------------------------------------------------------------------

std::vector<double> moving_average_fill(std::span<const double> series,
                                        const SmoothingOptions& options) {
  const std::size_t m = options.half_window;
  const std::size_t n = series.size();
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "half window must be at least 1");
  if (n < 2 * m + 1) {
    throw Error(ErrorCode::InvalidArgument, "series of length " + std::to_string(n) +
                                                " is shorter than the span " +
                                                std::to_string(2 * m + 1));
  }

  std::vector<double> out(series.begin(), series.end());
  for (std::size_t i = 0; i < n; ++i) {
    const bool missing = is_missing(series[i]);
    if (!missing && !options.smooth_observed) continue;
    if (missing && !options.fill_missing) continue;

    const std::size_t half = std::min({m, i, n - 1 - i});
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = i - half; j <= i + half; ++j) {
      if (is_missing(series[j])) continue;
      sum += series[j];
      ++count;
    }
    if (count > 0) {
      out[i] = sum / static_cast<double>(count);
      continue;
    }
    std::size_t gap_start = i;
    while (gap_start > 0 && is_missing(series[gap_start - 1])) --gap_start;
    std::size_t gap_end = i;
    while (gap_end + 1 < n && is_missing(series[gap_end + 1])) ++gap_end;
    throw Error(ErrorCode::UnfillableGap,
                "gap at indices " + std::to_string(gap_start) + ".." + std::to_string(gap_end) +
                    " (" + std::to_string(gap_end - gap_start + 1) +
                    " points) has no observed value within the span at index " +
                    std::to_string(i));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> allocate_largest_remainder(std::size_t n, std::span<const double> fractions) {
  std::vector<std::size_t> sizes(fractions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    // Snap values within rounding noise of an integer (0.6 * 10 = 6.000000000000001).
    double whole = std::floor(exact);
    if (exact - whole > 1.0 - 1e-9) whole += 1.0;
    sizes[i] = static_cast<std::size_t>(whole);
    assigned += sizes[i];
    remainders.emplace_back(std::max(0.0, exact - whole), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first + 1e-12; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    ++sizes[remainders[k % remainders.size()].second];
  }
  return sizes;
}

Holdout split_holdout(std::size_t n, const std::array<double, 3>& fractions, std::uint64_t seed) {
  double total = 0.0;
  std::size_t parts = 0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative");
    total += f;
    parts += f > 0.0 ? 1 : 0;
  }
  if (!(fractions[0] > 0.0)) throw Error(ErrorCode::InvalidArgument, "training share must be positive");
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must sum to 1");
  }
  if (n < parts) {
    throw Error(ErrorCode::DegenerateSplit, "need at least " + std::to_string(parts) +
                                                " rows for this split");
  }
  const auto sizes = allocate_largest_remainder(n, fractions);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  Holdout out;
  auto cut = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> part(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                  order.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(part.begin(), part.end());
    return part;
  };
  out.train = cut(0, sizes[0]);
  out.validation = cut(sizes[0], sizes[1]);
  out.test = cut(sizes[0] + sizes[1], sizes[2]);
  return out;
}

std::vector<std::size_t> Folds::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Folds::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) out.push_back(i);
  }
  return out;
}

Folds kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw Error(ErrorCode::InvalidArgument, "fold count " + std::to_string(k) +
                                                " must be in [2, " + std::to_string(n) + "]");
  }
  const std::vector<double> equal(k, 1.0 / static_cast<double>(k));
  const auto sizes = allocate_largest_remainder(n, equal);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  Folds folds;
  folds.k = k;
  folds.assignment.assign(n, 0);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t i = 0; i < sizes[f]; ++i) folds.assignment[order[pos++]] = f;
  }
  return folds;
}

// ---------------------------------------------------------------------------

Dataset filter_rows(const Dataset& ds, const RowPredicate& predicate) {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    if (predicate(ds, r)) keep.push_back(r);
  }
  if (keep.empty()) throw Error(ErrorCode::EmptySelection, "filter selected no rows");
  return ds.select_rows(keep);
}

Condition parse_condition(std::string_view text) {
  static constexpr std::pair<std::string_view, Condition::Op> kOps[] = {
      {"!=", Condition::Op::Ne}, {"<=", Condition::Op::Le}, {">=", Condition::Op::Ge},
      {"=", Condition::Op::Eq},  {"<", Condition::Op::Lt},  {">", Condition::Op::Gt},
  };
  for (const auto& [token, op] : kOps) {
    const auto pos = text.find(token);
    if (pos == std::string_view::npos || pos == 0) continue;
    // "a<=b" must not be read as "a<" "=b".
    if (token.size() == 1 && pos > 0 && (text[pos - 1] == '!' || text[pos - 1] == '<' ||
                                         text[pos - 1] == '>')) {
      continue;
    }
    Condition cond;
    cond.column = std::string(trim(text.substr(0, pos)));
    cond.op = op;
    cond.value = std::string(trim(text.substr(pos + token.size())));
    return cond;
  }
  throw Error(ErrorCode::Config, "cannot parse filter '" + std::string(text) + "'");
}

RowPredicate make_predicate(const Schema& schema, std::span<const Condition> conditions) {
  struct Compiled {
    std::size_t column;
    Condition::Op op;
    double value;
  };
  std::vector<Compiled> compiled;
  for (const auto& cond : conditions) {
    const auto idx = schema.index_of(cond.column);
    const auto& col = schema.column(idx);
    double value = 0.0;
    if (col.kind == ColumnKind::Nominal) {
      if (cond.op != Condition::Op::Eq && cond.op != Condition::Op::Ne) {
        throw Error(ErrorCode::Config, "nominal column '" + col.name + "' supports only = and !=");
      }
      const auto level = col.level_index(cond.value);
      if (!level) {
        throw Error(ErrorCode::SchemaViolation,
                    "unknown level '" + cond.value + "' for column '" + col.name + "'");
      }
      value = static_cast<double>(*level);
    } else if (!parse_double(cond.value, value)) {
      throw Error(ErrorCode::Parse, "filter value '" + cond.value + "' is not numeric");
    }
    compiled.push_back({idx, cond.op, value});
  }
  return [compiled](const Dataset& ds, std::size_t row) {
    for (const auto& c : compiled) {
      const double v = ds.at(row, c.column);
      if (is_missing(v)) return false;
      const bool equal = std::abs(v - c.value) <= 1e-9 * std::max(1.0, std::abs(c.value));
      bool pass = false;
      switch (c.op) {
        case Condition::Op::Eq: pass = equal; break;
        case Condition::Op::Ne: pass = !equal; break;
        case Condition::Op::Lt: pass = v < c.value; break;
        case Condition::Op::Le: pass = v <= c.value; break;
        case Condition::Op::Gt: pass = v > c.value; break;
        case Condition::Op::Ge: pass = v >= c.value; break;
      }
      if (!pass) return false;
    }
    return true;
  };
}

Dataset drop_columns(const Dataset& ds, std::span<const std::string> names) {
  const auto& schema = ds.schema();
  std::vector<bool> drop(schema.size(), false);
  for (const auto& name : names) {
    const auto idx = schema.index_of(name);
    if (idx == schema.target_index()) {
      throw Error(ErrorCode::SchemaViolation, "cannot drop the target column '" + name + "'");
    }
    drop[idx] = true;
  }
  std::vector<Column> columns;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (!drop[c]) columns.push_back(schema.column(c));
  }
  std::vector<double> values;
  values.reserve(ds.rows() * columns.size());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (!drop[c]) values.push_back(ds.at(r, c));
    }
  }
  return Dataset(Schema(std::move(columns)), std::move(values));
}

// ---------------------------------------------------------------------------

Design Design::select_rows(std::span<const std::size_t> rows) const {
  Design out;
  out.features = features;
  out.x.reserve(rows.size() * cols());
  out.y.reserve(rows.size());
  for (auto r : rows) {
    const auto src = row(r);
    out.x.insert(out.x.end(), src.begin(), src.end());
    out.y.push_back(y[r]);
  }
  return out;
}

Design to_design(const Dataset& ds, MissingPolicy policy) {
  const auto& schema = ds.schema();
  const auto inputs = schema.input_indices();
  const auto target = schema.target_index();
  Design design;
  for (auto c : inputs) {
    const auto& col = schema.column(c);
    design.features.push_back(Feature{col.name, col.kind, col.levels.size()});
  }
  design.x.reserve(ds.rows() * inputs.size());
  design.y.reserve(ds.rows());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (auto c : inputs) {
      const double v = ds.at(r, c);
      if (policy == MissingPolicy::Reject && is_missing(v)) {
        throw Error(ErrorCode::MissingValue,
                    "missing value at " + cell_ref(r, schema.column(c).name) +
                        "; tabular training data must be complete");
      }
      design.x.push_back(v);
    }
    const double y = ds.at(r, target);
    if (policy != MissingPolicy::AllowAll && is_missing(y)) {
      throw Error(ErrorCode::MissingValue,
                  "missing target at " + cell_ref(r, schema.column(target).name));
    }
    design.y.push_back(y);
  }
  return design;
}

}  // namespace duracast::data
