#include "duracast/durability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "duracast/data.hpp"
#include "duracast/error.hpp"
#include "duracast/io.hpp"

namespace duracast::durability {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_rh(double rh) {
  if (!(rh >= 0.0 && rh <= 1.0)) {
    throw Error(ErrorCode::Domain, "relative humidity " + format_double(rh) + " is outside [0, 1]");
  }
}

std::vector<double> smooth(std::span<const double> values, std::size_t half_window) {
  if (half_window == 0 || values.size() < 2 * half_window + 1) {
    return {values.begin(), values.end()};
  }
  data::SmoothingOptions opts;
  opts.half_window = half_window;
  opts.smooth_observed = true;
  opts.fill_missing = false;
  return data::moving_average_fill(values, opts);
}

}  // namespace

double temperature_factor(double t_celsius) {
  if (t_celsius <= -30.0) return 0.0;
  const double b = 30.0 + t_celsius;
  return 1.6e-7 * b * b * b * b;
}

double reference_rate(double rh) {
  check_rh(rh);
  if (rh <= 0.95) return 190.0 * std::pow(rh, 26);
  return 2000.0 * (1.0 - rh) * (1.0 - rh);
}

CorrosionRate corrosion_rate(double t_celsius, double rh) {
  if (!std::isfinite(t_celsius)) throw Error(ErrorCode::Domain, "temperature is not finite");
  CorrosionRate r;
  r.ro = reference_rate(rh);
  r.clamped = t_celsius <= -30.0;
  r.ct = temperature_factor(t_celsius);
  r.rate = r.ct * r.ro;
  return r;
}

CorrosionStatus classify_corrosion(double rate) {
  if (rate < 1.0) return CorrosionStatus::Passive;
  if (rate <= 5.0) return CorrosionStatus::Low;
  if (rate <= 10.0) return CorrosionStatus::Moderate;
  return CorrosionStatus::High;
}

RiskLevel classify_frost(double rh) {
  if (rh < 0.85) return RiskLevel::Insignificant;
  if (rh < 0.98) return RiskLevel::Medium;
  return RiskLevel::High;
}

RiskLevel classify_chemical(double rh) {
  if (rh < 0.85) return RiskLevel::Insignificant;
  if (rh < 0.98) return RiskLevel::Slight;
  return RiskLevel::High;
}

std::string_view label(CorrosionStatus s) {
  switch (s) {
    case CorrosionStatus::Passive:
      return "Passive";
    case CorrosionStatus::Low:
      return "Low";
    case CorrosionStatus::Moderate:
      return "Moderate";
    case CorrosionStatus::High:
      return "High";
  }
  return "?";
}

std::string_view label(RiskLevel r) {
  switch (r) {
    case RiskLevel::Insignificant:
      return "Insignificant";
    case RiskLevel::Slight:
      return "Slight";
    case RiskLevel::Medium:
      return "Medium";
    case RiskLevel::High:
      return "High";
  }
  return "?";
}

std::string_view kind_name(RiskKind kind) {
  switch (kind) {
    case RiskKind::Corrosion:
      return "corrosion";
    case RiskKind::Frost:
      return "frost";
    case RiskKind::Chemical:
      return "chemical";
  }
  return "?";
}

RiskKind parse_kind(std::string_view text) {
  if (text == "corrosion") return RiskKind::Corrosion;
  if (text == "frost") return RiskKind::Frost;
  if (text == "chemical") return RiskKind::Chemical;
  throw Error(ErrorCode::InvalidArgument, "unknown risk kind '" + std::string(text) + "'");
}

std::vector<std::string> category_labels(RiskKind kind) {
  std::vector<std::string> out;
  for (std::uint8_t i = 0; i < 4; ++i) {
    out.emplace_back(kind == RiskKind::Corrosion ? label(static_cast<CorrosionStatus>(i))
                                                 : label(static_cast<RiskLevel>(i)));
  }
  return out;
}

std::uint8_t classify_cell(RiskKind kind, double temperature, double rh) {
  switch (kind) {
    case RiskKind::Corrosion:
      return static_cast<std::uint8_t>(classify_corrosion(corrosion_rate(temperature, rh).rate));
    case RiskKind::Frost:
      return static_cast<std::uint8_t>(classify_frost(rh));
    case RiskKind::Chemical:
      return static_cast<std::uint8_t>(classify_chemical(rh));
  }
  return 0;
}

bool same_cells(const RiskGrid& a, const RiskGrid& b) {
  return a.kind == b.kind && a.elements == b.elements && a.bins == b.bins && a.cells == b.cells &&
         a.start == b.start && (a.bins < 2 || a.width == b.width);
}

RiskGrid build_risk_grid(std::span<const ElementSeries> series, RiskKind kind,
                         const GridOptions& options) {
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "no element series");
  if (!(options.width > 0.0)) throw Error(ErrorCode::InvalidArgument, "bin width must be positive");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      const double t = s.samples[i].time;
      if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "sample time must be finite");
      if (i > 0 && !(t > s.samples[i - 1].time)) {
        throw Error(ErrorCode::InvalidArgument, "times of element " + s.name + " must increase");
      }
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }

  RiskGrid grid;
  grid.kind = kind;
  grid.width = options.width;
  if (options.start) {
    grid.start = *options.start;
  } else if (std::isfinite(lo)) {
    grid.start = std::floor(lo / options.width) * options.width;
  }
  if (options.bins) {
    grid.bins = *options.bins;
  } else if (std::isfinite(hi) && hi >= grid.start) {
    grid.bins = static_cast<std::size_t>(std::floor((hi - grid.start) / options.width)) + 1;
  }
  if (grid.bins == 0) throw Error(ErrorCode::InvalidArgument, "the grid has no bins");

  const bool needs_temperature = kind == RiskKind::Corrosion;
  for (const auto& s : series) {
    std::vector<double> temp, rh;
    for (const auto& smp : s.samples) {
      temp.push_back(smp.temperature);
      rh.push_back(smp.rh);
    }
    temp = smooth(temp, options.smoothing_half_window);
    rh = smooth(rh, options.smoothing_half_window);

    std::vector<double> sum_t(grid.bins, 0.0), sum_rh(grid.bins, 0.0);
    std::vector<std::size_t> count(grid.bins, 0);
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      if (data::is_missing(rh[i]) || (needs_temperature && data::is_missing(temp[i]))) continue;
      const double pos = (s.samples[i].time - grid.start) / grid.width;
      if (pos < 0.0) continue;
      const auto b = static_cast<std::size_t>(std::floor(pos));
      if (b >= grid.bins) continue;
      sum_t[b] += needs_temperature ? temp[i] : 0.0;
      sum_rh[b] += rh[i];
      ++count[b];
    }

    grid.elements.push_back(s.name);
    auto& cells = grid.cells.emplace_back(grid.bins);
    auto& mt = grid.mean_temperature.emplace_back(grid.bins, kNaN);
    auto& mr = grid.mean_rh.emplace_back(grid.bins, kNaN);
    for (std::size_t b = 0; b < grid.bins; ++b) {
      if (count[b] == 0) continue;
      const double n = static_cast<double>(count[b]);
      if (needs_temperature) mt[b] = sum_t[b] / n;
      mr[b] = sum_rh[b] / n;
      cells[b] = classify_cell(kind, needs_temperature ? mt[b] : 20.0, mr[b]);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------

std::string grid_ppm(const RiskGrid& grid, std::size_t cell_size) {
  if (grid.elements.empty() || grid.bins == 0) throw Error(ErrorCode::InvalidArgument, "empty grid");
  if (cell_size == 0) throw Error(ErrorCode::InvalidArgument, "cell size must be positive");
  const std::size_t w = grid.bins * cell_size;
  const std::size_t h = grid.elements.size() * cell_size;
  std::string out = "P3\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (std::size_t e = 0; e < grid.elements.size(); ++e) {
    std::string line;
    for (std::size_t b = 0; b < grid.bins; ++b) {
      const auto& cell = grid.cells[e][b];
      const Rgb c = cell ? kPalette.at(*cell) : kMissingColor;
      for (std::size_t k = 0; k < cell_size; ++k) {
        if (!line.empty()) line += ' ';
        line += std::to_string(c[0]) + " " + std::to_string(c[1]) + " " + std::to_string(c[2]);
      }
    }
    line += '\n';
    for (std::size_t k = 0; k < cell_size; ++k) out += line;
  }
  return out;
}

std::string grid_csv(const RiskGrid& grid) {
  const auto labels = category_labels(grid.kind);
  std::string out = "element,bin_start,category\n";
  for (std::size_t e = 0; e < grid.elements.size(); ++e) {
    for (std::size_t b = 0; b < grid.bins; ++b) {
      const auto& cell = grid.cells[e][b];
      out += csv_field(grid.elements[e]) + "," + format_double(grid.bin_start(b)) + "," +
             (cell ? labels.at(*cell) : std::string("Missing")) + "\n";
    }
  }
  return out;
}

RiskGrid parse_grid_csv(std::string_view text, RiskKind kind) {
  const auto records = parse_csv_records(text);
  if (records.empty() || records[0] != std::vector<std::string>{"element", "bin_start", "category"}) {
    throw Error(ErrorCode::Parse, "grid CSV header must be element,bin_start,category");
  }
  const auto labels = category_labels(kind);
  RiskGrid grid;
  grid.kind = kind;
  std::vector<double> starts;
  std::map<std::string, std::size_t> element_index;
  struct Entry {
    std::size_t element;
    double start;
    Cell cell;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != 3) throw Error(ErrorCode::Parse, "grid CSV line " + std::to_string(i + 1));
    double start = 0;
    if (!parse_double(rec[1], start)) throw Error(ErrorCode::Parse, "bad bin start '" + rec[1] + "'");
    auto [it, added] = element_index.emplace(rec[0], grid.elements.size());
    if (added) grid.elements.push_back(rec[0]);
    if (std::find(starts.begin(), starts.end(), start) == starts.end()) starts.push_back(start);
    Cell cell;
    if (rec[2] != "Missing") {
      const auto pos = std::find(labels.begin(), labels.end(), rec[2]);
      if (pos == labels.end()) throw Error(ErrorCode::Parse, "unknown category '" + rec[2] + "'");
      cell = static_cast<std::uint8_t>(pos - labels.begin());
    }
    entries.push_back({it->second, start, cell});
  }
  if (grid.elements.empty()) throw Error(ErrorCode::Parse, "grid CSV has no cells");
  std::sort(starts.begin(), starts.end());
  grid.bins = starts.size();
  grid.start = starts.front();
  grid.width = starts.size() > 1 ? starts[1] - starts[0] : 1.0;
  grid.cells.assign(grid.elements.size(), std::vector<Cell>(grid.bins));
  std::vector<std::vector<bool>> seen(grid.elements.size(), std::vector<bool>(grid.bins, false));
  for (const auto& en : entries) {
    const auto b = static_cast<std::size_t>(std::lower_bound(starts.begin(), starts.end(), en.start) -
                                            starts.begin());
    if (seen[en.element][b]) throw Error(ErrorCode::Parse, "duplicate grid cell");
    seen[en.element][b] = true;
    grid.cells[en.element][b] = en.cell;
  }
  for (const auto& row : seen) {
    if (std::find(row.begin(), row.end(), false) != row.end()) {
      throw Error(ErrorCode::Parse, "grid CSV is not rectangular");
    }
  }
  grid.mean_temperature.assign(grid.elements.size(), std::vector<double>(grid.bins, kNaN));
  grid.mean_rh = grid.mean_temperature;
  return grid;
}

void render_grid(const RiskGrid& grid, const std::filesystem::path& base, std::size_t cell_size) {
  auto ppm = base;
  ppm += ".ppm";
  auto csv = base;
  csv += ".csv";
  write_file_atomic(ppm, grid_ppm(grid, cell_size));
  write_file_atomic(csv, grid_csv(grid));
}

}  // namespace duracast::durability
