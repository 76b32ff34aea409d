#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duracast::durability {

/// C_T = 1.6e-7 (30 + T)^4; zero for T <= -30.
double temperature_factor(double t_celsius);
/// Corrosion rate at +20 C in um/year: 190 RH^26 for RH <= 0.95, otherwise
/// 2000 (1 - RH)^2. RH is a fraction; throws Domain outside [0, 1].
double reference_rate(double rh);

struct CorrosionRate {
  double rate = 0.0;  ///< um/year
  double ct = 0.0;
  double ro = 0.0;
  /// Temperature at or below -30 C; C_T was clamped to zero.
  bool clamped = false;
};

CorrosionRate corrosion_rate(double t_celsius, double rh);

enum class CorrosionStatus : std::uint8_t { Passive, Low, Moderate, High };
enum class RiskLevel : std::uint8_t { Insignificant, Slight, Medium, High };

/// r < 1 Passive, [1, 5] Low, (5, 10] Moderate, > 10 High.
CorrosionStatus classify_corrosion(double rate);
/// RH < 0.85 Insignificant, [0.85, 0.98) Medium, >= 0.98 High.
RiskLevel classify_frost(double rh);
/// RH < 0.85 Insignificant, [0.85, 0.98) Slight, >= 0.98 High.
RiskLevel classify_chemical(double rh);

std::string_view label(CorrosionStatus s);
std::string_view label(RiskLevel r);

// ---------------------------------------------------------------------------

/// One measurement; missing values are NaN.
struct HygroSample {
  double time = 0.0;
  double temperature = 0.0;  ///< C
  double rh = 0.0;           ///< fraction
};

struct ElementSeries {
  std::string name;
  std::vector<HygroSample> samples;  ///< strictly increasing time
};

enum class RiskKind { Corrosion, Frost, Chemical };

std::string_view kind_name(RiskKind kind);
RiskKind parse_kind(std::string_view text);

/// Category labels of a kind, indexed by cell value.
std::vector<std::string> category_labels(RiskKind kind);

/// Cell value: category index (CorrosionStatus or RiskLevel), or empty when
/// the bin holds no usable sample.
using Cell = std::optional<std::uint8_t>;

/// Category for one binned (T, RH) pair.
std::uint8_t classify_cell(RiskKind kind, double temperature, double rh);

struct RiskGrid {
  RiskKind kind = RiskKind::Corrosion;
  std::vector<std::string> elements;
  double start = 0.0;
  double width = 1.0;
  std::size_t bins = 0;
  /// cells[e][b] for element e and bin b.
  std::vector<std::vector<Cell>> cells;
  /// Bin means that produced the cells (NaN where missing).
  std::vector<std::vector<double>> mean_temperature;
  std::vector<std::vector<double>> mean_rh;

  double bin_start(std::size_t b) const { return start + width * static_cast<double>(b); }
};

bool same_cells(const RiskGrid& a, const RiskGrid& b);

struct GridOptions {
  /// Bin width in the time unit of the samples (1 = daily for day stamps).
  double width = 1.0;
  /// First bin start; defaults to floor(min time / width) * width.
  std::optional<double> start;
  /// Number of bins; defaults to covering the latest sample.
  std::optional<std::size_t> bins;
  /// Moving-average half window applied to observed values before binning;
  /// 0 disables smoothing. Missing values are never filled.
  std::size_t smoothing_half_window = 1;
};

/// Smooths each series, averages T and RH per bin over samples that have
/// the needed quantities and classifies each bin. Bins without usable
/// samples stay Missing.
RiskGrid build_risk_grid(std::span<const ElementSeries> series, RiskKind kind,
                         const GridOptions& options = {});

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed palette by category index; Missing is white.
inline constexpr std::array<Rgb, 4> kPalette = {{{0, 128, 0}, {255, 215, 0}, {255, 140, 0}, {200, 0, 0}}};
inline constexpr Rgb kMissingColor = {255, 255, 255};

/// Plain P3 pixmap, one `cell_size` square per cell, elements top to bottom.
std::string grid_ppm(const RiskGrid& grid, std::size_t cell_size = 8);
/// `element,bin_start,category`, one line per cell.
std::string grid_csv(const RiskGrid& grid);
/// Rebuilds the cells, labels and bins from `grid_csv` output.
RiskGrid parse_grid_csv(std::string_view text, RiskKind kind);

/// Writes `<base>.ppm` and `<base>.csv` atomically.
void render_grid(const RiskGrid& grid, const std::filesystem::path& base, std::size_t cell_size = 8);

}  // namespace duracast::durability
