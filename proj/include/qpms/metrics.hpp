#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpms/engine.hpp"
#include "qpms/modes.hpp"

namespace qpms {

/// S = 10 log10(N_D / sum_{i != D} N_i). A zero denominator gives +inf with
/// `infinite` set; a zero numerator and denominator gives NaN with `undefined`.
struct SelectivityValue {
  double db = 0.0;
  double desired = 0.0;
  double others = 0.0;
  bool infinite = false;
  bool undefined = false;

  bool finite() const { return !infinite && !undefined; }
};

SelectivityValue selectivity(std::span<const double> row, std::size_t desired);

struct CellFlag {
  std::size_t row;
  std::size_t col;
  std::string message;
};

struct CountsMatrix {
  std::vector<ModeLabel> pump_labels;
  std::vector<ModeLabel> signal_labels;
  std::vector<std::vector<double>> counts;          ///< pump x signal
  std::vector<std::vector<double>> coupled_energy;  ///< before detection scaling
  std::vector<CellFlag> flagged;
  nlohmann::json metadata;
};

struct TomographyOptions {
  /// Matched signal column per pump row (-1 for none). Used for normalization.
  std::vector<int> desired;
  /// When > 0, counts are scaled so the largest matched cell equals this value;
  /// otherwise the detector scale is used as-is.
  double normalize_to = 0.0;
};

/// counts[i][j] = zero-delay detected counts for pumps[i] x signals[j]. With
/// jitter enabled each cell instead reads the maximum of its delay scan over
/// `jitter_delays_ps`. Cell failures are flagged, never thrown.
CountsMatrix tomography(const std::vector<ModeLabel>& pumps, const std::vector<ModeLabel>& signals,
                        const SimulationSetup& setup, const TomographyOptions& options = {},
                        std::span<const double> jitter_delays_ps = {});

/// Index of matched_signal(pump) in `signals` for every pump, -1 if absent.
std::vector<int> default_desired(const std::vector<ModeLabel>& pumps, const std::vector<ModeLabel>& signals);

struct SelectivityRow {
  std::size_t pump = 0;
  int desired = -1;
  SelectivityValue value;
};

struct SelectivityReport {
  std::vector<SelectivityRow> rows;
};

SelectivityReport selectivity_report(const CountsMatrix& matrix, std::span<const int> desired);

/// {T+, T-, T2} on the fundamental spatial mode.
std::vector<ModeLabel> mub_catalog(double width_ps, Role role = Role::kSignal);
/// {X_l T_0, X_l T_1, ..., X_l T_max_m}
std::vector<ModeLabel> temporal_catalog(int max_m = 2, int l = 0, Role role = Role::kSignal);
/// {X_-max_l T_m, ..., X_max_l T_m}
std::vector<ModeLabel> spatial_catalog(int max_l = 2, int m = 0, Role role = Role::kSignal);
/// 15 modes ordered temporal-major: (T0: X-2..X2), (T1: ...), (T2: ...).
std::vector<ModeLabel> spatiotemporal_catalog(Role role = Role::kSignal);

enum class TrendAxis { kLength, kPulseWidth, kOptimization, kDeltaK };
enum class TrendDirection { kIncreasing, kDecreasing, kNonDecreasing, kReport };

struct TrendPoint {
  double axis_value = 0.0;
  std::string label;
  SelectivityValue value;
};

struct TrendSeries {
  std::string name;
  TrendAxis axis = TrendAxis::kLength;
  TrendDirection direction = TrendDirection::kReport;
  std::vector<TrendPoint> points;
  bool pass = false;
};

struct TrendReport {
  std::vector<TrendSeries> series;
  bool all_pass = true;
};

/// Strict monotonicity (or non-decrease) over consecutive points. +inf ranks
/// above every finite value; an undefined point fails any directional trend.
bool trend_holds(TrendDirection direction, std::span<const SelectivityValue> values);

TrendReport trend_report(std::vector<TrendSeries> series);

std::string to_string(TrendAxis axis);
std::string to_string(TrendDirection direction);
TrendAxis parse_trend_axis(const std::string& s);
TrendDirection parse_trend_direction(const std::string& s);

}  // namespace qpms
