#include "qpms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/core.h>

#include "parallel.hpp"
#include "qpms/error.hpp"
#include "qpms/io.hpp"

namespace qpms {

SelectivityValue selectivity(std::span<const double> row, std::size_t desired) {
  if (row.size() < 2) throw ContractError("selectivity needs at least two modes");
  if (desired >= row.size()) throw ContractError(fmt::format("desired index {} out of range", desired));
  SelectivityValue s;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!(row[i] >= 0.0)) throw ContractError("selectivity counts must be non-negative");
    if (i != desired) s.others += row[i];
  }
  s.desired = row[desired];
  if (s.others == 0.0) {
    if (s.desired == 0.0) {
      s.undefined = true;
      s.db = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.infinite = true;
      s.db = std::numeric_limits<double>::infinity();
    }
    return s;
  }
  if (s.desired == 0.0) {
    s.db = -std::numeric_limits<double>::infinity();
    return s;
  }
  // Difference of logs keeps S(row, a) = -S(row, b) exact for two-mode rows.
  s.db = 10.0 * (std::log10(s.desired) - std::log10(s.others));
  return s;
}

std::vector<int> default_desired(const std::vector<ModeLabel>& pumps, const std::vector<ModeLabel>& signals) {
  std::vector<int> out;
  for (const auto& p : pumps) {
    const ModeLabel match = matched_signal(p);
    int index = -1;
    for (std::size_t j = 0; j < signals.size(); ++j) {
      if (same_modes(match, signals[j])) {
        index = static_cast<int>(j);
        break;
      }
    }
    out.push_back(index);
  }
  return out;
}

CountsMatrix tomography(const std::vector<ModeLabel>& pumps, const std::vector<ModeLabel>& signals,
                        const SimulationSetup& setup, const TomographyOptions& options,
                        std::span<const double> jitter_delays_ps) {
  if (pumps.empty() || signals.empty()) throw ConfigError("tomography needs nonempty pump and signal sets");
  const std::size_t rows = pumps.size();
  const std::size_t cols = signals.size();

  CountsMatrix m;
  m.pump_labels = pumps;
  m.signal_labels = signals;
  m.counts.assign(rows, std::vector<double>(cols, 0.0));
  m.coupled_energy.assign(rows, std::vector<double>(cols, 0.0));

  std::vector<std::optional<SpatioTemporalField>> pump_fields(rows);
  std::vector<std::optional<SpatioTemporalField>> signal_fields(cols);
  std::vector<std::string> pump_errors(rows);
  std::vector<std::string> signal_errors(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    try {
      pump_fields[i] = assemble_field(pumps[i], setup.request(Role::kPump));
    } catch (const std::exception& e) {
      pump_errors[i] = e.what();
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    try {
      signal_fields[j] = assemble_field(signals[j], setup.request(Role::kSignal));
    } catch (const std::exception& e) {
      signal_errors[j] = e.what();
    }
  }

  std::vector<std::string> cell_errors(rows * cols);
  // Non-converged cells are flagged but still carry a usable estimate.
  std::vector<char> estimate_only(rows * cols, 0);
  const bool jitter = setup.jitter_ps > 0.0;
  detail::parallel_for(rows * cols, setup.jobs, [&](std::size_t cell) {
    const std::size_t i = cell / cols;
    const std::size_t j = cell % cols;
    auto& err = cell_errors[cell];
    if (!pump_errors[i].empty() || !signal_errors[j].empty()) {
      err = !pump_errors[i].empty() ? pump_errors[i] : signal_errors[j];
      return;
    }
    try {
      if (jitter) {
        const auto trace = delay_scan(pumps[i], signals[j], jitter_delays_ps, setup, cell);
        m.coupled_energy[i][j] = trace.peak_energy;
      } else {
        const auto r = simulate_pair(*pump_fields[i], *signal_fields[j], setup);
        m.coupled_energy[i][j] = r.coupled_energy;
        if (!r.converged) {
          err = "propagation did not converge";
          estimate_only[cell] = 1;
        }
      }
    } catch (const std::exception& e) {
      err = e.what();
    }
  });

  double scale = setup.detector.scale;
  if (options.normalize_to > 0.0) {
    double peak = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const int d = i < options.desired.size() ? options.desired[i] : -1;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!cell_errors[i * cols + j].empty() && !estimate_only[i * cols + j]) continue;
        if (options.desired.empty() || d == static_cast<int>(j)) peak = std::max(peak, m.coupled_energy[i][j]);
      }
    }
    if (peak > 0.0) scale = options.normalize_to / peak;
  }
  DetectorModel detector = setup.detector;
  detector.scale = scale;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const auto cell = i * cols + j;
      if (!cell_errors[cell].empty()) {
        m.flagged.push_back({i, j, cell_errors[cell]});
        if (!estimate_only[cell]) continue;
      }
      m.counts[i][j] = detect_counts(m.coupled_energy[i][j], detector, cell);
    }
  }

  m.metadata = {{"spatial_grid", setup.spatial},
                {"temporal_grid", setup.temporal},
                {"crystal", setup.crystal},
                {"pump", setup.pump},
                {"signal", setup.signal},
                {"count_scale", scale},
                {"poisson", setup.detector.poisson_seed.has_value()},
                {"jitter_ps", setup.jitter_ps}};
  return m;
}

SelectivityReport selectivity_report(const CountsMatrix& matrix, std::span<const int> desired) {
  SelectivityReport report;
  for (std::size_t i = 0; i < matrix.counts.size(); ++i) {
    SelectivityRow row;
    row.pump = i;
    row.desired = i < desired.size() ? desired[i] : -1;
    if (row.desired >= 0) {
      row.value = selectivity(matrix.counts[i], static_cast<std::size_t>(row.desired));
    } else {
      row.value.undefined = true;
      row.value.db = std::numeric_limits<double>::quiet_NaN();
    }
    report.rows.push_back(row);
  }
  return report;
}

std::vector<ModeLabel> mub_catalog(double width_ps, Role role) {
  if (!(width_ps > 0.0)) throw ConfigError("MUB catalog width must be positive");
  return {parse_mode_tag("T+", role), parse_mode_tag("T-", role), parse_mode_tag("T2", role)};
}

std::vector<ModeLabel> temporal_catalog(int max_m, int l, Role role) {
  std::vector<ModeLabel> out;
  for (int m = 0; m <= max_m; ++m) {
    auto label = ModeLabel::basis(l, m, role);
    label.name = l == 0 ? fmt::format("T{}", m) : fmt::format("X{}T{}", l, m);
    out.push_back(std::move(label));
  }
  return out;
}

std::vector<ModeLabel> spatial_catalog(int max_l, int m, Role role) {
  std::vector<ModeLabel> out;
  for (int l = -max_l; l <= max_l; ++l) {
    auto label = ModeLabel::basis(l, m, role);
    label.name = fmt::format("X{}T{}", l, m);
    out.push_back(std::move(label));
  }
  return out;
}

std::vector<ModeLabel> spatiotemporal_catalog(Role role) {
  std::vector<ModeLabel> out;
  for (int m = 0; m <= 2; ++m) {
    for (auto& label : spatial_catalog(2, m, role)) out.push_back(std::move(label));
  }
  return out;
}

namespace {

// Orders selectivities with +inf on top; undefined values are unordered.
std::optional<int> compare(const SelectivityValue& a, const SelectivityValue& b) {
  if (a.undefined || b.undefined) return std::nullopt;
  if (a.infinite && b.infinite) return 0;
  if (a.infinite) return 1;
  if (b.infinite) return -1;
  if (a.db < b.db) return -1;
  if (a.db > b.db) return 1;
  return 0;
}

}  // namespace

bool trend_holds(TrendDirection direction, std::span<const SelectivityValue> values) {
  if (direction == TrendDirection::kReport) return true;
  if (values.size() < 2) return false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const auto c = compare(values[i], values[i - 1]);
    if (!c) return false;
    switch (direction) {
      case TrendDirection::kIncreasing:
        if (*c <= 0) return false;
        break;
      case TrendDirection::kDecreasing:
        if (*c >= 0) return false;
        break;
      case TrendDirection::kNonDecreasing:
        if (*c < 0) return false;
        break;
      case TrendDirection::kReport:
        break;
    }
  }
  return true;
}

TrendReport trend_report(std::vector<TrendSeries> series) {
  TrendReport report;
  for (auto& s : series) {
    std::vector<SelectivityValue> values;
    for (const auto& p : s.points) values.push_back(p.value);
    s.pass = trend_holds(s.direction, values);
    report.all_pass = report.all_pass && s.pass;
  }
  report.series = std::move(series);
  return report;
}

std::string to_string(TrendAxis axis) {
  switch (axis) {
    case TrendAxis::kLength: return "length";
    case TrendAxis::kPulseWidth: return "pulse_width";
    case TrendAxis::kOptimization: return "optimization";
    case TrendAxis::kDeltaK: return "delta_k";
  }
  return "length";
}

std::string to_string(TrendDirection direction) {
  switch (direction) {
    case TrendDirection::kIncreasing: return "increasing";
    case TrendDirection::kDecreasing: return "decreasing";
    case TrendDirection::kNonDecreasing: return "non_decreasing";
    case TrendDirection::kReport: return "report";
  }
  return "report";
}

TrendAxis parse_trend_axis(const std::string& s) {
  if (s == "length") return TrendAxis::kLength;
  if (s == "pulse_width") return TrendAxis::kPulseWidth;
  if (s == "optimization") return TrendAxis::kOptimization;
  if (s == "delta_k") return TrendAxis::kDeltaK;
  throw ConfigError(fmt::format("unknown trend axis '{}'", s));
}

TrendDirection parse_trend_direction(const std::string& s) {
  if (s == "increasing") return TrendDirection::kIncreasing;
  if (s == "decreasing") return TrendDirection::kDecreasing;
  if (s == "non_decreasing") return TrendDirection::kNonDecreasing;
  if (s == "report") return TrendDirection::kReport;
  throw ConfigError(fmt::format("unknown trend direction '{}'", s));
}

}  // namespace qpms
