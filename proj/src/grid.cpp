#include "qpms/grid.hpp"

#include <fmt/core.h>

#include "qpms/error.hpp"

namespace qpms {
namespace {

double fft_frequency(std::size_t k, std::size_t n, double span) {
  const auto signed_k = k < n / 2 ? static_cast<double>(k)
                                  : static_cast<double>(k) - static_cast<double>(n);
  return signed_k / span;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

double SpatialGrid::fx(std::size_t i) const { return fft_frequency(i, nx, 2.0 * extent_x); }
double SpatialGrid::fy(std::size_t j) const { return fft_frequency(j, ny, 2.0 * extent_y); }

void SpatialGrid::validate() const {
  if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0) {
    throw ConfigError(fmt::format("spatial grid {}x{}: sample counts must be even and >= 8", nx, ny));
  }
  if (!(extent_x > 0.0) || !(extent_y > 0.0)) {
    throw ConfigError(fmt::format("spatial grid extents ({}, {}) um must be positive", extent_x, extent_y));
  }
}

void SpatialGrid::check_waist(double waist_um) const {
  if (!(waist_um > 0.0)) {
    throw ConfigError(fmt::format("beam waist {} um must be positive", waist_um));
  }
  constexpr double slack = 1e-12;
  if (extent_x < 3.0 * waist_um * (1.0 - slack) || extent_y < 3.0 * waist_um * (1.0 - slack)) {
    throw ConfigError(fmt::format(
        "beam waist {} um needs extent >= {} um, grid has extent ({}, {}) um",
        waist_um, 3.0 * waist_um, extent_x, extent_y));
  }
}

double TemporalGrid::f(std::size_t k) const { return fft_frequency(k, nt, window); }

void TemporalGrid::validate() const {
  if (nt < 64 || !is_power_of_two(nt)) {
    throw ConfigError(fmt::format("temporal grid nt={} must be a power of two >= 64", nt));
  }
  if (!(window > 0.0)) {
    throw ConfigError(fmt::format("temporal window {} ps must be positive", window));
  }
}

void TemporalGrid::check_pulse(double fwhm_ps) const {
  if (!(fwhm_ps > 0.0)) {
    throw ConfigError(fmt::format("pulse width {} ps must be positive", fwhm_ps));
  }
  if (window < 8.0 * fwhm_ps * (1.0 - 1e-12)) {
    throw ConfigError(fmt::format(
        "temporal window {} ps too small for {} ps pulses (needs >= {} ps)",
        window, fwhm_ps, 8.0 * fwhm_ps));
  }
}

void TemporalGrid::check_comb_period(double spacing_ghz) const {
  const double period_ps = 1000.0 / spacing_ghz;
  if (window > period_ps * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format(
        "temporal window {} ps exceeds the {} GHz comb period {} ps (pulse train would alias)",
        window, spacing_ghz, period_ps));
  }
}

}  // namespace qpms
