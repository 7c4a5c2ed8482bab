#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qpms {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
/// Speed of light in nm * THz.
inline constexpr double kLightNmTHz = 299792.458;

/// Transverse sampling. Pixel centres sit at x_i = (i - nx/2) * dx, so the
/// optical axis falls on pixel (nx/2, ny/2). Extents are half-widths in um.
struct SpatialGrid {
  std::size_t nx = 128;
  std::size_t ny = 128;
  double extent_x = 900.0;
  double extent_y = 900.0;

  double dx() const { return 2.0 * extent_x / static_cast<double>(nx); }
  double dy() const { return 2.0 * extent_y / static_cast<double>(ny); }
  double x(std::size_t i) const { return (static_cast<double>(i) - static_cast<double>(nx / 2)) * dx(); }
  double y(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(ny / 2)) * dy(); }
  std::size_t size() const { return nx * ny; }
  double cell_area() const { return dx() * dy(); }

  /// Transverse spatial frequency (cycles/um) in FFT order.
  double fx(std::size_t i) const;
  double fy(std::size_t j) const;

  void validate() const;
  /// Throws ConfigError unless both extents are at least 3 * waist.
  void check_waist(double waist_um) const;

  bool operator==(const SpatialGrid&) const = default;
};

/// Time sampling in ps: t_i = (i - nt/2) * dt, so t = 0 is sample nt/2.
struct TemporalGrid {
  std::size_t nt = 512;
  double window = 40.0;

  double dt() const { return window / static_cast<double>(nt); }
  double t(std::size_t i) const { return (static_cast<double>(i) - static_cast<double>(nt / 2)) * dt(); }
  /// Conjugate frequency (THz) in FFT order.
  double f(std::size_t k) const;
  std::size_t size() const { return nt; }
  std::size_t zero_index() const { return nt / 2; }

  void validate() const;
  /// window >= 8 * fwhm.
  void check_pulse(double fwhm_ps) const;
  /// window <= 1 / spacing, i.e. one comb period.
  void check_comb_period(double spacing_ghz) const;

  bool operator==(const TemporalGrid&) const = default;
};

}  // namespace qpms
