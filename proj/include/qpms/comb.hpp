#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qpms/grid.hpp"

namespace qpms {

/// Equally spaced frequency comb with per-line complex weights. Line k sits at
/// optical frequency offset (k - n_lines/2) * spacing from the centre line.
struct CombSpec {
  std::size_t n_lines = 37;
  double spacing_ghz = 25.0;
  double center_wavelength_nm = 1551.0;
  CVector line_weights;

  /// Equal amplitudes, zero phase, normalized.
  static CombSpec flat(std::size_t n_lines = 37, double spacing_ghz = 25.0,
                       double center_wavelength_nm = 1551.0);
  static CombSpec from_polar(std::span<const double> amplitudes, std::span<const double> phases,
                             double spacing_ghz = 25.0, double center_wavelength_nm = 1551.0);

  int line_order(std::size_t k) const {
    return static_cast<int>(k) - static_cast<int>(n_lines / 2);
  }
  double line_offset_thz(std::size_t k) const { return line_order(k) * spacing_ghz * 1e-3; }
  double line_wavelength_nm(std::size_t k) const;
  double period_ps() const { return 1000.0 / spacing_ghz; }

  std::vector<double> amplitudes() const;
  /// Phases wrapped into [0, 2 pi).
  std::vector<double> phases() const;

  /// Scales weights to unit total power. Throws ConfigError on an all-zero comb.
  void normalize();
  void validate() const;
};

/// Synthesis matrix E(t_i) = sum_k w_k exp(-i 2 pi f_k t_i) for one comb
/// geometry on one temporal grid, with its least-squares factorization.
class CombBasis {
 public:
  CombBasis(std::size_t n_lines, double spacing_ghz, const TemporalGrid& grid);
  explicit CombBasis(const CombSpec& spec, const TemporalGrid& grid)
      : CombBasis(spec.n_lines, spec.spacing_ghz, grid) {}

  /// Raw synthesis, no normalization.
  CVector synthesize_raw(std::span<const cplx> weights) const;
  /// Synthesis scaled to unit L2 norm on the grid.
  CVector synthesize(std::span<const cplx> weights) const;
  /// Least-squares line weights reproducing `envelope`.
  CVector analyze(std::span<const cplx> envelope) const;

  std::size_t n_lines() const { return n_lines_; }
  const TemporalGrid& grid() const { return grid_; }

 private:
  std::size_t n_lines_;
  TemporalGrid grid_;
  Eigen::MatrixXcd basis_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr_;
};

/// Unit-norm envelope of the comb on `grid`. The window must not exceed the comb period.
CVector comb_synthesize(const CombSpec& spec, const TemporalGrid& grid);

/// Projects an envelope back onto the comb lines; returned weights are normalized.
CombSpec comb_analyze(std::span<const cplx> envelope, const CombSpec& layout, const TemporalGrid& grid);

struct CombFit {
  CombSpec spec;
  /// |<target|synth>|^2 with both sides unit-normalized.
  double fidelity = 0.0;
};

/// Least-squares comb approximation of a target envelope. With `phase_only`
/// the amplitudes are flat and only the fitted phases are kept.
CombFit fit_comb_to_mode(std::span<const cplx> target, const CombSpec& layout,
                         const TemporalGrid& grid, bool phase_only = false);

struct SpectralLine {
  double wavelength_nm;
  double power_db;
};

/// Line-by-line power spectrum relative to the strongest line (0 dB).
/// Zero-power lines are floored at -100 dB.
std::vector<SpectralLine> spectral_profile(const CombSpec& spec);

}  // namespace qpms
