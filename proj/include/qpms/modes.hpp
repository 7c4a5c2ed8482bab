#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpms/comb.hpp"
#include "qpms/grid.hpp"

namespace qpms {

enum class Role { kPump, kSignal };

struct ModeTerm {
  int l = 0;  ///< OAM (azimuthal) index of the LG spatial factor.
  int m = 0;  ///< Hermite-Gaussian temporal order.
  cplx coeff{1.0, 0.0};
};

/// A superposition of |X_l> (x) |T_m> states.
struct ModeLabel {
  std::vector<ModeTerm> terms;
  Role role = Role::kSignal;
  /// Display tag used in exports; derived from the terms when empty.
  std::string name;

  static ModeLabel basis(int l, int m, Role role = Role::kSignal);
  /// Normalizes the coefficients and applies the global phase convention.
  static ModeLabel superposition(std::vector<ModeTerm> terms, Role role = Role::kSignal,
                                 std::string name = {});

  /// Unit total weight, first nonzero coefficient real-positive.
  void normalize();
  /// Throws ConfigError on an empty/unnormalized label or a negative order.
  void validate() const;
  /// l in [-2, 2] and m in [0, 2]. Labels outside still work.
  bool in_standard_catalog() const;

  std::optional<int> common_l() const;
  std::optional<int> common_m() const;
  std::string display_name() const;
};

/// Parses compact tags: "X-1T0", "X2T1", "T+", "X1T-", "T2" (missing X means l = 0).
ModeLabel parse_mode_tag(const std::string& tag, Role role = Role::kSignal);

/// Signal label matched to a pump: every term (l, m, c) maps to (-l, m, c).
ModeLabel matched_signal(const ModeLabel& pump);
bool same_modes(const ModeLabel& a, const ModeLabel& b, double tol = 1e-9);

/// LG_{p=0}^l with amplitude ~ (r sqrt2 / w)^|l| exp(-r^2/w^2) exp(i l phi),
/// unit L2 norm on the grid. The unpaired Nyquist row and column
/// (x = -extent_x, y = -extent_y) carry no field.
CVector lg_mode(int l, double waist_um, const SpatialGrid& grid, int radial = 0);

/// Gaussian fibre-mode profile exp(-r^2/w^2), unit norm, same edge convention.
CVector gaussian_spot(double waist_um, const SpatialGrid& grid);

/// Hermite-Gaussian scale tau such that |T_0|^2 has the given FWHM.
double hg_scale(double fwhm_ps);

/// H_m(x) exp(-x^2/2) with x = (t - delay)/tau, unit L2 norm on the grid.
CVector hg_temporal_mode(int m, double fwhm_ps, const TemporalGrid& grid, double delay_ps = 0.0);

/// sum conj(a) b * weight
cplx inner(std::span<const cplx> a, std::span<const cplx> b, double weight);
double norm_sq(std::span<const cplx> a, double weight);
/// Scales `v` to unit norm under `weight`; no-op for an all-zero vector.
void normalize_in_place(std::span<cplx> v, double weight);

struct SeparableFactors {
  CVector spatial;   ///< nx * ny, index ix * ny + iy
  CVector temporal;  ///< nt
};

/// Complex envelope over (x, y, t). Dense storage is row-major with t fastest:
/// index (ix * ny + iy) * nt + it. Separably built fields may omit the dense
/// array and carry only their factors.
class SpatioTemporalField {
 public:
  SpatioTemporalField(SpatialGrid spatial, TemporalGrid temporal, double carrier_nm, CVector dense);
  static SpatioTemporalField separable(SpatialGrid spatial, TemporalGrid temporal, double carrier_nm,
                                       CVector spatial_factor, CVector temporal_factor);

  const SpatialGrid& spatial_grid() const { return spatial_; }
  const TemporalGrid& temporal_grid() const { return temporal_; }
  double carrier_nm() const { return carrier_nm_; }
  const std::optional<SeparableFactors>& separable_cache() const { return separable_; }
  bool has_dense() const { return !dense_.empty(); }

  /// Dense amplitude; built from the factors when the field is separable-only.
  CVector to_dense() const;
  cplx at(std::size_t ix, std::size_t iy, std::size_t it) const;

  double energy() const;
  /// Time-integrated intensity per pixel.
  std::vector<double> spatial_intensity() const;

  SpatioTemporalField scaled(cplx factor) const;

 private:
  SpatioTemporalField(SpatialGrid spatial, TemporalGrid temporal, double carrier_nm, SeparableFactors factors);

  SpatialGrid spatial_;
  TemporalGrid temporal_;
  double carrier_nm_;
  CVector dense_;
  std::optional<SeparableFactors> separable_;
};

/// How one arm (pump or signal) is realized on the grids.
struct BeamSettings {
  double waist_um = 300.0;
  double width_ps = 2.0;  ///< intensity FWHM of the fundamental temporal mode
  double carrier_nm = 1559.0;
  bool use_comb = false;
  bool phase_only = false;
};

struct FieldRequest {
  SpatialGrid spatial;
  TemporalGrid temporal;
  BeamSettings beam;
  CombSpec comb_layout;  ///< line count and spacing used when beam.use_comb is set
  double delay_ps = 0.0;
};

/// Temporal factor T_m(t - delay), replaced by its comb fit when requested.
CVector temporal_factor(int m, const FieldRequest& request);

/// sum_terms coeff * LG_l(x, y) * T_m(t - delay), normalized. The separable
/// cache is filled whenever all terms share l or all share m.
SpatioTemporalField assemble_field(const ModeLabel& label, const FieldRequest& request);

}  // namespace qpms
