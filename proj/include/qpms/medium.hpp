#pragma once

#include <span>
#include <vector>

#include "qpms/grid.hpp"

namespace qpms {

/// sqrt of the 1 %/W/cm^2 normalized conversion efficiency.
inline constexpr double kDefaultNormalizedEfficiency = 0.01;

/// kappa such that |A_sf|^2 = kappa^2 |A_p|^2 |A_s|^2 L^2 gives `eta` (1/W/cm^2)
/// for a CW pump of 1 W over 1 cm.
double kappa_from_normalized_efficiency(double eta_per_w_cm2);

/// 1/lambda_sf = 1/lambda_p + 1/lambda_s
double sf_wavelength_nm(double pump_nm, double signal_nm);

/// chi(2) crystal in the frame co-moving with pump and signal. Only the SF
/// envelope drifts, at walkoff_ps_per_cm. Intra-pulse GVD is not modelled.
struct CrystalSpec {
  double length_cm = 2.5;
  double walkoff_ps_per_cm = 1.2;
  double delta_k_rad_per_cm = 0.0;
  double kappa = 0.1;
  int nz_steps = 32;
  bool diffraction = false;
  /// Three-wave variant: the signal is depleted as SF builds up.
  bool depleted = false;

  double walkoff_ps() const { return walkoff_ps_per_cm * length_cm; }
  void validate() const;
};

struct PhaseMatchingCurve {
  std::vector<double> wavelength_nm;
  std::vector<double> efficiency;  ///< relative, peak 1 at zero mismatch
  double center_nm = 0.0;          ///< midpoint of the half-maximum crossings
  double fwhm_nm = 0.0;
};

/// sinc^2((delta_k - 2 pi walkoff_rate dnu) L / 2) for an optical detuning dnu (THz).
double phase_matching_efficiency(const CrystalSpec& crystal, double detuning_thz);

/// Samples the curve over swept input wavelengths around the phase-matched one.
PhaseMatchingCurve phase_matching_curve(const CrystalSpec& crystal, std::span<const double> wavelengths_nm,
                                        double phase_matched_nm);

enum class FieldRole { kPump, kSignal, kSum };

/// Frequency-domain multipliers for one linear sub-step. The full operator is
/// spatial (x) temporal; `spatial` is empty when diffraction is disabled.
struct LinearStep {
  CVector temporal;  ///< nt, FFT order
  CVector spatial;   ///< nx * ny, FFT order

  bool has_spatial() const { return !spatial.empty(); }
};

LinearStep linear_step_operator(const CrystalSpec& crystal, FieldRole role, double dz_cm,
                                const SpatialGrid& spatial, const TemporalGrid& temporal, double carrier_nm);

}  // namespace qpms
