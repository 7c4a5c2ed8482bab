#include "qpms/medium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "qpms/error.hpp"

namespace qpms {

double kappa_from_normalized_efficiency(double eta_per_w_cm2) {
  if (!(eta_per_w_cm2 >= 0.0)) throw ConfigError("normalized efficiency must be non-negative");
  return std::sqrt(eta_per_w_cm2);
}

double sf_wavelength_nm(double pump_nm, double signal_nm) {
  return 1.0 / (1.0 / pump_nm + 1.0 / signal_nm);
}

void CrystalSpec::validate() const {
  if (!(length_cm > 0.0)) throw ConfigError(fmt::format("crystal length {} cm must be positive", length_cm));
  if (nz_steps < 16) throw ConfigError(fmt::format("nz_steps {} must be >= 16", nz_steps));
  if (!(walkoff_ps_per_cm >= 0.0)) throw ConfigError("walk-off rate must be non-negative");
  if (!std::isfinite(delta_k_rad_per_cm)) throw ConfigError("delta_k must be finite");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be non-negative");
}

double phase_matching_efficiency(const CrystalSpec& crystal, double detuning_thz) {
  const double arg =
      (crystal.delta_k_rad_per_cm - kTwoPi * crystal.walkoff_ps_per_cm * detuning_thz) * crystal.length_cm / 2.0;
  if (arg == 0.0) return 1.0;
  const double s = std::sin(arg) / arg;
  return s * s;
}

PhaseMatchingCurve phase_matching_curve(const CrystalSpec& crystal, std::span<const double> wavelengths_nm,
                                        double phase_matched_nm) {
  if (wavelengths_nm.empty()) throw ContractError("phase matching curve needs at least one wavelength");
  if (!std::is_sorted(wavelengths_nm.begin(), wavelengths_nm.end())) {
    throw ContractError("phase matching wavelengths must be sorted");
  }
  PhaseMatchingCurve curve;
  curve.wavelength_nm.assign(wavelengths_nm.begin(), wavelengths_nm.end());
  const double nu0 = kLightNmTHz / phase_matched_nm;
  for (double lambda : wavelengths_nm) {
    curve.efficiency.push_back(phase_matching_efficiency(crystal, kLightNmTHz / lambda - nu0));
  }

  const auto& w = curve.wavelength_nm;
  const auto& e = curve.efficiency;
  const auto peak = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
  const double half = 0.5 * e[peak];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double left = nan;
  double right = nan;
  for (std::size_t i = peak; i > 0; --i) {
    if (e[i - 1] < half) {
      left = w[i - 1] + (half - e[i - 1]) * (w[i] - w[i - 1]) / (e[i] - e[i - 1]);
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < e.size(); ++i) {
    if (e[i + 1] < half) {
      right = w[i] + (e[i] - half) * (w[i + 1] - w[i]) / (e[i] - e[i + 1]);
      break;
    }
  }
  curve.center_nm = 0.5 * (left + right);
  curve.fwhm_nm = right - left;
  return curve;
}

LinearStep linear_step_operator(const CrystalSpec& crystal, FieldRole role, double dz_cm,
                                const SpatialGrid& spatial, const TemporalGrid& temporal, double carrier_nm) {
  if (!(dz_cm > 0.0)) throw ContractError("linear step length must be positive");
  LinearStep step;
  step.temporal.assign(temporal.nt, cplx(1.0, 0.0));
  if (role == FieldRole::kSum) {
    const double drift = crystal.walkoff_ps_per_cm * dz_cm;
    for (std::size_t k = 0; k < temporal.nt; ++k) {
      step.temporal[k] = std::polar(1.0, -kTwoPi * temporal.f(k) * drift);
    }
  }
  if (crystal.diffraction) {
    const double k_carrier = kTwoPi / (carrier_nm * 1e-3);  // rad/um
    const double dz_um = dz_cm * 1e4;
    step.spatial.resize(spatial.size());
    for (std::size_t i = 0; i < spatial.nx; ++i) {
      const double kx = kTwoPi * spatial.fx(i);
      for (std::size_t j = 0; j < spatial.ny; ++j) {
        const double ky = kTwoPi * spatial.fy(j);
        step.spatial[i * spatial.ny + j] = std::polar(1.0, -(kx * kx + ky * ky) * dz_um / (2.0 * k_carrier));
      }
    }
  }
  return step;
}

}  // namespace qpms
