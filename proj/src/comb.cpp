#include "qpms/comb.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "qpms/error.hpp"

namespace qpms {

CombSpec CombSpec::flat(std::size_t n_lines, double spacing_ghz, double center_wavelength_nm) {
  CombSpec spec;
  spec.n_lines = n_lines;
  spec.spacing_ghz = spacing_ghz;
  spec.center_wavelength_nm = center_wavelength_nm;
  spec.line_weights.assign(n_lines, cplx(1.0 / std::sqrt(static_cast<double>(n_lines)), 0.0));
  return spec;
}

CombSpec CombSpec::from_polar(std::span<const double> amplitudes, std::span<const double> phases,
                              double spacing_ghz, double center_wavelength_nm) {
  if (amplitudes.size() != phases.size()) {
    throw ContractError("comb amplitude and phase vectors differ in length");
  }
  CombSpec spec;
  spec.n_lines = amplitudes.size();
  spec.spacing_ghz = spacing_ghz;
  spec.center_wavelength_nm = center_wavelength_nm;
  spec.line_weights.resize(spec.n_lines);
  for (std::size_t k = 0; k < spec.n_lines; ++k) {
    spec.line_weights[k] = std::polar(amplitudes[k], phases[k]);
  }
  return spec;
}

double CombSpec::line_wavelength_nm(std::size_t k) const {
  const double nu0 = kLightNmTHz / center_wavelength_nm;
  return kLightNmTHz / (nu0 + line_offset_thz(k));
}

std::vector<double> CombSpec::amplitudes() const {
  std::vector<double> out(line_weights.size());
  std::transform(line_weights.begin(), line_weights.end(), out.begin(),
                 [](cplx w) { return std::abs(w); });
  return out;
}

std::vector<double> CombSpec::phases() const {
  std::vector<double> out(line_weights.size());
  std::transform(line_weights.begin(), line_weights.end(), out.begin(), [](cplx w) {
    double p = std::arg(w);
    if (p < 0.0) p += kTwoPi;
    return p >= kTwoPi ? 0.0 : p;
  });
  return out;
}

void CombSpec::normalize() {
  double power = 0.0;
  for (const auto& w : line_weights) power += std::norm(w);
  if (!(power > 0.0)) throw ConfigError("comb has no power in any line");
  const double scale = 1.0 / std::sqrt(power);
  for (auto& w : line_weights) w *= scale;
}

void CombSpec::validate() const {
  if (n_lines == 0 || n_lines % 2 == 0) {
    throw ConfigError(fmt::format("comb needs an odd line count, got {}", n_lines));
  }
  if (!(spacing_ghz > 0.0)) throw ConfigError("comb spacing must be positive");
  if (!(center_wavelength_nm > 0.0)) throw ConfigError("comb centre wavelength must be positive");
  if (line_weights.size() != n_lines) {
    throw ConfigError(fmt::format("comb has {} weights for {} lines", line_weights.size(), n_lines));
  }
  double power = 0.0;
  for (const auto& w : line_weights) power += std::norm(w);
  if (std::abs(power - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("comb line power sums to {}, expected 1", power));
  }
}

CombBasis::CombBasis(std::size_t n_lines, double spacing_ghz, const TemporalGrid& grid)
    : n_lines_(n_lines), grid_(grid), basis_(grid.nt, n_lines) {
  const double centre = static_cast<double>(n_lines / 2);
  for (std::size_t k = 0; k < n_lines; ++k) {
    const double f = (static_cast<double>(k) - centre) * spacing_ghz * 1e-3;
    for (std::size_t i = 0; i < grid.nt; ++i) {
      basis_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          std::polar(1.0, -kTwoPi * f * grid.t(i));
    }
  }
  qr_.compute(basis_);
}

CVector CombBasis::synthesize_raw(std::span<const cplx> weights) const {
  if (weights.size() != n_lines_) throw ContractError("comb weight count mismatch");
  Eigen::Map<const Eigen::VectorXcd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  Eigen::VectorXcd e = basis_ * w;
  return CVector(e.data(), e.data() + e.size());
}

CVector CombBasis::synthesize(std::span<const cplx> weights) const {
  CVector e = synthesize_raw(weights);
  double energy = 0.0;
  for (const auto& v : e) energy += std::norm(v);
  energy *= grid_.dt();
  if (!(energy > 0.0)) throw ConfigError("comb synthesis produced an empty envelope");
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& v : e) v *= scale;
  return e;
}

CVector CombBasis::analyze(std::span<const cplx> envelope) const {
  if (envelope.size() != grid_.nt) throw ContractError("envelope length does not match the temporal grid");
  Eigen::Map<const Eigen::VectorXcd> e(envelope.data(), static_cast<Eigen::Index>(envelope.size()));
  Eigen::VectorXcd w = qr_.solve(e);
  return CVector(w.data(), w.data() + w.size());
}

CVector comb_synthesize(const CombSpec& spec, const TemporalGrid& grid) {
  grid.validate();
  grid.check_comb_period(spec.spacing_ghz);
  return CombBasis(spec, grid).synthesize(spec.line_weights);
}

CombSpec comb_analyze(std::span<const cplx> envelope, const CombSpec& layout, const TemporalGrid& grid) {
  grid.check_comb_period(layout.spacing_ghz);
  CombSpec out = layout;
  out.line_weights = CombBasis(layout, grid).analyze(envelope);
  out.normalize();
  return out;
}

CombFit fit_comb_to_mode(std::span<const cplx> target, const CombSpec& layout,
                         const TemporalGrid& grid, bool phase_only) {
  grid.check_comb_period(layout.spacing_ghz);
  const CombBasis basis(layout, grid);
  CombFit fit{layout, 0.0};
  fit.spec.line_weights = basis.analyze(target);
  if (phase_only) {
    const double amp = 1.0 / std::sqrt(static_cast<double>(layout.n_lines));
    for (auto& w : fit.spec.line_weights) {
      w = std::polar(amp, std::abs(w) > 0.0 ? std::arg(w) : 0.0);
    }
  }
  fit.spec.normalize();

  const CVector synth = basis.synthesize(fit.spec.line_weights);
  double target_energy = 0.0;
  cplx overlap{};
  for (std::size_t i = 0; i < synth.size(); ++i) {
    target_energy += std::norm(target[i]);
    overlap += std::conj(target[i]) * synth[i];
  }
  target_energy *= grid.dt();
  overlap *= grid.dt();
  fit.fidelity = target_energy > 0.0 ? std::norm(overlap) / target_energy : 0.0;
  return fit;
}

std::vector<SpectralLine> spectral_profile(const CombSpec& spec) {
  double peak = 0.0;
  for (const auto& w : spec.line_weights) peak = std::max(peak, std::norm(w));
  std::vector<SpectralLine> lines;
  lines.reserve(spec.n_lines);
  // Descending frequency gives ascending wavelength.
  for (std::size_t i = spec.n_lines; i-- > 0;) {
    const double p = std::norm(spec.line_weights[i]);
    const double db = (p > 0.0 && peak > 0.0) ? std::max(-100.0, 10.0 * std::log10(p / peak)) : -100.0;
    lines.push_back({spec.line_wavelength_nm(i), db});
  }
  return lines;
}

}  // namespace qpms
