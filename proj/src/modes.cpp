#include "qpms/modes.hpp"

#include <cmath>
#include <map>
#include <regex>

#include <fmt/core.h>

#include "qpms/error.hpp"

namespace qpms {

ModeLabel ModeLabel::basis(int l, int m, Role role) {
  ModeLabel label;
  label.terms.push_back({l, m, cplx(1.0, 0.0)});
  label.role = role;
  return label;
}

ModeLabel ModeLabel::superposition(std::vector<ModeTerm> terms, Role role, std::string name) {
  ModeLabel label;
  label.terms = std::move(terms);
  label.role = role;
  label.name = std::move(name);
  label.normalize();
  return label;
}

void ModeLabel::normalize() {
  double total = 0.0;
  for (const auto& t : terms) total += std::norm(t.coeff);
  if (!(total > 0.0)) throw ConfigError("mode label has no nonzero coefficient");
  const double scale = 1.0 / std::sqrt(total);
  cplx phase{1.0, 0.0};
  for (const auto& t : terms) {
    if (std::abs(t.coeff) > 0.0) {
      phase = std::conj(t.coeff) / std::abs(t.coeff);
      break;
    }
  }
  for (auto& t : terms) t.coeff *= scale * phase;
}

void ModeLabel::validate() const {
  if (terms.empty()) throw ConfigError("mode label has no terms");
  double total = 0.0;
  for (const auto& t : terms) {
    if (t.m < 0) throw ConfigError(fmt::format("HG order must be non-negative, got {}", t.m));
    total += std::norm(t.coeff);
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("mode label '{}' has total weight {}, expected 1", display_name(), total));
  }
}

bool ModeLabel::in_standard_catalog() const {
  for (const auto& t : terms) {
    if (t.l < -2 || t.l > 2 || t.m < 0 || t.m > 2) return false;
  }
  return true;
}

std::optional<int> ModeLabel::common_l() const {
  if (terms.empty()) return std::nullopt;
  for (const auto& t : terms) {
    if (t.l != terms.front().l) return std::nullopt;
  }
  return terms.front().l;
}

std::optional<int> ModeLabel::common_m() const {
  if (terms.empty()) return std::nullopt;
  for (const auto& t : terms) {
    if (t.m != terms.front().m) return std::nullopt;
  }
  return terms.front().m;
}

std::string ModeLabel::display_name() const {
  if (!name.empty()) return name;
  if (terms.size() == 1) return fmt::format("X{}T{}", terms[0].l, terms[0].m);
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += '+';
    out += fmt::format("({:.4g}{:+.4g}i)X{}T{}", t.coeff.real(), t.coeff.imag(), t.l, t.m);
  }
  return out;
}

ModeLabel parse_mode_tag(const std::string& tag, Role role) {
  static const std::regex pattern(R"(^(?:X(-?\d+))?T(\d+|\+|-)$)");
  std::smatch match;
  if (!std::regex_match(tag, match, pattern)) {
    throw ConfigError(fmt::format("cannot parse mode tag '{}' (expected e.g. X-1T0, T+, X2T-)", tag));
  }
  const int l = match[1].matched ? std::stoi(match[1].str()) : 0;
  const std::string t = match[2].str();
  if (t == "+" || t == "-") {
    const double s = 1.0 / std::sqrt(2.0);
    const double sign = t == "+" ? 1.0 : -1.0;
    return ModeLabel::superposition({{l, 0, cplx(s, 0.0)}, {l, 1, cplx(sign * s, 0.0)}}, role, tag);
  }
  ModeLabel label = ModeLabel::basis(l, std::stoi(t), role);
  label.name = tag;
  return label;
}

ModeLabel matched_signal(const ModeLabel& pump) {
  ModeLabel out;
  out.role = Role::kSignal;
  bool all_zero_l = true;
  for (const auto& t : pump.terms) {
    out.terms.push_back({-t.l, t.m, t.coeff});
    all_zero_l = all_zero_l && t.l == 0;
  }
  if (all_zero_l) out.name = pump.name;
  return out;
}

bool same_modes(const ModeLabel& a, const ModeLabel& b, double tol) {
  std::map<std::pair<int, int>, cplx> diff;
  for (const auto& t : a.terms) diff[{t.l, t.m}] += t.coeff;
  for (const auto& t : b.terms) diff[{t.l, t.m}] -= t.coeff;
  for (const auto& [key, v] : diff) {
    if (std::abs(v) > tol) return false;
  }
  return true;
}

namespace {

template <class Profile>
CVector sample_spatial(const SpatialGrid& grid, Profile profile) {
  CVector out(grid.size());
  for (std::size_t ix = 1; ix < grid.nx; ++ix) {
    const double x = grid.x(ix);
    for (std::size_t iy = 1; iy < grid.ny; ++iy) {
      out[ix * grid.ny + iy] = profile(x, grid.y(iy));
    }
  }
  normalize_in_place(out, grid.cell_area());
  return out;
}

}  // namespace

CVector lg_mode(int l, double waist_um, const SpatialGrid& grid, int radial) {
  if (radial != 0) {
    throw ConfigError(fmt::format("LG radial index {} not supported; only p = 0 modes are modelled", radial));
  }
  grid.validate();
  grid.check_waist(waist_um);
  const int order = std::abs(l);
  return sample_spatial(grid, [&](double x, double y) {
    const double r2 = x * x + y * y;
    const double rho = std::sqrt(2.0 * r2) / waist_um;
    const double amp = std::pow(rho, order) * std::exp(-r2 / (waist_um * waist_um));
    return std::polar(amp, l * std::atan2(y, x));
  });
}

CVector gaussian_spot(double waist_um, const SpatialGrid& grid) {
  if (!(waist_um > 0.0)) throw ConfigError("fibre mode waist must be positive");
  grid.validate();
  return sample_spatial(grid, [&](double x, double y) {
    return cplx(std::exp(-(x * x + y * y) / (waist_um * waist_um)), 0.0);
  });
}

double hg_scale(double fwhm_ps) { return fwhm_ps / (2.0 * std::sqrt(std::log(2.0))); }

CVector hg_temporal_mode(int m, double fwhm_ps, const TemporalGrid& grid, double delay_ps) {
  if (m < 0) throw ConfigError(fmt::format("HG order must be non-negative, got {}", m));
  grid.validate();
  grid.check_pulse(fwhm_ps);
  const double tau = hg_scale(fwhm_ps);
  CVector out(grid.nt);
  for (std::size_t i = 0; i < grid.nt; ++i) {
    const double x = (grid.t(i) - delay_ps) / tau;
    double h_prev = 1.0;
    double h = 1.0;
    if (m >= 1) {
      h = 2.0 * x;
      for (int n = 1; n < m; ++n) {
        const double next = 2.0 * x * h - 2.0 * n * h_prev;
        h_prev = h;
        h = next;
      }
    }
    out[i] = cplx(h * std::exp(-0.5 * x * x), 0.0);
  }
  normalize_in_place(out, grid.dt());
  return out;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b, double weight) {
  if (a.size() != b.size()) throw ContractError("inner product of vectors with different lengths");
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc * weight;
}

double norm_sq(std::span<const cplx> a, double weight) {
  double acc = 0.0;
  for (const auto& v : a) acc += std::norm(v);
  return acc * weight;
}

void normalize_in_place(std::span<cplx> v, double weight) {
  const double e = norm_sq(v, weight);
  if (!(e > 0.0)) return;
  const double s = 1.0 / std::sqrt(e);
  for (auto& x : v) x *= s;
}

SpatioTemporalField::SpatioTemporalField(SpatialGrid spatial, TemporalGrid temporal, double carrier_nm,
                                         CVector dense)
    : spatial_(spatial), temporal_(temporal), carrier_nm_(carrier_nm), dense_(std::move(dense)) {
  if (!(carrier_nm_ > 0.0)) throw ConfigError("carrier wavelength must be positive");
  if (dense_.size() != spatial_.size() * temporal_.size()) {
    throw ContractError("dense amplitude size does not match the grids");
  }
}

SpatioTemporalField::SpatioTemporalField(SpatialGrid spatial, TemporalGrid temporal, double carrier_nm,
                                         SeparableFactors factors)
    : spatial_(spatial), temporal_(temporal), carrier_nm_(carrier_nm), separable_(std::move(factors)) {
  if (!(carrier_nm_ > 0.0)) throw ConfigError("carrier wavelength must be positive");
}

SpatioTemporalField SpatioTemporalField::separable(SpatialGrid spatial, TemporalGrid temporal,
                                                   double carrier_nm, CVector spatial_factor,
                                                   CVector temporal_factor) {
  if (spatial_factor.size() != spatial.size() || temporal_factor.size() != temporal.size()) {
    throw ContractError("separable factor sizes do not match the grids");
  }
  return SpatioTemporalField(spatial, temporal, carrier_nm,
                             SeparableFactors{std::move(spatial_factor), std::move(temporal_factor)});
}

CVector SpatioTemporalField::to_dense() const {
  if (has_dense()) return dense_;
  const auto& s = separable_->spatial;
  const auto& t = separable_->temporal;
  CVector out(s.size() * t.size());
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (std::size_t it = 0; it < t.size(); ++it) out[p * t.size() + it] = s[p] * t[it];
  }
  return out;
}

cplx SpatioTemporalField::at(std::size_t ix, std::size_t iy, std::size_t it) const {
  const std::size_t p = ix * spatial_.ny + iy;
  if (has_dense()) return dense_[p * temporal_.nt + it];
  return separable_->spatial[p] * separable_->temporal[it];
}

double SpatioTemporalField::energy() const {
  if (has_dense()) return norm_sq(dense_, spatial_.cell_area() * temporal_.dt());
  return norm_sq(separable_->spatial, spatial_.cell_area()) * norm_sq(separable_->temporal, temporal_.dt());
}

std::vector<double> SpatioTemporalField::spatial_intensity() const {
  std::vector<double> out(spatial_.size());
  if (!has_dense()) {
    const double te = norm_sq(separable_->temporal, temporal_.dt());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = std::norm(separable_->spatial[p]) * te;
    return out;
  }
  const std::size_t nt = temporal_.nt;
  for (std::size_t p = 0; p < out.size(); ++p) {
    double acc = 0.0;
    for (std::size_t it = 0; it < nt; ++it) acc += std::norm(dense_[p * nt + it]);
    out[p] = acc * temporal_.dt();
  }
  return out;
}

SpatioTemporalField SpatioTemporalField::scaled(cplx factor) const {
  SpatioTemporalField out = *this;
  for (auto& v : out.dense_) v *= factor;
  // Scale only one factor so the product scales once.
  if (out.separable_) {
    for (auto& v : out.separable_->temporal) v *= factor;
  }
  return out;
}

CVector temporal_factor(int m, const FieldRequest& request) {
  const auto& grid = request.temporal;
  if (!request.beam.use_comb) {
    return hg_temporal_mode(m, request.beam.width_ps, grid, request.delay_ps);
  }
  const CVector target = hg_temporal_mode(m, request.beam.width_ps, grid, 0.0);
  CombFit fit = fit_comb_to_mode(target, request.comb_layout, grid, request.beam.phase_only);
  for (std::size_t k = 0; k < fit.spec.n_lines; ++k) {
    fit.spec.line_weights[k] *= std::polar(1.0, kTwoPi * fit.spec.line_offset_thz(k) * request.delay_ps);
  }
  return CombBasis(fit.spec, grid).synthesize(fit.spec.line_weights);
}

SpatioTemporalField assemble_field(const ModeLabel& label, const FieldRequest& request) {
  label.validate();
  const auto& sg = request.spatial;
  const auto& tg = request.temporal;
  sg.validate();
  tg.validate();
  sg.check_waist(request.beam.waist_um);
  tg.check_pulse(request.beam.width_ps);
  if (request.beam.use_comb) tg.check_comb_period(request.comb_layout.spacing_ghz);

  std::map<int, CVector> spatial_cache;
  std::map<int, CVector> temporal_cache;
  auto spatial_of = [&](int l) -> const CVector& {
    auto it = spatial_cache.find(l);
    if (it == spatial_cache.end()) it = spatial_cache.emplace(l, lg_mode(l, request.beam.waist_um, sg)).first;
    return it->second;
  };
  auto temporal_of = [&](int m) -> const CVector& {
    auto it = temporal_cache.find(m);
    if (it == temporal_cache.end()) it = temporal_cache.emplace(m, temporal_factor(m, request)).first;
    return it->second;
  };
  const double carrier = request.beam.carrier_nm;

  if (auto l = label.common_l()) {
    CVector temporal(tg.nt);
    for (const auto& term : label.terms) {
      const auto& f = temporal_of(term.m);
      for (std::size_t i = 0; i < tg.nt; ++i) temporal[i] += term.coeff * f[i];
    }
    normalize_in_place(temporal, tg.dt());
    return SpatioTemporalField::separable(sg, tg, carrier, spatial_of(*l), std::move(temporal));
  }
  if (auto m = label.common_m()) {
    CVector spatial(sg.size());
    for (const auto& term : label.terms) {
      const auto& f = spatial_of(term.l);
      for (std::size_t p = 0; p < spatial.size(); ++p) spatial[p] += term.coeff * f[p];
    }
    normalize_in_place(spatial, sg.cell_area());
    return SpatioTemporalField::separable(sg, tg, carrier, std::move(spatial), temporal_of(*m));
  }

  CVector dense(sg.size() * tg.nt);
  for (const auto& term : label.terms) {
    const auto& s = spatial_of(term.l);
    const auto& t = temporal_of(term.m);
    for (std::size_t p = 0; p < s.size(); ++p) {
      const cplx cs = term.coeff * s[p];
      if (cs == cplx{}) continue;
      for (std::size_t it = 0; it < tg.nt; ++it) dense[p * tg.nt + it] += cs * t[it];
    }
  }
  normalize_in_place(dense, sg.cell_area() * tg.dt());
  return SpatioTemporalField(sg, tg, carrier, std::move(dense));
}

}  // namespace qpms
