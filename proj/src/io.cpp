#include "qpms/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "json_reader.hpp"
#include "qpms/error.hpp"
#include "qpms/metrics.hpp"

namespace qpms {

using detail::ObjectReader;

void to_json(json& j, const SpatialGrid& g) {
  j = {{"nx", g.nx}, {"ny", g.ny}, {"extent_x_um", g.extent_x}, {"extent_y_um", g.extent_y}};
}

void to_json(json& j, const TemporalGrid& g) { j = {{"nt", g.nt}, {"window_ps", g.window}}; }

void to_json(json& j, const CrystalSpec& c) {
  j = {{"length_cm", c.length_cm},   {"walkoff_ps_per_cm", c.walkoff_ps_per_cm},
       {"delta_k_rad_per_cm", c.delta_k_rad_per_cm}, {"kappa", c.kappa},
       {"nz_steps", c.nz_steps},     {"diffraction", c.diffraction},
       {"depleted", c.depleted}};
}

void to_json(json& j, const DetectorModel& d) {
  j = {{"fiber_waist_um", d.fiber_waist_um}, {"scale", d.scale}};
  if (d.poisson_seed) j["poisson_seed"] = *d.poisson_seed;
}

void to_json(json& j, const BeamSettings& b) {
  j = {{"waist_um", b.waist_um},
       {"width_ps", b.width_ps},
       {"wavelength_nm", b.carrier_nm},
       {"use_comb", b.use_comb},
       {"phase_only", b.phase_only}};
}

void to_json(json& j, const ModeLabel& label) {
  json terms = json::array();
  for (const auto& t : label.terms) {
    terms.push_back({{"l", t.l}, {"m", t.m}, {"coeff_re", t.coeff.real()}, {"coeff_im", t.coeff.imag()}});
  }
  j = {{"name", label.display_name()},
       {"role", label.role == Role::kPump ? "pump" : "signal"},
       {"terms", std::move(terms)}};
}

void to_json(json& j, const CombSpec& comb) {
  j = {{"n_lines", comb.n_lines},
       {"spacing_ghz", comb.spacing_ghz},
       {"center_wavelength_nm", comb.center_wavelength_nm},
       {"line_amp", comb.amplitudes()},
       {"line_phase", comb.phases()}};
}

namespace {

template <class Fn>
auto rethrow_as_validation(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ValidationError(path, e.what());
  }
}

}  // namespace

SpatialGrid read_spatial_grid(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SpatialGrid g;
  g.nx = r.optional<std::size_t>("nx", g.nx);
  g.ny = r.optional<std::size_t>("ny", g.ny);
  g.extent_x = r.optional<double>("extent_x_um", g.extent_x);
  g.extent_y = r.optional<double>("extent_y_um", g.extent_y);
  r.finish();
  rethrow_as_validation(path, [&] { g.validate(); return 0; });
  return g;
}

TemporalGrid read_temporal_grid(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TemporalGrid g;
  g.nt = r.optional<std::size_t>("nt", g.nt);
  g.window = r.optional<double>("window_ps", g.window);
  r.finish();
  rethrow_as_validation(path, [&] { g.validate(); return 0; });
  return g;
}

CrystalSpec read_crystal(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  CrystalSpec c;
  c.length_cm = r.optional<double>("length_cm", c.length_cm);
  c.walkoff_ps_per_cm = r.optional<double>("walkoff_ps_per_cm", c.walkoff_ps_per_cm);
  c.delta_k_rad_per_cm = r.optional<double>("delta_k_rad_per_cm", c.delta_k_rad_per_cm);
  c.kappa = r.optional<double>("kappa", c.kappa);
  c.nz_steps = r.optional<int>("nz_steps", c.nz_steps);
  c.diffraction = r.optional<bool>("diffraction", c.diffraction);
  c.depleted = r.optional<bool>("depleted", c.depleted);
  r.finish();
  rethrow_as_validation(path, [&] { c.validate(); return 0; });
  return c;
}

DetectorModel read_detector(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DetectorModel d;
  d.fiber_waist_um = r.optional<double>("fiber_waist_um", d.fiber_waist_um);
  d.scale = r.optional<double>("scale", d.scale);
  if (r.has("poisson_seed")) d.poisson_seed = r.required<std::uint64_t>("poisson_seed");
  r.finish();
  rethrow_as_validation(path, [&] { d.validate(); return 0; });
  return d;
}

BeamSettings read_beam(const json& j, const std::string& path, double default_wavelength_nm) {
  ObjectReader r(j, path);
  BeamSettings b;
  b.carrier_nm = default_wavelength_nm;
  b.waist_um = r.optional<double>("waist_um", b.waist_um);
  b.width_ps = r.optional<double>("width_ps", b.width_ps);
  b.carrier_nm = r.optional<double>("wavelength_nm", b.carrier_nm);
  b.use_comb = r.optional<bool>("use_comb", b.use_comb);
  b.phase_only = r.optional<bool>("phase_only", b.phase_only);
  r.finish();
  if (!(b.waist_um > 0.0)) throw ValidationError(r.child("waist_um"), "must be positive");
  if (!(b.width_ps > 0.0)) throw ValidationError(r.child("width_ps"), "must be positive");
  if (!(b.carrier_nm > 0.0)) throw ValidationError(r.child("wavelength_nm"), "must be positive");
  return b;
}

ModeLabel read_mode_label(const json& j, const std::string& path, Role role) {
  if (j.is_string()) {
    return rethrow_as_validation(path, [&] { return parse_mode_tag(j.get<std::string>(), role); });
  }
  ObjectReader r(j, path);
  const std::string name = r.optional<std::string>("name", "");
  const json& terms = r.raw("terms");
  r.finish();
  if (!terms.is_array() || terms.empty()) throw ValidationError(r.child("terms"), "expected a nonempty array");
  std::vector<ModeTerm> parsed;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    ObjectReader t(terms[i], fmt::format("{}/{}", r.child("terms"), i));
    ModeTerm term;
    term.l = t.required<int>("l");
    term.m = t.required<int>("m");
    if (term.m < 0) throw ValidationError(t.child("m"), "HG order must be non-negative");
    term.coeff = cplx(t.optional<double>("coeff_re", 1.0), t.optional<double>("coeff_im", 0.0));
    t.finish();
    parsed.push_back(term);
  }
  return rethrow_as_validation(path, [&] { return ModeLabel::superposition(std::move(parsed), role, name); });
}

CombSpec read_comb(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  CombSpec c;
  c.n_lines = r.optional<std::size_t>("n_lines", c.n_lines);
  c.spacing_ghz = r.optional<double>("spacing_ghz", c.spacing_ghz);
  c.center_wavelength_nm = r.optional<double>("center_wavelength_nm", c.center_wavelength_nm);
  std::vector<double> amp;
  std::vector<double> phase;
  if (r.has("line_amp")) amp = r.raw("line_amp").get<std::vector<double>>();
  if (r.has("line_phase")) phase = r.raw("line_phase").get<std::vector<double>>();
  r.finish();
  if (amp.empty()) amp.assign(c.n_lines, 1.0);
  if (phase.empty()) phase.assign(c.n_lines, 0.0);
  if (amp.size() != c.n_lines) throw ValidationError(r.child("line_amp"), "length must equal n_lines");
  if (phase.size() != c.n_lines) throw ValidationError(r.child("line_phase"), "length must equal n_lines");
  if (std::any_of(amp.begin(), amp.end(), [](double a) { return a < 0.0; })) {
    throw ValidationError(r.child("line_amp"), "amplitudes must be non-negative");
  }
  CombSpec out = CombSpec::from_polar(amp, phase, c.spacing_ghz, c.center_wavelength_nm);
  rethrow_as_validation(path, [&] {
    out.normalize();
    out.validate();
    return 0;
  });
  return out;
}

namespace {

std::string term_field(const ModeLabel& label, bool want_l) {
  const auto v = want_l ? label.common_l() : label.common_m();
  return v ? std::to_string(*v) : std::string{};
}

json selectivity_value_json(const SelectivityValue& v) {
  json j = {{"desired_counts", v.desired}, {"others_counts", v.others},
            {"infinite", v.infinite},      {"undefined", v.undefined}};
  j["db"] = v.finite() && std::isfinite(v.db) ? json(v.db) : json(nullptr);
  return j;
}

std::string db_text(const SelectivityValue& v) {
  if (v.undefined) return "undefined";
  if (v.infinite) return "+inf";
  return fmt::format("{:.2f}", v.db);
}

}  // namespace

std::string counts_csv(const CountsMatrix& m) {
  std::string out = "pump_l,pump_m,signal_l,signal_m,counts,pump_label,signal_label\n";
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    const auto& p = m.pump_labels[i];
    for (std::size_t j = 0; j < m.counts[i].size(); ++j) {
      const auto& s = m.signal_labels[j];
      out += fmt::format("{},{},{},{},{},{},{}\n", term_field(p, true), term_field(p, false), term_field(s, true),
                         term_field(s, false), m.counts[i][j], p.display_name(), s.display_name());
    }
  }
  return out;
}

json counts_json(const CountsMatrix& m) {
  json flagged = json::array();
  for (const auto& f : m.flagged) flagged.push_back({{"row", f.row}, {"col", f.col}, {"message", f.message}});
  return {{"pump_labels", m.pump_labels}, {"signal_labels", m.signal_labels},
          {"counts", m.counts},           {"coupled_energy", m.coupled_energy},
          {"flagged", flagged},           {"metadata", m.metadata}};
}

json selectivity_json(const SelectivityReport& report, const CountsMatrix& m) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = selectivity_value_json(r.value);
    row["pump"] = m.pump_labels[r.pump].display_name();
    row["desired_index"] = r.desired;
    row["desired_signal"] = r.desired >= 0 ? json(m.signal_labels[static_cast<std::size_t>(r.desired)].display_name())
                                           : json(nullptr);
    rows.push_back(std::move(row));
  }
  return {{"rows", rows}};
}

std::string selectivity_table(const SelectivityReport& report, const CountsMatrix& m) {
  std::string out = fmt::format("{:<24} {:<24} {:>12}\n", "pump", "desired signal", "S (dB)");
  for (const auto& r : report.rows) {
    const std::string desired =
        r.desired >= 0 ? m.signal_labels[static_cast<std::size_t>(r.desired)].display_name() : "-";
    out += fmt::format("{:<24} {:<24} {:>12}\n", m.pump_labels[r.pump].display_name(), desired, db_text(r.value));
  }
  return out;
}

json trend_json(const TrendReport& report) {
  json series = json::array();
  for (const auto& s : report.series) {
    json points = json::array();
    for (const auto& p : s.points) {
      json pj = selectivity_value_json(p.value);
      pj["axis_value"] = p.axis_value;
      pj["label"] = p.label;
      points.push_back(std::move(pj));
    }
    series.push_back({{"name", s.name},
                      {"axis", to_string(s.axis)},
                      {"direction", to_string(s.direction)},
                      {"points", points},
                      {"pass", s.pass}});
  }
  return {{"series", series}, {"all_pass", report.all_pass}};
}

std::string delay_trace_csv(const DelayTrace& trace) {
  std::string out = "delay_ps,counts\n";
  for (std::size_t i = 0; i < trace.delays_ps.size(); ++i) {
    out += fmt::format("{},{}\n", trace.delays_ps[i], trace.counts[i]);
  }
  return out;
}

std::string spectral_csv(const CombSpec& comb) {
  std::string out = "wavelength_nm,power_db\n";
  for (const auto& line : spectral_profile(comb)) out += fmt::format("{},{}\n", line.wavelength_nm, line.power_db);
  return out;
}

std::string pgm_image(const std::vector<double>& image, std::size_t nx, std::size_t ny, double max_value) {
  std::string out = fmt::format("P5\n{} {}\n255\n", nx, ny);
  // Rows of the image are y, columns are x; y increases upward.
  for (std::size_t row = 0; row < ny; ++row) {
    const std::size_t iy = ny - 1 - row;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double v = max_value > 0.0 ? image[ix * ny + iy] / max_value : 0.0;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
  }
  return out;
}

std::string matrix_csv(const std::vector<double>& image, std::size_t nx, std::size_t ny) {
  std::string out;
  for (std::size_t row = 0; row < ny; ++row) {
    const std::size_t iy = ny - 1 - row;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      if (ix > 0) out += ',';
      out += fmt::format("{}", image[ix * ny + iy]);
    }
    out += '\n';
  }
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string out;
  for (unsigned int i = 0; i < length; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::filesystem::filesystem_error("cannot open for writing", path, std::make_error_code(std::errc::io_error));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
}

}  // namespace qpms
