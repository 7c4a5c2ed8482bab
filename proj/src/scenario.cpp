#include "qpms/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "json_reader.hpp"
#include "qpms/error.hpp"
#include "qpms/io.hpp"

namespace qpms {

using detail::ObjectReader;

namespace {

const std::vector<std::string> kSetupSections = {"spatial_grid", "temporal_grid", "crystal", "detector",
                                                 "pump",         "signal",        "comb",    "propagation"};

PropagationOptions read_propagation(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  PropagationOptions o;
  o.tolerance = r.optional<double>("tolerance", o.tolerance);
  o.max_steps = r.optional<int>("max_steps", o.max_steps);
  o.force_full = r.optional<bool>("force_full", o.force_full);
  r.finish();
  if (!(o.tolerance > 0.0)) throw ValidationError(r.child("tolerance"), "must be positive");
  if (o.max_steps < 16) throw ValidationError(r.child("max_steps"), "must be at least 16");
  return o;
}

/// Builds a setup from an object holding any of the setup sections.
SimulationSetup read_setup(const json& sections, const std::string& base, double jitter_ps, std::uint64_t seed) {
  SimulationSetup s;
  auto section = [&](const char* key) -> const json* {
    return sections.contains(key) ? &sections.at(key) : nullptr;
  };
  const json empty = json::object();
  auto at = [&](const char* key) { return base + "/" + key; };
  s.spatial = read_spatial_grid(section("spatial_grid") ? *section("spatial_grid") : empty, at("spatial_grid"));
  s.temporal = read_temporal_grid(section("temporal_grid") ? *section("temporal_grid") : empty, at("temporal_grid"));
  s.crystal = read_crystal(section("crystal") ? *section("crystal") : empty, at("crystal"));
  s.detector = read_detector(section("detector") ? *section("detector") : empty, at("detector"));
  s.pump = read_beam(section("pump") ? *section("pump") : empty, at("pump"), 1551.0);
  s.signal = read_beam(section("signal") ? *section("signal") : empty, at("signal"), 1559.0);
  if (section("comb")) {
    ObjectReader r(*section("comb"), at("comb"));
    s.comb_layout = CombSpec::flat(r.optional<std::size_t>("n_lines", 37), r.optional<double>("spacing_ghz", 25.0),
                                   s.pump.carrier_nm);
    r.finish();
    if (s.comb_layout.n_lines % 2 == 0 || s.comb_layout.n_lines == 0) {
      throw ValidationError(r.child("n_lines"), "must be odd");
    }
    if (!(s.comb_layout.spacing_ghz > 0.0)) throw ValidationError(r.child("spacing_ghz"), "must be positive");
  }
  if (section("propagation")) s.propagation = read_propagation(*section("propagation"), at("propagation"));
  s.jitter_ps = jitter_ps;
  s.seed = seed;

  // Grid guards are checked here so a bad combination fails before running.
  auto guard = [&](const std::string& path, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ValidationError(path, e.what());
    }
  };
  for (const auto* beam : {&s.pump, &s.signal}) {
    const std::string p = at(beam == &s.pump ? "pump" : "signal");
    guard(p + "/waist_um", [&] { s.spatial.check_waist(beam->waist_um); });
    guard(p + "/width_ps", [&] { s.temporal.check_pulse(beam->width_ps); });
    if (beam->use_comb) guard(at("temporal_grid"), [&] { s.temporal.check_comb_period(s.comb_layout.spacing_ghz); });
  }
  return s;
}

json pick_sections(const json& doc) {
  json out = json::object();
  for (const auto& key : kSetupSections) {
    if (doc.contains(key)) out[key] = doc.at(key);
  }
  return out;
}

void check_override_keys(const json& overrides, const std::string& path) {
  if (!overrides.is_object()) throw ValidationError(path, "expected an object");
  for (const auto& [key, value] : overrides.items()) {
    if (std::find(kSetupSections.begin(), kSetupSections.end(), key) == kSetupSections.end()) {
      throw ValidationError(path + "/" + key, "unknown field");
    }
  }
}

std::vector<ModeLabel> read_catalog(const json& j, const std::string& path, Role role, double width_ps) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "temporal") return temporal_catalog(2, 0, role);
    if (name == "temporal2") return temporal_catalog(1, 0, role);
    if (name == "spatial") return spatial_catalog(2, 0, role);
    if (name == "spatiotemporal") return spatiotemporal_catalog(role);
    if (name == "mub") return mub_catalog(width_ps, role);
    throw ValidationError(path, fmt::format("unknown catalog '{}'", name));
  }
  if (!j.is_array()) throw ValidationError(path, "expected a catalog name or an array of modes");
  if (j.empty()) throw ValidationError(path, "mode catalog is empty");
  std::vector<ModeLabel> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_mode_label(j[i], fmt::format("{}/{}", path, i), role));
  return out;
}

std::vector<double> read_delays(const json& j, const std::string& path) {
  std::vector<double> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(detail::convert<double>(j[i], fmt::format("{}/{}", path, i)));
  } else {
    ObjectReader r(j, path);
    const double start = r.required<double>("start");
    const double stop = r.required<double>("stop");
    const double step = r.required<double>("step");
    r.finish();
    try {
      out = delay_grid(start, stop, step);
    } catch (const ConfigError& e) {
      throw ValidationError(path, e.what());
    }
  }
  if (!std::is_sorted(out.begin(), out.end())) throw ValidationError(path, "delays must be sorted");
  if (std::find(out.begin(), out.end(), 0.0) == out.end()) throw ValidationError(path, "delays must contain 0");
  return out;
}

WeightSchedule read_schedule(const json& j, const std::string& path, WeightSchedule fallback) {
  if (j.is_number()) return {j.get<double>(), j.get<double>(), WeightSchedule::Shape::kConstant};
  ObjectReader r(j, path);
  WeightSchedule s = fallback;
  s.initial = r.optional<double>("initial", s.initial);
  s.final = r.optional<double>("final", s.final);
  const auto shape = r.optional<std::string>("shape", "");
  r.finish();
  if (shape == "constant") s.shape = WeightSchedule::Shape::kConstant;
  else if (shape == "linear") s.shape = WeightSchedule::Shape::kLinear;
  else if (shape == "exponential") s.shape = WeightSchedule::Shape::kExponential;
  else if (!shape.empty()) throw ValidationError(r.child("shape"), "expected constant, linear or exponential");
  return s;
}

PsoConfig read_pso(const json& j, const std::string& path, std::uint64_t seed, int jobs) {
  ObjectReader r(j, path);
  PsoConfig c;
  c.seed = seed;
  c.jobs = jobs;
  c.ensemble_size = r.optional<std::size_t>("ensemble_size", c.ensemble_size);
  c.dims = r.optional<std::size_t>("dims", c.dims);
  c.max_iters = r.optional<int>("max_iters", c.max_iters);
  c.per_dimension = r.optional<bool>("per_dimension", c.per_dimension);
  c.max_velocity = r.optional<double>("max_velocity", c.max_velocity);
  if (r.has("variant")) {
    try {
      c.variant = parse_pso_variant(r.required<std::string>("variant"));
    } catch (const ConfigError& e) {
      throw ValidationError(r.child("variant"), e.what());
    }
  }
  if (r.has("w")) c.w = read_schedule(r.raw("w"), r.child("w"), c.w);
  if (r.has("w_p")) c.w_p = read_schedule(r.raw("w_p"), r.child("w_p"), c.w_p);
  if (r.has("w_g")) c.w_g = read_schedule(r.raw("w_g"), r.child("w_g"), c.w_g);
  r.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(path, e.what());
  }
  return c;
}

struct Context {
  json base_sections;
  double jitter_ps;
  std::uint64_t seed;
  std::vector<double> delays;
  bool stochastic = false;
};

Study read_study(const json& j, const std::string& path, const Context& ctx, std::set<std::string>& names) {
  ObjectReader r(j, path);
  Study study;
  study.name = r.required<std::string>("name");
  if (study.name.empty() || study.name.find('/') != std::string::npos) {
    throw ValidationError(r.child("name"), "must be a nonempty name without '/'");
  }
  if (!names.insert(study.name).second) throw ValidationError(r.child("name"), "duplicate study name");
  const auto type = r.required<std::string>("type");

  json sections = ctx.base_sections;
  std::string setup_path;
  if (r.has("overrides")) {
    check_override_keys(r.raw("overrides"), r.child("overrides"));
    sections.merge_patch(r.raw("overrides"));
    setup_path = r.child("overrides");
  }
  study.setup = read_setup(sections, setup_path, ctx.jitter_ps, ctx.seed);
  const double pump_width = study.setup.pump.width_ps;
  const double signal_width = study.setup.signal.width_ps;

  if (type == "tomography") {
    TomographyStudy t;
    t.pumps = read_catalog(r.raw("pumps"), r.child("pumps"), Role::kPump, pump_width);
    t.signals = read_catalog(r.raw("signals"), r.child("signals"), Role::kSignal, signal_width);
    if (r.has("desired")) {
      t.desired = r.raw("desired").get<std::vector<int>>();
      if (t.desired.size() != t.pumps.size()) throw ValidationError(r.child("desired"), "one index per pump");
      for (int d : t.desired) {
        if (d < -1 || d >= static_cast<int>(t.signals.size())) throw ValidationError(r.child("desired"), "index out of range");
      }
    } else {
      t.desired = default_desired(t.pumps, t.signals);
    }
    t.export_images = r.optional<bool>("export_images", false);
    t.subplots = r.optional<bool>("subplots", false);
    study.body = std::move(t);
  } else if (type == "delay_scan") {
    DelayScanStudy d;
    const json& pairs = r.raw("pairs");
    if (!pairs.is_array() || pairs.empty()) throw ValidationError(r.child("pairs"), "expected a nonempty array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto p = fmt::format("{}/{}", r.child("pairs"), i);
      ObjectReader pr(pairs[i], p);
      auto pump = read_mode_label(pr.raw("pump"), pr.child("pump"), Role::kPump);
      auto signal = read_mode_label(pr.raw("signal"), pr.child("signal"), Role::kSignal);
      pr.finish();
      d.pairs.emplace_back(std::move(pump), std::move(signal));
    }
    d.delays_ps = r.has("delays_ps") ? read_delays(r.raw("delays_ps"), r.child("delays_ps")) : ctx.delays;
    study.body = std::move(d);
  } else if (type == "trend") {
    TrendStudy t;
    try {
      t.axis = parse_trend_axis(r.required<std::string>("axis"));
    } catch (const ConfigError& e) {
      throw ValidationError(r.child("axis"), e.what());
    }
    try {
      t.direction = parse_trend_direction(r.optional<std::string>("direction", "report"));
    } catch (const ConfigError& e) {
      throw ValidationError(r.child("direction"), e.what());
    }
    const json& series = r.raw("series");
    if (!series.is_array() || series.empty()) throw ValidationError(r.child("series"), "expected a nonempty array");
    for (std::size_t i = 0; i < series.size(); ++i) {
      ObjectReader sr(series[i], fmt::format("{}/{}", r.child("series"), i));
      TrendSeriesSpec s;
      s.pump = read_mode_label(sr.raw("pump"), sr.child("pump"), Role::kPump);
      s.name = sr.optional<std::string>("name", s.pump.display_name());
      s.signals = read_catalog(sr.raw("signals"), sr.child("signals"), Role::kSignal, signal_width);
      if (s.signals.size() < 2) throw ValidationError(sr.child("signals"), "needs at least two signals");
      if (sr.has("desired")) {
        s.desired = sr.required<int>("desired");
      } else {
        s.desired = default_desired({s.pump}, s.signals).front();
      }
      if (s.desired < 0 || s.desired >= static_cast<int>(s.signals.size())) {
        throw ValidationError(sr.child("desired"), "no matched signal in the catalog");
      }
      sr.finish();
      t.series.push_back(std::move(s));
    }
    const json& points = r.raw("points");
    if (!points.is_array() || points.size() < 2) throw ValidationError(r.child("points"), "expected at least two points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto p = fmt::format("{}/{}", r.child("points"), i);
      ObjectReader pr(points[i], p);
      TrendPointSpec point;
      point.value = pr.required<double>("value");
      point.label = pr.optional<std::string>("label", fmt::format("{}", point.value));
      json patch = sections;
      switch (t.axis) {
        case TrendAxis::kLength: patch["crystal"]["length_cm"] = point.value; break;
        case TrendAxis::kDeltaK: patch["crystal"]["delta_k_rad_per_cm"] = point.value; break;
        case TrendAxis::kPulseWidth:
          patch["pump"]["width_ps"] = point.value;
          patch["signal"]["width_ps"] = point.value;
          break;
        case TrendAxis::kOptimization: point.optimize = point.value != 0.0; break;
      }
      std::string point_path = p;
      if (pr.has("overrides")) {
        check_override_keys(pr.raw("overrides"), pr.child("overrides"));
        patch.merge_patch(pr.raw("overrides"));
        point_path = pr.child("overrides");
      }
      pr.finish();
      point.setup = read_setup(patch, point_path, ctx.jitter_ps, ctx.seed);
      t.points.push_back(std::move(point));
    }
    t.pso = read_pso(r.has("pso") ? r.raw("pso") : json::object(), r.child("pso"), ctx.seed, 1);
    study.body = std::move(t);
  } else if (type == "pso") {
    PsoStudy p;
    p.pump = read_mode_label(r.raw("pump"), r.child("pump"), Role::kPump);
    p.desired = read_mode_label(r.raw("desired"), r.child("desired"), Role::kSignal);
    p.distractors = read_catalog(r.raw("distractors"), r.child("distractors"), Role::kSignal, signal_width);
    p.config = read_pso(r.has("config") ? r.raw("config") : json::object(), r.child("config"), ctx.seed, 1);
    p.seed_with_fit = r.optional<bool>("seed_with_fit", true);
    study.body = std::move(p);
  } else if (type == "spectral_export") {
    SpectralStudy s;
    s.labels = read_catalog(r.raw("modes"), r.child("modes"), Role::kPump, pump_width);
    study.body = std::move(s);
  } else if (type == "phase_matching") {
    PhaseMatchingStudy s;
    s.lengths_cm = r.raw("lengths_cm").get<std::vector<double>>();
    if (s.lengths_cm.empty()) throw ValidationError(r.child("lengths_cm"), "expected a nonempty array");
    ObjectReader wr(r.raw("wavelengths_nm"), r.child("wavelengths_nm"));
    const double start = wr.required<double>("start");
    const double stop = wr.required<double>("stop");
    const double step = wr.required<double>("step");
    wr.finish();
    if (!(step > 0.0) || start >= stop) throw ValidationError(r.child("wavelengths_nm"), "needs start < stop and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) s.wavelengths_nm.push_back(start + static_cast<double>(i) * step);
    study.body = std::move(s);
  } else {
    throw ValidationError(r.child("type"), fmt::format("unknown study type '{}'", type));
  }
  r.finish();
  return study;
}

}  // namespace

void Scenario::set_seed(std::uint64_t s) {
  seed = s;
  setup.seed = s;
  if (setup.detector.poisson_seed) setup.detector.poisson_seed = s;
  for (auto& study : studies) {
    study.setup.seed = s;
    if (study.setup.detector.poisson_seed) study.setup.detector.poisson_seed = s;
    if (auto* t = std::get_if<TrendStudy>(&study.body)) {
      t->pso.seed = s;
      for (auto& p : t->points) {
        p.setup.seed = s;
        if (p.setup.detector.poisson_seed) p.setup.detector.poisson_seed = s;
      }
    }
    if (auto* p = std::get_if<PsoStudy>(&study.body)) p->config.seed = s;
  }
}

void Scenario::enable_poisson() {
  const std::uint64_t s = seed.value_or(0);
  if (!seed) seed = s;
  setup.detector.poisson_seed = s;
  for (auto& study : studies) {
    study.setup.detector.poisson_seed = s;
    if (auto* t = std::get_if<TrendStudy>(&study.body)) {
      for (auto& p : t->points) p.setup.detector.poisson_seed = s;
    }
  }
}

void Scenario::set_jobs(int jobs) {
  setup.jobs = jobs;
  for (auto& study : studies) {
    study.setup.jobs = jobs;
    if (auto* t = std::get_if<TrendStudy>(&study.body)) {
      for (auto& p : t->points) p.setup.jobs = jobs;
    }
  }
}

namespace {

Scenario parse_document(const json& document) {
  ObjectReader r(document, "");
  Scenario sc;
  sc.document = document;
  sc.name = r.required<std::string>("name");
  if (sc.name.empty()) throw ValidationError(r.child("name"), "must be nonempty");
  sc.description = r.optional<std::string>("description", "");
  if (r.has("seed")) sc.seed = r.required<std::uint64_t>("seed");
  for (const auto& key : kSetupSections) r.has(key);
  const double jitter = r.optional<double>("jitter_ps", 0.0);
  if (!(jitter >= 0.0)) throw ValidationError(r.child("jitter_ps"), "must be non-negative");
  sc.normalize_counts = r.optional<double>("normalize_counts", sc.normalize_counts);
  if (!(sc.normalize_counts >= 0.0)) throw ValidationError(r.child("normalize_counts"), "must be non-negative");
  sc.fatal_failures = r.optional<bool>("fatal_failures", false);
  sc.delays_ps = r.has("delays_ps") ? read_delays(r.raw("delays_ps"), r.child("delays_ps")) : delay_grid(-10.0, 10.0, 0.25);

  Context ctx{pick_sections(document), jitter, sc.seed.value_or(0), sc.delays_ps};
  sc.setup = read_setup(ctx.base_sections, "", jitter, ctx.seed);

  const json& studies = r.raw("studies");
  r.finish();
  if (!studies.is_array() || studies.empty()) throw ValidationError("/studies", "expected a nonempty array");
  std::set<std::string> names;
  bool stochastic = jitter > 0.0 || sc.setup.detector.poisson_seed.has_value();
  for (std::size_t i = 0; i < studies.size(); ++i) {
    sc.studies.push_back(read_study(studies[i], fmt::format("/studies/{}", i), ctx, names));
    const auto& st = sc.studies.back();
    stochastic = stochastic || st.setup.detector.poisson_seed.has_value() || std::holds_alternative<PsoStudy>(st.body);
    if (const auto* t = std::get_if<TrendStudy>(&st.body)) {
      for (const auto& p : t->points) stochastic = stochastic || p.optimize;
    }
  }
  if (stochastic && !sc.seed) throw ValidationError("/seed", "required when jitter, Poisson counting or PSO is used");
  return sc;
}

}  // namespace

Scenario parse_scenario(const json& document) {
  try {
    return parse_document(document);
  } catch (const json::exception& e) {
    // Type mismatches inside arrays read in bulk.
    throw ValidationError("/", e.what());
  }
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("/", fmt::format("malformed JSON: {}", e.what()));
  }
  return parse_scenario(doc);
}

}  // namespace qpms
