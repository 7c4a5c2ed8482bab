// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if
// any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "oracles.hpp"
#include "qpms/engine.hpp"
#include "qpms/metrics.hpp"
#include "qpms/modes.hpp"
#include "qpms/optimizer.hpp"
#include "qpms/scenario.hpp"

using namespace qpms;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const Study& study(const Scenario& s, const std::string& name) {
  for (const auto& st : s.studies) {
    if (st.name == name) return st;
  }
  throw std::runtime_error("preset has no study " + name);
}

Scenario preset(const std::string& name) { return parse_scenario(preset_document(name)); }

double db(double a, double b) { return 10.0 * (std::log10(a) - std::log10(b)); }

// Selectivity of every series of a trend study at every point.
std::vector<std::vector<double>> trend_values(const Study& st) {
  const auto& t = std::get<TrendStudy>(st.body);
  std::vector<std::vector<double>> out;
  for (const auto& series : t.series) {
    std::vector<double> row;
    for (const auto& p : t.points) {
      const auto m = tomography({series.pump}, series.signals, p.setup);
      row.push_back(selectivity(m.counts[0], static_cast<std::size_t>(series.desired)).db);
    }
    out.push_back(row);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.2f}", i ? " > " : "", v[i]);
  return s;
}

Outcome basis_integrity() {
  const SpatialGrid sg;
  const TemporalGrid tg;
  const FieldRequest req{sg, tg, BeamSettings{}, CombSpec::flat(), 0.0};
  std::vector<SpatioTemporalField> fields;
  for (const auto& label : spatiotemporal_catalog()) fields.push_back(assemble_field(label, req));
  double gram = 0.0;
  for (std::size_t a = 0; a < fields.size(); ++a) {
    for (std::size_t b = 0; b < fields.size(); ++b) {
      const auto& fa = *fields[a].separable_cache();
      const auto& fb = *fields[b].separable_cache();
      const cplx g = inner(fa.spatial, fb.spatial, sg.cell_area()) * inner(fa.temporal, fb.temporal, tg.dt());
      gram = std::max(gram, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  double mub = 0.0;
  for (const char* tag : {"T+", "T-"}) {
    const auto f = assemble_field(parse_mode_tag(tag), req);
    for (int m : {0, 1}) {
      const auto t = hg_temporal_mode(m, 2.0, tg);
      mub = std::max(mub, std::abs(std::norm(inner(t, f.separable_cache()->temporal, tg.dt())) - 0.5));
    }
  }
  return {fields.size() == 15 && gram < 1e-6 && mub < 1e-9,
          fmt::format("max |G - I| = {:.2e}, max ||<T+-|T01>|^2 - 1/2| = {:.2e}", gram, mub)};
}

Outcome propagation_oracle() {
  const SpatialGrid sg{32, 32, 300.0, 300.0};
  const TemporalGrid tg{64, 16.0};
  FieldRequest req{sg, tg, BeamSettings{100.0, 2.0, 1551.0}, CombSpec::flat(), 0.0};
  const auto pump = assemble_field(ModeLabel::basis(1, 0, Role::kPump), req);
  req.beam.carrier_nm = 1559.0;
  const auto signal = assemble_field(ModeLabel::basis(-1, 1), req);
  CrystalSpec c;
  c.diffraction = true;
  c.delta_k_rad_per_cm = 0.5;
  const auto split = propagate_sfg(pump, signal, c);

  oracle::Rk4Sfg rk{32, 32, 64, 600.0, 600.0, 16.0, c.kappa, c.walkoff_ps_per_cm, c.delta_k_rad_per_cm,
                    2 * oracle::pi / 1.551, 2 * oracle::pi / 1.559,
                    2 * oracle::pi / (sf_wavelength_nm(1551, 1559) * 1e-3)};
  rk.init();
  const auto p = pump.to_dense();
  const auto s = signal.to_dense();
  oracle::Rk4Sfg::State u{Eigen::Map<const Eigen::VectorXcd>(p.data(), p.size()),
                          Eigen::Map<const Eigen::VectorXcd>(s.data(), s.size()), Eigen::VectorXcd::Zero(p.size())};
  const auto out = rk.run(u, c.length_cm, 400);
  const auto a = split.sf_field.to_dense();
  const double err = oracle::relative_l2(std::vector<oracle::cplx>(a.begin(), a.end()),
                                         std::vector<oracle::cplx>(out.sf.data(), out.sf.data() + out.sf.size()));

  auto halved = c;
  halved.nz_steps = split.steps * 2;
  const auto fine = propagate_sfg(pump, signal, halved);
  const double change = std::abs(fine.sf_energy - split.sf_energy) / fine.sf_energy;
  return {split.converged && err <= 1e-3 && change <= 1e-3,
          fmt::format("rel L2 vs RK4 = {:.2e}, step-halving energy change = {:.2e}", err, change)};
}

Outcome temporal_sorting() {
  const auto s = preset("table2");
  const auto& st = study(s, "tomography_2ps");
  const auto& t = std::get<TomographyStudy>(st.body);
  const auto m = tomography(t.pumps, t.signals, st.setup);
  bool argmax = true;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    for (std::size_t j = 0; j < m.counts[i].size(); ++j) argmax = argmax && (j == i || m.counts[i][j] < m.counts[i][i]);
  }
  const double contrast = db(m.counts[0][0], m.counts[0][1]);
  return {argmax && m.flagged.empty() && contrast >= 10.0,
          fmt::format("row argmax at matched mode: {}, T0p T0s/T1s contrast = {:.2f} dB (need >= 10)",
                      argmax ? "yes" : "no", contrast)};
}

Outcome length_trend() {
  const auto v = trend_values(study(preset("table1"), "length_trend"));
  const bool pass = v[0][1] > v[0][0] && v[1][1] > v[1][0];
  return {pass, fmt::format("S(T0) 1 cm {:.2f} -> 2.5 cm {:.2f}, S(T1) {:.2f} -> {:.2f} dB", v[0][0], v[0][1], v[1][0],
                            v[1][1])};
}

Outcome width_trends() {
  const auto wide = trend_values(study(preset("table2"), "width_trend"));
  const auto sweep = trend_values(study(preset("table4"), "width_trend_1cm"));
  bool pass = true;
  std::string detail = "2.5 cm 2 ps vs 7 ps:";
  for (const auto& row : wide) {
    pass = pass && row[0] > row[1];
    detail += fmt::format(" {:.2f}/{:.2f}", row[0], row[1]);
  }
  detail += "; 1 cm over 1/2/3 ps:";
  for (const auto& row : sweep) {
    pass = pass && row[0] > row[1] && row[1] > row[2];
    detail += " " + join(row);
  }
  return {pass, detail + " dB"};
}

Outcome spatial_sorting() {
  SimulationSetup setup;
  const auto pumps = spatial_catalog(2, 0, Role::kPump);
  const auto signals = spatial_catalog(2, 0);
  const auto m = tomography(pumps, signals, setup);
  const std::size_t n = pumps.size();
  bool argmax = true;
  double diag_peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag_peak = std::max(diag_peak, m.coupled_energy[i][n - 1 - i]);
  double leak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t want = n - 1 - i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == want) continue;
      argmax = argmax && m.counts[i][j] < m.counts[i][want];
      const int net = pumps[i].terms[0].l + signals[j].terms[0].l;
      if (net != 0) leak = std::max(leak, m.coupled_energy[i][j] / diag_peak);
    }
  }
  // Rows ordered X-2 .. X2; the diagonal cell of row i is column n-1-i.
  auto diag = [&](std::size_t i) { return m.coupled_energy[i][n - 1 - i]; };
  const bool falloff = diag(0) < diag(1) && diag(4) < diag(3);
  return {argmax && leak < 1e-6 && falloff && m.flagged.empty(),
          fmt::format("argmax at X-i: {}, worst net-OAM leakage = {:.2e}, coupled diagonal X-2..X2 = {:.3e} {:.3e} {:.3e} {:.3e} {:.3e}",
                      argmax ? "yes" : "no", leak, diag(0), diag(1), diag(2), diag(3), diag(4))};
}

Outcome pso_efficacy() {
  const std::vector<double> target = {0.3, 6.1, 3.0, 1.2, 4.4, 5.5, 2.2, 0.05};
  auto bench = [&](std::span<const double> x) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(wrap_difference(x[i], target[i]), 2);
    return -s;
  };
  auto monotone = [](const PsoTrace& t) {
    for (std::size_t i = 1; i < t.iterations.size(); ++i) {
      if (t.iterations[i].best_objective < t.iterations[i - 1].best_objective) return false;
    }
    return true;
  };
  int converged = 0;
  bool mono = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PsoConfig c;
    c.dims = 8;
    c.max_iters = 200;
    c.seed = seed;
    c.variant = PsoVariant::kStandardDelta;
    const auto t = pso_optimize(bench, c);
    bool close = true;
    for (std::size_t i = 0; i < 8; ++i) close = close && std::abs(wrap_difference(t.best_phases[i], target[i])) < 0.1;
    converged += close;
    mono = mono && monotone(t);
  }

  const auto s = preset("table1");
  const auto& st = study(s, "optimization_trend");
  const auto& trend = std::get<TrendStudy>(st.body);
  const TrendSeriesSpec* t1 = nullptr;
  for (const auto& series : trend.series) {
    if (series.name == "T1") t1 = &series;
  }
  if (!t1) throw std::runtime_error("optimization_trend has no T1 series");
  std::vector<ModeLabel> distractors;
  for (std::size_t j = 0; j < t1->signals.size(); ++j) {
    if (static_cast<int>(j) != t1->desired) distractors.push_back(t1->signals[j]);
  }
  const auto obj = make_selectivity_objective(trend.points.front().setup, t1->pump, t1->signals[t1->desired], distractors);
  const double before = obj.objective(obj.fitted_phases);
  auto config = trend.pso;
  config.dims = static_cast<int>(obj.fitted_phases.size());
  config.initial_positions = {obj.fitted_phases};
  const auto run = pso_optimize(obj.objective, config);
  mono = mono && monotone(run);
  const bool pass = converged >= 19 && run.best_objective >= before && mono;
  return {pass, fmt::format("benchmark {}/20 seeds converged, T1 S {:.2f} -> {:.2f} dB ({}), monotone traces: {}",
                            converged, before, run.best_objective, to_string(config.variant), mono ? "yes" : "no")};
}

Outcome mub_selection() {
  const auto s = preset("table3");
  const auto& st = study(s, "tomography_mub");
  const auto& t = std::get<TomographyStudy>(st.body);
  const auto m = tomography(t.pumps, t.signals, st.setup);
  bool positive = true;
  std::string diag;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    const double v = selectivity(m.counts[i], i).db;
    positive = positive && v > 0.0;
    diag += fmt::format(" {:.2f}", v);
  }
  // Rows and columns are {T+, T-, T2}.
  const double contrast = db(m.counts[0][0], m.counts[0][1]);
  return {positive && contrast >= 12.0 && m.flagged.empty(),
          "diagonal S =" + diag + fmt::format(" dB, T+ vs T- contrast = {:.2f} dB", contrast)};
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "qpms_acceptance";
  std::filesystem::remove_all(root);
  bool pass = true;
  std::size_t files = 0;
  for (const char* name : {"table3", "appendixB", "edge-of-phasematching"}) {
    const auto s = preset(name);
    const auto a = run_scenario(s, root / name / "a");
    const auto b = run_scenario(s, root / name / "b");
    pass = pass && !a.files.empty() && a.files.size() == b.files.size();
    for (std::size_t i = 0; pass && i < a.files.size(); ++i) {
      pass = a.files[i].path == b.files[i].path && a.files[i].sha256 == b.files[i].sha256;
    }
    files += a.files.size();
  }
  std::filesystem::remove_all(root);
  return {pass, fmt::format("{} output digests compared across 3 presets", files)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"basis integrity", basis_integrity},
      {"propagation oracle", propagation_oracle},
      {"temporal sorting", temporal_sorting},
      {"crystal-length trend", length_trend},
      {"pulse-width trends", width_trends},
      {"spatial sorting", spatial_sorting},
      {"PSO efficacy", pso_efficacy},
      {"MUB selection", mub_selection},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
