#include <chrono>
#include <cmath>
#include <ctime>
#include <map>

#include <fmt/chrono.h>
#include <fmt/core.h>

#include "qpms/error.hpp"
#include "qpms/io.hpp"
#include "qpms/scenario.hpp"

namespace qpms {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

std::string file_stem(const ModeLabel& label) {
  std::string out;
  for (char c : label.display_name()) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '_' || c == '.';
    out += keep ? c : '_';
  }
  return out;
}

json db_json(const SelectivityValue& v) {
  if (v.undefined) return nullptr;
  if (v.infinite) return "inf";
  return v.db;
}

/// Files are collected per study and written in order by one thread.
class Collector {
 public:
  explicit Collector(std::filesystem::path root) : root_(std::move(root)) {}

  void add(const std::string& relative, const std::string& content) {
    write_file(root_ / relative, content);
    files_.push_back({relative, sha256_hex(content), content.size()});
  }
  void add(const std::string& relative, const json& content) { add(relative, content.dump(2) + "\n"); }

  std::vector<ManifestFile> take() { return std::move(files_); }

 private:
  std::filesystem::path root_;
  std::vector<ManifestFile> files_;
};

struct RunState {
  Collector& out;
  std::size_t failed_cells = 0;
  json trends = json::array();
};

void run_tomography(const Scenario& sc, const Study& study, const TomographyStudy& t, RunState& state) {
  TomographyOptions options{t.desired, sc.normalize_counts};
  const auto matrix = tomography(t.pumps, t.signals, study.setup, options, sc.delays_ps);
  state.failed_cells += matrix.flagged.size();
  const auto report = selectivity_report(matrix, t.desired);
  const std::string dir = study.name + "/";
  state.out.add(dir + "counts.csv", counts_csv(matrix));
  state.out.add(dir + "counts.json", counts_json(matrix));
  state.out.add(dir + "selectivity.json", selectivity_json(report, matrix));
  state.out.add(dir + "selectivity.txt", selectivity_table(report, matrix));

  if (t.subplots) {
    // Blocks of spatial cells keyed by (pump order, signal order).
    std::map<std::pair<int, int>, std::string> blocks;
    json spec = {{"type", "bar"}, {"x", "signal_l"}, {"y", "counts"}, {"group", "pump_l"}, {"panels", json::array()}};
    for (std::size_t i = 0; i < t.pumps.size(); ++i) {
      const auto pl = t.pumps[i].common_l();
      const auto pm = t.pumps[i].common_m();
      if (!pl || !pm || t.pumps[i].terms.size() != 1) continue;
      for (std::size_t j = 0; j < t.signals.size(); ++j) {
        const auto sl = t.signals[j].common_l();
        const auto sm = t.signals[j].common_m();
        if (!sl || !sm || t.signals[j].terms.size() != 1) continue;
        auto& csv = blocks[{*pm, *sm}];
        if (csv.empty()) csv = "pump_l,signal_l,counts\n";
        csv += fmt::format("{},{},{}\n", *pl, *sl, matrix.counts[i][j]);
      }
    }
    for (const auto& [key, csv] : blocks) {
      const auto name = fmt::format("subplots/pumpT{}_signalT{}.csv", key.first, key.second);
      state.out.add(dir + name, csv);
      spec["panels"].push_back({{"file", name},
                                {"title", fmt::format("pump T{} / signal T{}", key.first, key.second)}});
    }
    state.out.add(dir + "subplots/plot_spec.json", spec);
  }

  if (t.export_images) {
    const auto& sg = study.setup.spatial;
    for (std::size_t i = 0; i < t.pumps.size(); ++i) {
      for (std::size_t j = 0; j < t.signals.size(); ++j) {
        std::vector<double> image;
        try {
          const auto pump = assemble_field(t.pumps[i], study.setup.request(Role::kPump));
          const auto signal = assemble_field(t.signals[j], study.setup.request(Role::kSignal));
          image = propagate_sfg(pump, signal, study.setup.crystal, study.setup.propagation).sf_field.spatial_intensity();
        } catch (const std::exception&) {
          continue;  // already flagged by the tomography pass
        }
        double peak = 0.0;
        for (double v : image) peak = std::max(peak, v);
        const auto stem = fmt::format("images/{}__{}", file_stem(t.pumps[i]), file_stem(t.signals[j]));
        state.out.add(dir + stem + ".pgm", pgm_image(image, sg.nx, sg.ny, peak));
        if (t.desired[i] == static_cast<int>(j)) state.out.add(dir + stem + ".csv", matrix_csv(image, sg.nx, sg.ny));
      }
    }
  }
}

void run_delay_scan(const Study& study, const DelayScanStudy& d, RunState& state) {
  json summary = json::array();
  json spec = {{"type", "line"}, {"x", "delay_ps"}, {"y", "counts"}, {"series", json::array()}};
  for (std::size_t k = 0; k < d.pairs.size(); ++k) {
    const auto& [pump, signal] = d.pairs[k];
    const auto trace = delay_scan(pump, signal, d.delays_ps, study.setup, k);
    for (const auto& e : trace.errors) state.failed_cells += e.empty() ? 0 : 1;
    const auto name = fmt::format("{}__{}.csv", file_stem(pump), file_stem(signal));
    state.out.add(study.name + "/" + name, delay_trace_csv(trace));
    double peak_counts = 0.0;
    for (double c : trace.counts) {
      if (std::isfinite(c)) peak_counts = std::max(peak_counts, c);
    }
    summary.push_back({{"pump", pump.display_name()},
                       {"signal", signal.display_name()},
                       {"zero_delay_counts", trace.zero_delay_counts},
                       {"peak_counts", peak_counts},
                       {"file", name}});
    spec["series"].push_back({{"file", name}, {"label", pump.display_name() + " / " + signal.display_name()}});
  }
  state.out.add(study.name + "/summary.json", summary);
  state.out.add(study.name + "/plot_spec.json", spec);
}

SelectivityValue optimized_point(const TrendSeriesSpec& s, const TrendPointSpec& p, const PsoConfig& pso) {
  std::vector<ModeLabel> distractors;
  for (std::size_t j = 0; j < s.signals.size(); ++j) {
    if (static_cast<int>(j) != s.desired) distractors.push_back(s.signals[j]);
  }
  const auto objective = make_selectivity_objective(p.setup, s.pump, s.signals[static_cast<std::size_t>(s.desired)],
                                                    distractors);
  SelectivityValue v;
  if (!p.optimize) {
    v.db = objective.objective(objective.fitted_phases);
  } else {
    PsoConfig config = pso;
    config.dims = objective.fitted_phases.size();
    config.initial_positions = {objective.fitted_phases};
    config.jobs = p.setup.jobs;
    v.db = pso_optimize(objective.objective, config).best_objective;
  }
  v.infinite = std::isinf(v.db) && v.db > 0.0;
  v.undefined = std::isnan(v.db);
  return v;
}

void run_trend(const Study& study, const TrendStudy& t, RunState& state) {
  std::vector<TrendSeries> series;
  for (const auto& s : t.series) {
    TrendSeries out{s.name, t.axis, t.direction, {}, false};
    for (const auto& p : t.points) {
      SelectivityValue v;
      if (t.axis == TrendAxis::kOptimization) {
        v = optimized_point(s, p, t.pso);
      } else {
        const std::vector<int> desired = {s.desired};
        const auto m = tomography({s.pump}, s.signals, p.setup, {desired, 0.0});
        state.failed_cells += m.flagged.size();
        v = selectivity_report(m, desired).rows.front().value;
      }
      out.points.push_back({p.value, p.label, v});
    }
    series.push_back(std::move(out));
  }
  const auto report = trend_report(std::move(series));
  state.out.add(study.name + "/trend.json", trend_json(report));
  std::string csv = "series,label,axis_value,selectivity_db\n";
  for (const auto& s : report.series) {
    for (const auto& p : s.points) {
      const auto db = db_json(p.value);
      csv += fmt::format("{},{},{},{}\n", s.name, p.label, p.axis_value,
                         db.is_null() ? "nan" : (db.is_string() ? "inf" : fmt::format("{}", p.value.db)));
    }
    json values = json::array();
    for (const auto& p : s.points) values.push_back(db_json(p.value));
    state.trends.push_back({{"study", study.name},
                            {"series", s.name},
                            {"axis", to_string(s.axis)},
                            {"direction", to_string(s.direction)},
                            {"values", values},
                            {"pass", s.pass}});
  }
  state.out.add(study.name + "/trend.csv", csv);
}

void run_pso(const Study& study, const PsoStudy& p, RunState& state) {
  const auto objective = make_selectivity_objective(study.setup, p.pump, p.desired, p.distractors);
  PsoConfig config = p.config;
  config.dims = objective.fitted_phases.size();
  config.jobs = study.setup.jobs;
  if (p.seed_with_fit) config.initial_positions = {objective.fitted_phases};
  const auto trace = pso_optimize(objective.objective, config);
  const double start = objective.objective(objective.fitted_phases);

  std::string csv = "iteration,best_objective,spread\n";
  for (const auto& it : trace.iterations) csv += fmt::format("{},{},{}\n", it.iteration, it.best_objective, it.spread);
  const std::string dir = study.name + "/";
  state.out.add(dir + "trace.csv", csv);
  json iterations = json::array();
  for (const auto& it : trace.iterations) {
    iterations.push_back({{"iteration", it.iteration}, {"best_objective", it.best_objective}, {"spread", it.spread},
                          {"inertia", it.inertia}});
  }
  state.out.add(dir + "trace.json", json{{"variant", to_string(config.variant)},
                                         {"seed", config.seed},
                                         {"evaluations", trace.evaluations},
                                         {"unoptimized_db", start},
                                         {"best_db", trace.best_objective},
                                         {"best_phases", trace.best_phases},
                                         {"events", trace.events},
                                         {"iterations", iterations}});
  const CombSpec best = objective.comb(trace.best_phases);
  json comb;
  to_json(comb, best);
  state.out.add(dir + "best_comb.json", comb);
  state.out.add(dir + "best_spectrum.csv", spectral_csv(best));
}

void run_spectral(const Study& study, const SpectralStudy& s, RunState& state) {
  json fits = json::array();
  const auto& tg = study.setup.temporal;
  for (const auto& label : s.labels) {
    FieldRequest request = study.setup.request(Role::kPump);
    request.beam.use_comb = false;
    const auto field = assemble_field(label, request);
    const auto& target = field.separable_cache()->temporal;
    const auto fit = fit_comb_to_mode(target, request.comb_layout, tg, request.beam.phase_only);
    const auto synth = comb_synthesize(fit.spec, tg);
    const auto stem = file_stem(label);
    state.out.add(study.name + "/" + stem + "_spectrum.csv", spectral_csv(fit.spec));
    std::string env = "t_ps,target_intensity,comb_intensity,comb_phase\n";
    for (std::size_t i = 0; i < tg.nt; ++i) {
      env += fmt::format("{},{},{},{}\n", tg.t(i), std::norm(target[i]), std::norm(synth[i]), std::arg(synth[i]));
    }
    state.out.add(study.name + "/" + stem + "_envelope.csv", env);
    json comb;
    to_json(comb, fit.spec);
    fits.push_back({{"mode", label.display_name()}, {"fidelity", fit.fidelity}, {"comb", comb}});
  }
  state.out.add(study.name + "/fits.json", fits);
}

void run_phase_matching(const Study& study, const PhaseMatchingStudy& s, RunState& state) {
  json summary = json::array();
  for (double length : s.lengths_cm) {
    CrystalSpec crystal = study.setup.crystal;
    crystal.length_cm = length;
    const auto curve = phase_matching_curve(crystal, s.wavelengths_nm, study.setup.signal.carrier_nm);
    std::string csv = "wavelength_nm,efficiency\n";
    for (std::size_t i = 0; i < curve.wavelength_nm.size(); ++i) {
      csv += fmt::format("{},{}\n", curve.wavelength_nm[i], curve.efficiency[i]);
    }
    const auto name = fmt::format("curve_{}cm.csv", length);
    state.out.add(study.name + "/" + name, csv);
    summary.push_back({{"length_cm", length}, {"center_nm", curve.center_nm}, {"fwhm_nm", curve.fwhm_nm},
                       {"file", name}});
  }
  state.out.add(study.name + "/summary.json", summary);
}

}  // namespace

json RunManifest::to_json() const {
  json list = json::array();
  for (const auto& f : files) list.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"scenario", scenario},       {"scenario_sha256", scenario_sha256}, {"tool_version", tool_version},
          {"started_at", started_at},   {"finished_at", finished_at},         {"files", list},
          {"failed_cells", failed_cells}, {"fatal", fatal},                   {"trends", trends}};
}

RunManifest run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  RunManifest manifest;
  manifest.scenario = sc.name;
  manifest.scenario_sha256 = sha256_hex(sc.document.dump());
  manifest.started_at = utc_now();

  Collector collector(out_dir);
  RunState state{collector};
  collector.add("scenario.json", sc.document);
  for (const auto& study : sc.studies) {
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, TomographyStudy>) run_tomography(sc, study, body, state);
          else if constexpr (std::is_same_v<T, DelayScanStudy>) run_delay_scan(study, body, state);
          else if constexpr (std::is_same_v<T, TrendStudy>) run_trend(study, body, state);
          else if constexpr (std::is_same_v<T, PsoStudy>) run_pso(study, body, state);
          else if constexpr (std::is_same_v<T, SpectralStudy>) run_spectral(study, body, state);
          else run_phase_matching(study, body, state);
        },
        study.body);
  }
  manifest.files = collector.take();
  manifest.failed_cells = state.failed_cells;
  manifest.fatal = sc.fatal_failures && state.failed_cells > 0;
  manifest.trends = std::move(state.trends);
  manifest.finished_at = utc_now();
  write_file(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace qpms
