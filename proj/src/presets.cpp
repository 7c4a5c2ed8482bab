#include <stdexcept>

#include "qpms/scenario.hpp"

namespace qpms {
namespace {

using json = nlohmann::json;

// Shared apparatus values: 37 lines at 25 GHz, pump 1551 nm, signal 1559 nm,
// 1.2 ps/cm walk-off.
json base(const std::string& name, const std::string& description, double length_cm, double width_ps,
          bool pump_comb) {
  return {{"name", name},
          {"description", description},
          {"seed", 2024},
          {"comb", {{"n_lines", 37}, {"spacing_ghz", 25.0}}},
          {"crystal", {{"length_cm", length_cm}, {"walkoff_ps_per_cm", 1.2}}},
          {"pump", {{"wavelength_nm", 1551.0}, {"width_ps", width_ps}, {"waist_um", 300.0}, {"use_comb", pump_comb}}},
          {"signal", {{"wavelength_nm", 1559.0}, {"width_ps", width_ps}, {"waist_um", 300.0}}},
          {"studies", json::array()}};
}

// 7 ps pulses need a window of at least 56 ps, which is longer than one comb
// period, so these runs use exact Hermite-Gaussian pumps.
json wide_window() { return {{"nt", 1024}, {"window_ps", 80.0}}; }

json wide_overrides(double width_ps) {
  return {{"temporal_grid", wide_window()},
          {"pump", {{"width_ps", width_ps}, {"use_comb", false}}},
          {"signal", {{"width_ps", width_ps}}}};
}

json tomography(const std::string& name, json pumps, json signals) {
  return {{"name", name}, {"type", "tomography"}, {"pumps", std::move(pumps)}, {"signals", std::move(signals)}};
}

json series(const std::string& pump, const std::string& signals) {
  return {{"name", pump}, {"pump", pump}, {"signals", signals}};
}

json table1() {
  json s = base("table1", "Two-mode temporal sorting on 1 cm and 2.5 cm crystals at 2 ps, with and without comb phase optimization",
                2.5, 2.0, true);
  auto t1 = tomography("tomography_1cm", "temporal2", "temporal2");
  t1["overrides"] = {{"crystal", {{"length_cm", 1.0}}}};
  s["studies"].push_back(t1);
  s["studies"].push_back(tomography("tomography_2p5cm", "temporal2", "temporal2"));
  s["studies"].push_back({{"name", "length_trend"},
                          {"type", "trend"},
                          {"axis", "length"},
                          {"direction", "increasing"},
                          {"series", {series("T0", "temporal2"), series("T1", "temporal2")}},
                          {"points", {{{"value", 1.0}, {"label", "1 cm"}}, {{"value", 2.5}, {"label", "2.5 cm"}}}}});
  s["studies"].push_back({{"name", "optimization_trend"},
                          {"type", "trend"},
                          {"axis", "optimization"},
                          {"direction", "non_decreasing"},
                          {"series", {series("T0", "temporal2"), series("T1", "temporal2")}},
                          {"points", {{{"value", 0}, {"label", "unoptimized"}}, {{"value", 1}, {"label", "optimized"}}}},
                          {"pso", {{"max_iters", 40}, {"variant", "verbatim-eq2"}}}});
  return s;
}

json table2() {
  json s = base("table2", "Three-mode temporal tomography on a 2.5 cm crystal with 2 ps and 7 ps pulses", 2.5, 2.0, false);
  s["studies"].push_back(tomography("tomography_2ps", "temporal", "temporal"));
  auto wide = tomography("tomography_7ps", "temporal", "temporal");
  wide["overrides"] = wide_overrides(7.0);
  s["studies"].push_back(wide);
  s["studies"].push_back({{"name", "width_trend"},
                          {"type", "trend"},
                          {"axis", "pulse_width"},
                          {"direction", "decreasing"},
                          {"series", {series("T0", "temporal"), series("T1", "temporal"), series("T2", "temporal")}},
                          {"points",
                           {{{"value", 2.0}, {"label", "2 ps"}},
                            {{"value", 7.0}, {"label", "7 ps"}, {"overrides", {{"temporal_grid", wide_window()}}}}}}});
  return s;
}

json table3() {
  json s = base("table3", "Tomography over the superposed basis {T+, T-, T2} at 2 ps on a 2.5 cm crystal", 2.5, 2.0, false);
  s["studies"].push_back(tomography("tomography_mub", "mub", "mub"));
  s["studies"].push_back({{"name", "mub_delay_scan"},
                          {"type", "delay_scan"},
                          {"pairs", {{{"pump", "T+"}, {"signal", "T+"}}, {{"pump", "T+"}, {"signal", "T-"}}}}});
  return s;
}

json width_sweep(const std::string& name, const std::string& description, bool both_lengths) {
  json s = base(name, description, 1.0, 2.0, false);
  for (double w : {1.0, 2.0, 3.0}) {
    auto t = tomography(std::string("tomography_") + std::to_string(static_cast<int>(w)) + "ps", "temporal2",
                        "temporal2");
    t["overrides"] = {{"pump", {{"width_ps", w}}}, {"signal", {{"width_ps", w}}}};
    s["studies"].push_back(t);
  }
  const json points = {{{"value", 1.0}, {"label", "1 ps"}}, {{"value", 2.0}, {"label", "2 ps"}},
                       {{"value", 3.0}, {"label", "3 ps"}}};
  s["studies"].push_back({{"name", "width_trend_1cm"},
                          {"type", "trend"},
                          {"axis", "pulse_width"},
                          {"direction", "decreasing"},
                          {"series", {series("T0", "temporal2"), series("T1", "temporal2")}},
                          {"points", points}});
  if (both_lengths) {
    s["studies"].push_back({{"name", "width_trend_2p5cm"},
                            {"type", "trend"},
                            {"axis", "pulse_width"},
                            {"direction", "report"},
                            {"overrides", {{"crystal", {{"length_cm", 2.5}}}}},
                            {"series", {series("T0", "temporal2"), series("T1", "temporal2")}},
                            {"points", points}});
  }
  return s;
}

json fig1iii() {
  json s = base("fig1iii", "Delay scans of matched and mismatched temporal pairs at 2 ps on a 2.5 cm crystal", 2.5, 2.0,
                false);
  s["delays_ps"] = {{"start", -8.0}, {"stop", 8.0}, {"step", 0.25}};
  s["studies"].push_back({{"name", "delay_gallery"},
                          {"type", "delay_scan"},
                          {"pairs",
                           {{{"pump", "T0"}, {"signal", "T0"}},
                            {{"pump", "T0"}, {"signal", "T1"}},
                            {{"pump", "T1"}, {"signal", "T1"}},
                            {{"pump", "T1"}, {"signal", "T0"}}}}});
  return s;
}

json fig3() {
  json s = base("fig3", "Full 15 x 15 spatiotemporal tomography at 2 ps, counts normalized to 1e4 on the best matched pair",
                2.5, 2.0, false);
  auto t = tomography("tomography_st", "spatiotemporal", "spatiotemporal");
  t["subplots"] = true;
  s["studies"].push_back(t);
  return s;
}

json fig4() {
  json s = base("fig4", "Full 15 x 15 spatiotemporal tomography at 7 ps on an 80 ps window", 2.5, 7.0, false);
  s["temporal_grid"] = wide_window();
  auto t = tomography("tomography_st", "spatiotemporal", "spatiotemporal");
  t["subplots"] = true;
  s["studies"].push_back(t);
  return s;
}

json appendix_a() {
  json s = base("appendixA", "Comb line spectra and synthesized envelopes of the pump modes T0, T1, T2, T+ and T-", 2.5,
                2.0, true);
  s["studies"].push_back({{"name", "pump_spectra"},
                          {"type", "spectral_export"},
                          {"modes", {"T0", "T1", "T2", "T+", "T-"}}});
  return s;
}

json appendix_b() {
  json s = base("appendixB", "Transverse SF intensity images for every pair of the five OAM modes at 2 ps", 2.5, 2.0,
                false);
  auto t = tomography("spatial_images", "spatial", "spatial");
  t["export_images"] = true;
  s["studies"].push_back(t);
  return s;
}

json edge_of_phasematching() {
  json s = base("edge-of-phasematching",
                "Selectivity versus phase mismatch on a 2.5 cm crystal at 2 ps, plus sinc^2 acceptance curves", 2.5,
                2.0, false);
  s["studies"].push_back({{"name", "delta_k_sweep"},
                          {"type", "trend"},
                          {"axis", "delta_k"},
                          {"direction", "report"},
                          {"series", {series("T0", "temporal2"), series("T1", "temporal2")}},
                          {"points",
                           {{{"value", 0.0}}, {{"value", 1.0}}, {{"value", 2.0}}, {{"value", 4.0}}, {{"value", 8.0}}}}});
  s["studies"].push_back({{"name", "acceptance"},
                          {"type", "phase_matching"},
                          {"lengths_cm", {1.0, 2.5}},
                          {"wavelengths_nm", {{"start", 1549.0}, {"stop", 1569.0}, {"step", 0.02}}}});
  return s;
}

struct Entry {
  const char* name;
  json (*make)();
};

const Entry kPresets[] = {
    {"table1", table1},
    {"table2", table2},
    {"table3", table3},
    {"table4", [] { return width_sweep("table4", "Two-mode temporal selectivity on a 1 cm crystal for 1, 2 and 3 ps pulses", false); }},
    {"appendixC",
     [] {
       return width_sweep("appendixC",
                          "Pulse width sweep over 1, 2 and 3 ps against the fixed walk-off, on 1 cm with the 2.5 cm "
                          "crystal for comparison",
                          true);
     }},
    {"fig1iii", fig1iii},
    {"fig3", fig3},
    {"fig4", fig4},
    {"appendixA", appendix_a},
    {"appendixB", appendix_b},
    {"edge-of-phasematching", edge_of_phasematching},
};

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& e : kPresets) out.push_back({e.name, e.make().at("description").get<std::string>()});
  return out;
}

json preset_document(const std::string& name) {
  for (const auto& e : kPresets) {
    if (name == e.name) return e.make();
  }
  throw std::out_of_range("unknown preset '" + name + "'");
}

}  // namespace qpms
