// Exercises the shared library through its C header only.
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "qpms/qpms.h"

TEST_CASE("presets are enumerable") {
  REQUIRE(qpms_preset_count() >= 11);
  bool found = false;
  for (size_t i = 0; i < qpms_preset_count(); ++i) found = found || std::strcmp(qpms_preset_name(i), "fig3") == 0;
  CHECK(found);
  CHECK(qpms_preset_name(1000) == nullptr);
  CHECK(std::strlen(qpms_version()) > 0);
}

TEST_CASE("errors carry status codes and messages") {
  qpms_scenario* s = nullptr;
  CHECK(qpms_scenario_from_json("{not json", &s) == QPMS_ERROR_VALIDATION);
  CHECK(std::strlen(qpms_last_error()) > 0);
  CHECK(qpms_scenario_from_json(R"({"name": "x", "studies": []})", &s) == QPMS_ERROR_VALIDATION);
  CHECK(std::string(qpms_last_error()).find("/studies") != std::string::npos);
  CHECK(qpms_scenario_from_preset("missing", &s) == QPMS_ERROR_NOT_FOUND);
  CHECK(qpms_scenario_from_file("/nonexistent/file.json", &s) == QPMS_ERROR_IO);
  CHECK(qpms_scenario_from_json(nullptr, &s) == QPMS_ERROR_ARGUMENT);
  CHECK(s == nullptr);
}

TEST_CASE("selectivity through the C interface") {
  const double counts[] = {90.0, 10.0};
  double db = 0.0;
  REQUIRE(qpms_selectivity(counts, 2, 0, &db) == QPMS_OK);
  CHECK(db == doctest::Approx(10.0 * std::log10(9.0)));
  CHECK(qpms_selectivity(counts, 1, 0, &db) == QPMS_ERROR_ARGUMENT);
}

TEST_CASE("run a scenario end to end") {
  const char* doc = R"({
    "name": "capi",
    "spatial_grid": {"nx": 16, "ny": 16, "extent_x_um": 300, "extent_y_um": 300},
    "temporal_grid": {"nt": 64, "window_ps": 20},
    "pump": {"waist_um": 100},
    "signal": {"waist_um": 100},
    "studies": [{"name": "tomo", "type": "tomography", "pumps": "temporal2", "signals": "temporal2"}]
  })";
  qpms_scenario* s = nullptr;
  REQUIRE(qpms_scenario_from_json(doc, &s) == QPMS_OK);
  char* name = nullptr;
  REQUIRE(qpms_scenario_name(s, &name) == QPMS_OK);
  CHECK(std::string(name) == "capi");
  qpms_string_free(name);
  CHECK(qpms_scenario_set_seed(s, 3) == QPMS_OK);

  const auto dir = std::filesystem::temp_directory_path() / "qpms_capi_run";
  std::filesystem::remove_all(dir);
  qpms_manifest* m = nullptr;
  REQUIRE(qpms_run(s, dir.c_str(), 1, &m) == QPMS_OK);
  char* text = nullptr;
  REQUIRE(qpms_manifest_to_json(m, &text) == QPMS_OK);
  CHECK(std::string(text).find("tomo/counts.csv") != std::string::npos);
  qpms_string_free(text);
  CHECK(qpms_manifest_failed_cells(m) == 0);
  CHECK(qpms_manifest_fatal(m) == 0);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  qpms_manifest_free(m);
  qpms_scenario_free(s);
  CHECK(qpms_run(nullptr, "x", 1, &m) == QPMS_ERROR_ARGUMENT);
}
