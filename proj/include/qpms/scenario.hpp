#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qpms/engine.hpp"
#include "qpms/metrics.hpp"
#include "qpms/optimizer.hpp"

namespace qpms {

inline constexpr const char* kToolVersion = "0.1.0";

struct TomographyStudy {
  std::vector<ModeLabel> pumps;
  std::vector<ModeLabel> signals;
  /// Matched column per pump row; defaults to the OAM-conjugate signal.
  std::vector<int> desired;
  bool export_images = false;
  /// Split the matrix into (pump order, signal order) blocks of spatial cells.
  bool subplots = false;
};

struct DelayScanStudy {
  std::vector<std::pair<ModeLabel, ModeLabel>> pairs;
  std::vector<double> delays_ps;
};

struct TrendPointSpec {
  double value = 0.0;
  std::string label;
  SimulationSetup setup;
  bool optimize = false;
};

struct TrendSeriesSpec {
  std::string name;
  ModeLabel pump;
  std::vector<ModeLabel> signals;
  int desired = 0;
};

struct TrendStudy {
  TrendAxis axis = TrendAxis::kLength;
  TrendDirection direction = TrendDirection::kReport;
  std::vector<TrendSeriesSpec> series;
  std::vector<TrendPointSpec> points;
  PsoConfig pso;
};

struct PsoStudy {
  ModeLabel pump;
  ModeLabel desired;
  std::vector<ModeLabel> distractors;
  PsoConfig config;
  /// Put the fitted (unoptimized) phases in the starting ensemble.
  bool seed_with_fit = true;
};

struct SpectralStudy {
  std::vector<ModeLabel> labels;
};

struct PhaseMatchingStudy {
  std::vector<double> lengths_cm;
  std::vector<double> wavelengths_nm;
};

using StudyBody =
    std::variant<TomographyStudy, DelayScanStudy, TrendStudy, PsoStudy, SpectralStudy, PhaseMatchingStudy>;

struct Study {
  std::string name;
  SimulationSetup setup;
  StudyBody body;
};

struct Scenario {
  std::string name;
  std::string description;
  std::optional<std::uint64_t> seed;
  SimulationSetup setup;
  std::vector<double> delays_ps;
  double normalize_counts = 1e4;
  bool fatal_failures = false;
  std::vector<Study> studies;
  /// The document as read, used for hashing and echoing back.
  nlohmann::json document;

  /// Replaces the seed everywhere it is consumed.
  void set_seed(std::uint64_t seed);
  /// Switches the detector to Poisson counting under the scenario seed.
  void enable_poisson();
  /// Worker count for independent cells and objective evaluations.
  void set_jobs(int jobs);
};

/// Parses and validates a scenario document. Throws ValidationError with the
/// JSON pointer of the first offending field.
Scenario parse_scenario(const nlohmann::json& document);
Scenario load_scenario_file(const std::filesystem::path& path);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
/// Scenario document of a named preset; throws std::out_of_range if unknown.
nlohmann::json preset_document(const std::string& name);

struct ManifestFile {
  std::string path;  ///< relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string scenario;
  std::string scenario_sha256;
  std::string tool_version = kToolVersion;
  std::string started_at;
  std::string finished_at;
  std::vector<ManifestFile> files;
  std::size_t failed_cells = 0;
  /// True when cells failed and the scenario declares failures fatal.
  bool fatal = false;
  nlohmann::json trends = nlohmann::json::array();

  nlohmann::json to_json() const;
};

/// Runs every study, writes outputs under `out_dir` and a manifest.json.
RunManifest run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

}  // namespace qpms
