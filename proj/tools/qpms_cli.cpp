// Command-line front end. Talks to the simulator only through the C API.
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpms/qpms.h"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitFatal = 3;

int exit_code(qpms_status status) {
  return status == QPMS_ERROR_VALIDATION || status == QPMS_ERROR_NOT_FOUND ? kExitValidation : kExitFatal;
}

int report(qpms_status status) {
  std::fprintf(stderr, "error: %s\n", qpms_last_error());
  return exit_code(status);
}

bool looks_like_file(const std::string& target) {
  return target.find('/') != std::string::npos || target.ends_with(".json") || std::filesystem::exists(target);
}

int run(const std::string& target, const std::string& out_dir, int jobs, std::optional<std::uint64_t> seed,
        bool poisson) {
  qpms_scenario* scenario = nullptr;
  qpms_status status = looks_like_file(target) ? qpms_scenario_from_file(target.c_str(), &scenario)
                                               : qpms_scenario_from_preset(target.c_str(), &scenario);
  if (status != QPMS_OK) return report(status);
  if (seed) qpms_scenario_set_seed(scenario, *seed);
  if (poisson) qpms_scenario_enable_poisson(scenario);

  std::string dir = out_dir;
  if (dir.empty()) {
    char* name = nullptr;
    qpms_scenario_name(scenario, &name);
    dir = std::string("runs/") + name;
    qpms_string_free(name);
  }
  qpms_manifest* manifest = nullptr;
  status = qpms_run(scenario, dir.c_str(), jobs, &manifest);
  qpms_scenario_free(scenario);
  if (status != QPMS_OK) return report(status);

  const size_t failed = qpms_manifest_failed_cells(manifest);
  const bool fatal = qpms_manifest_fatal(manifest) != 0;
  qpms_manifest_free(manifest);
  std::printf("wrote %s/manifest.json\n", dir.c_str());
  if (failed > 0) std::fprintf(stderr, "%zu cell(s) failed; see the flagged entries in the outputs\n", failed);
  return fatal ? kExitFatal : 0;
}

int list() {
  for (size_t i = 0; i < qpms_preset_count(); ++i) {
    std::printf("%-24s %s\n", qpms_preset_name(i), qpms_preset_description(i));
  }
  return 0;
}

int validate(const std::string& path) {
  qpms_scenario* scenario = nullptr;
  const qpms_status status = qpms_scenario_from_file(path.c_str(), &scenario);
  if (status != QPMS_OK) return report(status);
  qpms_scenario_free(scenario);
  std::printf("%s: ok\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal mode sorter simulator"};
  app.set_version_flag("--version", std::string(qpms_version()));
  app.require_subcommand(1);

  std::string target;
  std::string out_dir;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  bool poisson = false;
  auto* run_cmd = app.add_subcommand("run", "Run a preset or a scenario file");
  run_cmd->add_option("target", target, "Preset name or path to a scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (default runs/<name>)");
  run_cmd->add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_flag("--poisson", poisson, "Draw Poisson counts instead of expected values");

  app.add_subcommand("list", "List the built-in presets");

  std::string path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file against the schema");
  validate_cmd->add_option("file", path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (run_cmd->parsed()) return run(target, out_dir, jobs, seed, poisson);
  if (validate_cmd->parsed()) return validate(path);
  return list();
}
