#include "qpms/qpms.h"

#include <cstring>
#include <string>
#include <thread>

#include "qpms/error.hpp"
#include "qpms/metrics.hpp"
#include "qpms/scenario.hpp"

struct qpms_scenario {
  qpms::Scenario scenario;
};

struct qpms_manifest {
  qpms::RunManifest manifest;
};

namespace {

thread_local std::string last_error;

qpms_status fail(qpms_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class Fn>
qpms_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return QPMS_OK;
  } catch (const qpms::ValidationError& e) {
    return fail(QPMS_ERROR_VALIDATION, e.what());
  } catch (const qpms::ContractError& e) {
    return fail(QPMS_ERROR_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(QPMS_ERROR_IO, e.what());
  } catch (const std::out_of_range& e) {
    return fail(QPMS_ERROR_NOT_FOUND, e.what());
  } catch (const std::exception& e) {
    return fail(QPMS_ERROR_RUNTIME, e.what());
  } catch (...) {
    return fail(QPMS_ERROR_RUNTIME, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  auto* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const std::vector<qpms::PresetInfo>& presets() {
  static const auto list = qpms::list_presets();
  return list;
}

}  // namespace

extern "C" {

const char* qpms_last_error(void) { return last_error.c_str(); }

const char* qpms_version(void) { return qpms::kToolVersion; }

void qpms_string_free(char* s) { delete[] s; }

qpms_status qpms_scenario_from_file(const char* path, qpms_scenario** out) {
  if (!path || !out) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  if (!std::filesystem::exists(path)) return fail(QPMS_ERROR_IO, std::string("no such file: ") + path);
  return guarded([&] { *out = new qpms_scenario{qpms::load_scenario_file(path)}; });
}

qpms_status qpms_scenario_from_json(const char* text, qpms_scenario** out) {
  if (!text || !out) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw qpms::ValidationError("/", std::string("malformed JSON: ") + e.what());
    }
    *out = new qpms_scenario{qpms::parse_scenario(doc)};
  });
}

qpms_status qpms_scenario_from_preset(const char* name, qpms_scenario** out) {
  if (!name || !out) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  return guarded([&] { *out = new qpms_scenario{qpms::parse_scenario(qpms::preset_document(name))}; });
}

qpms_status qpms_scenario_set_seed(qpms_scenario* s, uint64_t seed) {
  if (!s) return fail(QPMS_ERROR_ARGUMENT, "null scenario");
  return guarded([&] { s->scenario.set_seed(seed); });
}

qpms_status qpms_scenario_enable_poisson(qpms_scenario* s) {
  if (!s) return fail(QPMS_ERROR_ARGUMENT, "null scenario");
  return guarded([&] { s->scenario.enable_poisson(); });
}

qpms_status qpms_scenario_name(const qpms_scenario* s, char** out) {
  if (!s || !out) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  return guarded([&] { *out = duplicate(s->scenario.name); });
}

qpms_status qpms_scenario_to_json(const qpms_scenario* s, char** out) {
  if (!s || !out) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  return guarded([&] { *out = duplicate(s->scenario.document.dump(2)); });
}

void qpms_scenario_free(qpms_scenario* s) { delete s; }

qpms_status qpms_run(const qpms_scenario* s, const char* out_dir, int jobs, qpms_manifest** out) {
  if (!s || !out_dir || !out) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  return guarded([&] {
    qpms::Scenario copy = s->scenario;
    copy.set_jobs(jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    *out = new qpms_manifest{qpms::run_scenario(copy, out_dir)};
  });
}

qpms_status qpms_manifest_to_json(const qpms_manifest* m, char** out) {
  if (!m || !out) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  return guarded([&] { *out = duplicate(m->manifest.to_json().dump(2)); });
}

size_t qpms_manifest_failed_cells(const qpms_manifest* m) { return m ? m->manifest.failed_cells : 0; }

int qpms_manifest_fatal(const qpms_manifest* m) { return m && m->manifest.fatal ? 1 : 0; }

void qpms_manifest_free(qpms_manifest* m) { delete m; }

size_t qpms_preset_count(void) { return presets().size(); }

const char* qpms_preset_name(size_t index) {
  return index < presets().size() ? presets()[index].name.c_str() : nullptr;
}

const char* qpms_preset_description(size_t index) {
  return index < presets().size() ? presets()[index].description.c_str() : nullptr;
}

qpms_status qpms_selectivity(const double* counts, size_t n, size_t desired, double* out_db) {
  if (!counts || !out_db) return fail(QPMS_ERROR_ARGUMENT, "null argument");
  return guarded([&] { *out_db = qpms::selectivity(std::span<const double>(counts, n), desired).db; });
}

}  // extern "C"
