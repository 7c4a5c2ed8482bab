/* C interface to the mode sorter simulator. All strings are UTF-8. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with qpms_string_free. */
#ifndef QPMS_QPMS_H
#define QPMS_QPMS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(QPMS_BUILDING_LIBRARY)
#define QPMS_API __declspec(dllexport)
#else
#define QPMS_API __declspec(dllimport)
#endif
#else
#define QPMS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qpms_status {
  QPMS_OK = 0,
  QPMS_ERROR_ARGUMENT = 1,   /* null handle, bad index, broken precondition */
  QPMS_ERROR_VALIDATION = 2, /* scenario document rejected */
  QPMS_ERROR_RUNTIME = 3,    /* numerical or configuration failure while running */
  QPMS_ERROR_IO = 4,
  QPMS_ERROR_NOT_FOUND = 5
} qpms_status;

typedef struct qpms_scenario qpms_scenario;
typedef struct qpms_manifest qpms_manifest;

/* Message of the last failed call on this thread, or "" if none. */
QPMS_API const char* qpms_last_error(void);
QPMS_API const char* qpms_version(void);
QPMS_API void qpms_string_free(char* s);

QPMS_API qpms_status qpms_scenario_from_file(const char* path, qpms_scenario** out);
QPMS_API qpms_status qpms_scenario_from_json(const char* text, qpms_scenario** out);
QPMS_API qpms_status qpms_scenario_from_preset(const char* name, qpms_scenario** out);
QPMS_API qpms_status qpms_scenario_set_seed(qpms_scenario* s, uint64_t seed);
QPMS_API qpms_status qpms_scenario_enable_poisson(qpms_scenario* s);
QPMS_API qpms_status qpms_scenario_name(const qpms_scenario* s, char** out);
QPMS_API qpms_status qpms_scenario_to_json(const qpms_scenario* s, char** out);
QPMS_API void qpms_scenario_free(qpms_scenario* s);

/* Runs every study and writes outputs plus manifest.json into out_dir.
 * jobs <= 0 uses the hardware concurrency. */
QPMS_API qpms_status qpms_run(const qpms_scenario* s, const char* out_dir, int jobs, qpms_manifest** out);
QPMS_API qpms_status qpms_manifest_to_json(const qpms_manifest* m, char** out);
QPMS_API size_t qpms_manifest_failed_cells(const qpms_manifest* m);
/* Nonzero when cells failed and the scenario marks failures fatal. */
QPMS_API int qpms_manifest_fatal(const qpms_manifest* m);
QPMS_API void qpms_manifest_free(qpms_manifest* m);

QPMS_API size_t qpms_preset_count(void);
QPMS_API const char* qpms_preset_name(size_t index);
QPMS_API const char* qpms_preset_description(size_t index);

/* 10 log10(counts[desired] / sum of the others). Writes +inf when the others
 * are all zero and NaN when every count is zero. */
QPMS_API qpms_status qpms_selectivity(const double* counts, size_t n, size_t desired, double* out_db);

#ifdef __cplusplus
}
#endif

#endif
