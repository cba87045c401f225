/* C interface of the biharmonic stability lab. All handles are opaque; every
 * call returns a bh_status and leaves a message for bh_last_error() on failure.
 * Strings returned by accessors stay valid until the owning handle is freed. */
#ifndef BH_CAPI_H
#define BH_CAPI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bh_status {
  BH_OK = 0,
  BH_E_INVALID_ARGUMENT = 1,
  BH_E_PRECONDITION = 2,
  BH_E_NEAR_SINGULAR = 3,
  BH_E_DIVERGENT = 4,
  BH_E_IO = 5,
  BH_E_PARSE = 6,
  BH_E_UNKNOWN_KEY = 7,
  BH_E_NUMERIC = 8,
  BH_E_INTERNAL = 9
} bh_status;

typedef enum bh_command {
  BH_CMD_FORWARD = 0,
  BH_CMD_DTN = 1,
  BH_CMD_CGO = 2,
  BH_CMD_RECONSTRUCT = 3,
  BH_CMD_CARLEMAN = 4,
  BH_CMD_UC = 5,
  BH_CMD_SWEEP = 6
} bh_command;

typedef enum bh_fit_model { BH_FIT_LOG_POWER = 0, BH_FIT_LOGLOG_POWER = 1 } bh_fit_model;
typedef enum bh_fit_target { BH_FIT_Q = 0, BH_FIT_A = 1, BH_FIT_DA = 2 } bh_fit_target;

typedef struct bh_config bh_config;
typedef struct bh_report bh_report;
typedef struct bh_field bh_field;

typedef struct bh_run_options {
  const char* out_dir; /* NULL means "." */
  int threads;         /* values < 1 mean 1 */
  uint64_t seed;
} bh_run_options;

/* Message of the last failed call on this thread ("" if none). */
const char* bh_last_error(void);
const char* bh_status_name(bh_status s);

/* Configuration: a list of scenarios. */
bh_status bh_config_default(bh_config** out);
bh_status bh_config_load(const char* path, bh_config** out);
bh_status bh_config_parse(const char* text, bh_config** out);
bh_status bh_config_save(const bh_config* cfg, const char* path);
bh_status bh_config_count(const bh_config* cfg, size_t* count);
bh_status bh_config_name(const bh_config* cfg, size_t index, const char** name);
/* Plain-text listing of every parameter of scenario `index`. */
bh_status bh_config_describe(const bh_config* cfg, size_t index, const char** text);
void bh_config_free(bh_config* cfg);

/* Runs one command on scenario `index`, writing its files into out_dir. */
bh_status bh_run(const bh_config* cfg, size_t index, bh_command cmd, const bh_run_options* opt, bh_report** out);
/* Fits a records CSV written by BH_CMD_SWEEP; one fit per h. */
bh_status bh_fit(const char* records_csv, bh_fit_model model, bh_fit_target target, const bh_run_options* opt,
                 bh_report** out);

bh_status bh_report_summary(const bh_report* rep, const char** text);
bh_status bh_report_aborted(const bh_report* rep, size_t* count);
bh_status bh_report_file_count(const bh_report* rep, size_t* count);
bh_status bh_report_file(const bh_report* rep, size_t index, const char** path);
void bh_report_free(bh_report* rep);

/* Binary field files ("BHFLD1"). */
bh_status bh_field_load(const char* path, bh_field** out);
bh_status bh_field_shape(const bh_field* f, int* n, int* N, int* components);
/* Periodic-box H^s norm of one component (integer s, or fields vanishing near the boundary). */
bh_status bh_field_norm(const bh_field* f, int component, double s, double* value);
void bh_field_free(bh_field* f);

#ifdef __cplusplus
}
#endif

#endif
