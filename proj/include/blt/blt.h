/* Copyright (c) blt contributors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the blt library: exact lattice-path probabilities, the
 * excursion sampler for the limit measure, Bessel numerics and conditioned
 * diffusion Monte Carlo.
 *
 * All handles are opaque. Functions returning blt_status report failures as
 * a nonzero code; the message and a JSON error record of the last failure
 * are kept on the context. Strings returned through handles stay valid until
 * the handle is destroyed.
 */
#ifndef BLT_BLT_H
#define BLT_BLT_H

#include <stddef.h>

#if defined(BLT_BUILDING_LIBRARY)
#define BLT_API __attribute__((visibility("default")))
#else
#define BLT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum blt_status {
  BLT_OK = 0,
  BLT_INVALID_ARGUMENT = 1,
  BLT_DOMAIN = 2,
  BLT_RESOURCE = 3,
  BLT_TIMEOUT = 4,
  BLT_CONVERGENCE = 5,
  BLT_IO = 6,
  BLT_CONTRACT = 7,
  BLT_SCHEMA = 8,
  BLT_INTERNAL = 9
} blt_status;

typedef struct blt_context blt_context;
typedef struct blt_report blt_report;

/* "0.4.0" */
BLT_API const char* blt_version(void);
/* "ok", "invalid_argument", ... */
BLT_API const char* blt_status_name(blt_status status);

/* JSON description of every subcommand and its config keys:
 * {"common": [key...], "subcommands": {name: {"stochastic", "csv_columns",
 * "keys": [key...]}}}, key = {name, type, default, positive, required, help}. */
BLT_API const char* blt_config_keys_json(void);

BLT_API blt_status blt_context_create(blt_context** out);
BLT_API void blt_context_destroy(blt_context* ctx);
/* Default worker cap for runs whose config has no "threads" key. */
BLT_API blt_status blt_context_set_threads(blt_context* ctx, int threads);
/* Default cache directory for runs whose config has no "cache_dir" key. */
BLT_API blt_status blt_context_set_cache_dir(blt_context* ctx, const char* dir);
/* Suppress (0) or restore (1) warnings on stderr. */
BLT_API blt_status blt_context_set_stderr_warnings(blt_context* ctx, int enabled);
/* Message of the last failure on ctx, "" if none. */
BLT_API const char* blt_last_error(const blt_context* ctx);
/* {"error": {...}} record of the last failure on ctx, "" if none. */
BLT_API const char* blt_last_error_json(const blt_context* ctx);

/* Runs `subcommand` with the JSON object `config_json` (may be NULL or "").
 * A "subcommand" key inside the config must agree with `subcommand`. */
BLT_API blt_status blt_run(blt_context* ctx, const char* subcommand, const char* config_json, blt_report** out);
BLT_API void blt_report_destroy(blt_report* report);
/* Full report as pretty-printed JSON. */
BLT_API const char* blt_report_json(const blt_report* report);
/* Number of CSV artifacts (nonzero only when the config sets "csv"). */
BLT_API size_t blt_report_csv_count(const blt_report* report);
BLT_API const char* blt_report_csv_name(const blt_report* report, size_t index);
BLT_API const char* blt_report_csv_content(const blt_report* report, size_t index);

/* Direct numerics. */
BLT_API blt_status blt_bessel_j0(blt_context* ctx, double x, double* out);
/* First zero of J0 and its certified bracket [lo, hi] (either may be NULL). */
BLT_API blt_status blt_find_j0(blt_context* ctx, double* j0, double* lo, double* hi);
BLT_API blt_status blt_gamma0(blt_context* ctx, double* out);

#ifdef __cplusplus
}
#endif

#endif /* BLT_BLT_H */
