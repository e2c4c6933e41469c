// SPDX-License-Identifier: Apache-2.0
//
// bagod - blind asynchronous goal-oriented activity detection
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BAGOD_BAGOD_H
#define BAGOD_BAGOD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BAGOD_BUILDING_LIBRARY)
#define BAGOD_API __declspec(dllexport)
#else
#define BAGOD_API __declspec(dllimport)
#endif
#else
#define BAGOD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bagod_status
{
    BAGOD_OK = 0,
    BAGOD_ERR_INVALID_ARGUMENT = 1, /* null handle, out-of-range index or value */
    BAGOD_ERR_CONFIG = 2,           /* malformed or inconsistent configuration */
    BAGOD_ERR_IO = 3,               /* file could not be read or written */
    BAGOD_ERR_NUMERIC = 4,          /* numerical failure inside the pipeline */
    BAGOD_ERR_INTERNAL = 5
} bagod_status;

typedef struct bagod_experiment bagod_experiment;
typedef struct bagod_result bagod_result;
typedef struct bagod_dual_poly bagod_dual_poly;

/* Message of the last failed call on this thread, "" if none. Valid until the next call. */
BAGOD_API const char *bagod_last_error(void);
BAGOD_API const char *bagod_status_string(bagod_status status);
BAGOD_API const char *bagod_version(void);

/* ---- experiments ---- */

BAGOD_API bagod_status bagod_experiment_load(const char *path, bagod_experiment **out);
BAGOD_API bagod_status bagod_experiment_parse(const char *json_text, bagod_experiment **out);
BAGOD_API void bagod_experiment_free(bagod_experiment *exp);

BAGOD_API bagod_status bagod_experiment_set_seed(bagod_experiment *exp, uint64_t seed);
BAGOD_API bagod_status bagod_experiment_set_trials(bagod_experiment *exp, int trials);
/* 0 selects the hardware concurrency. */
BAGOD_API bagod_status bagod_experiment_set_threads(bagod_experiment *exp, int threads);
BAGOD_API bagod_status bagod_experiment_set_output(bagod_experiment *exp, const char *path);
/* Output path from the spec or the last set_output, "" if none. Owned by the handle. */
BAGOD_API const char *bagod_experiment_output(const bagod_experiment *exp);
/* Fully resolved spec as JSON. Owned by the handle, valid until the next call on it. */
BAGOD_API const char *bagod_experiment_describe(bagod_experiment *exp);

typedef void (*bagod_progress_fn)(size_t done, size_t total, void *user);
BAGOD_API bagod_status bagod_experiment_run(const bagod_experiment *exp, bagod_progress_fn progress, void *user,
                                            bagod_result **out);

/* ---- results ---- */

/* Rows are sweep points; column 0 is the sweep value, columns 1..8 the metrics in .dat order. */
BAGOD_API size_t bagod_result_rows(const bagod_result *res);
BAGOD_API size_t bagod_result_cols(const bagod_result *res);
BAGOD_API bagod_status bagod_result_value(const bagod_result *res, size_t row, size_t col, double *value);
/* Number of trials that raised an error (across all points). */
BAGOD_API size_t bagod_result_failures(const bagod_result *res);
BAGOD_API bagod_status bagod_result_write_dat(const bagod_result *res, const char *path);
BAGOD_API bagod_status bagod_result_write_metadata(const bagod_result *res, const char *path);
BAGOD_API void bagod_result_free(bagod_result *res);

/* ---- dual polynomial ---- */

/* scenario_path may be NULL for the default scenario. */
BAGOD_API bagod_status bagod_dual_poly_compute(const char *scenario_path, uint64_t seed, int grid_size,
                                               bagod_dual_poly **out);
BAGOD_API size_t bagod_dual_poly_size(const bagod_dual_poly *dp);
/* Normalized spectrum c1 sqrt(N) ||q_G(theta)|| at grid point i. */
BAGOD_API bagod_status bagod_dual_poly_sample(const bagod_dual_poly *dp, size_t i, double *theta, double *value);
BAGOD_API bagod_status bagod_dual_poly_write(const bagod_dual_poly *dp, const char *dat_path,
                                             const char *metadata_path);
BAGOD_API void bagod_dual_poly_free(bagod_dual_poly *dp);

/* ---- invariant suites ---- */

typedef void (*bagod_check_fn)(const char *name, int passed, const char *detail, double seconds, void *user);
/* Runs the quick invariant suites, reporting each through `report` (may be NULL). */
BAGOD_API bagod_status bagod_validate(uint64_t seed, bagod_check_fn report, void *user, int *failed);

#ifdef __cplusplus
}
#endif

#endif /* BAGOD_BAGOD_H */
