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

#include "bagod/bagod.h"

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                                                                   \
    do                                                                                                                 \
    {                                                                                                                  \
        if (!(cond))                                                                                                   \
        {                                                                                                              \
            fprintf(stderr, "%s:%d: expected %s (last error: %s)\n", __FILE__, __LINE__, #cond, bagod_last_error()); \
            ++failures;                                                                                                \
        }                                                                                                              \
    } while (0)

static const char *spec_text =
    "{\"sweep\": {\"variable\": \"N\", \"values\": [16, 32]},"
    " \"scenario\": {\"T\": 2, \"K_S\": 30, \"K_M\": 6, \"K_aS\": 2, \"K_aM\": 1, \"L_max\": 3,"
    " \"snr_db\": 20, \"tau_max\": 1},"
    " \"trials\": 1, \"seed\": 2, \"methods\": [\"bagod\", \"amp\"]}";

static void count_progress(size_t done, size_t total, void *user)
{
    size_t *calls = (size_t *)user;
    ++*calls;
    (void)done;
    (void)total;
}

static void count_check(const char *name, int passed, const char *detail, double seconds, void *user)
{
    int *n = (int *)user;
    ++*n;
    (void)name;
    (void)passed;
    (void)detail;
    (void)seconds;
}

static void test_errors(void)
{
    bagod_experiment *exp = NULL;
    EXPECT(bagod_experiment_parse(NULL, &exp) == BAGOD_ERR_INVALID_ARGUMENT);
    EXPECT(bagod_experiment_parse(spec_text, NULL) == BAGOD_ERR_INVALID_ARGUMENT);
    EXPECT(bagod_experiment_parse("{broken", &exp) == BAGOD_ERR_CONFIG);
    EXPECT(exp == NULL);
    EXPECT(strlen(bagod_last_error()) > 0);
    EXPECT(bagod_experiment_parse("{\"sweep\": {\"variable\": \"N\", \"values\": [16]}, \"colour\": 1}", &exp) ==
           BAGOD_ERR_CONFIG);
    EXPECT(bagod_experiment_load("/nonexistent/spec.json", &exp) == BAGOD_ERR_IO);
    EXPECT(bagod_experiment_set_seed(NULL, 1) == BAGOD_ERR_INVALID_ARGUMENT);
    EXPECT(bagod_result_rows(NULL) == 0);
    EXPECT(strcmp(bagod_status_string(BAGOD_OK), bagod_status_string(BAGOD_ERR_IO)) != 0);
    EXPECT(strlen(bagod_version()) > 0);
    bagod_experiment_free(NULL);
    bagod_result_free(NULL);
    bagod_dual_poly_free(NULL);
}

static void test_run(void)
{
    bagod_experiment *exp = NULL;
    bagod_result *res = NULL;
    size_t calls = 0;
    double v = 0.0;

    EXPECT(bagod_experiment_parse(spec_text, &exp) == BAGOD_OK);
    if (!exp)
        return;
    EXPECT(bagod_experiment_set_trials(exp, 0) == BAGOD_ERR_INVALID_ARGUMENT);
    EXPECT(bagod_experiment_set_trials(exp, 2) == BAGOD_OK);
    EXPECT(bagod_experiment_set_threads(exp, -1) == BAGOD_ERR_INVALID_ARGUMENT);
    EXPECT(bagod_experiment_set_threads(exp, 1) == BAGOD_OK);
    EXPECT(bagod_experiment_set_seed(exp, 9) == BAGOD_OK);
    EXPECT(strcmp(bagod_experiment_output(exp), "") == 0);
    EXPECT(bagod_experiment_set_output(exp, "x.dat") == BAGOD_OK);
    EXPECT(strcmp(bagod_experiment_output(exp), "x.dat") == 0);
    EXPECT(strstr(bagod_experiment_describe(exp), "\"trials\": 2") != NULL);

    EXPECT(bagod_experiment_run(exp, count_progress, &calls, &res) == BAGOD_OK);
    EXPECT(calls == 4);
    if (res)
    {
        EXPECT(bagod_result_rows(res) == 2);
        EXPECT(bagod_result_cols(res) == 9);
        EXPECT(bagod_result_value(res, 0, 0, &v) == BAGOD_OK && v == 16.0);
        EXPECT(bagod_result_value(res, 1, 0, &v) == BAGOD_OK && v == 32.0);
        EXPECT(bagod_result_value(res, 1, 3, &v) == BAGOD_OK && v >= 0.0 && v <= 1.0);
        EXPECT(bagod_result_value(res, 2, 0, &v) == BAGOD_ERR_INVALID_ARGUMENT);
        EXPECT(bagod_result_value(res, 0, 9, &v) == BAGOD_ERR_INVALID_ARGUMENT);
        EXPECT(bagod_result_value(res, 0, 0, NULL) == BAGOD_ERR_INVALID_ARGUMENT);
        EXPECT(bagod_result_failures(res) == 0);
        EXPECT(bagod_result_write_dat(res, "/nonexistent/dir/out.dat") == BAGOD_ERR_IO);
        EXPECT(bagod_result_write_dat(res, "capi_out.dat") == BAGOD_OK);
        EXPECT(bagod_result_write_metadata(res, "capi_out.dat.meta.json") == BAGOD_OK);
        remove("capi_out.dat");
        remove("capi_out.dat.meta.json");
    }
    bagod_result_free(res);
    bagod_experiment_free(exp);
}

static void test_dual_poly(void)
{
    bagod_dual_poly *dp = NULL;
    double theta = 0.0, value = 0.0, peak = 0.0;
    size_t i;
    EXPECT(bagod_dual_poly_compute(NULL, 1, 8, &dp) == BAGOD_ERR_INVALID_ARGUMENT);
    EXPECT(bagod_dual_poly_compute("/nonexistent/scenario.json", 1, 512, &dp) == BAGOD_ERR_IO);
    EXPECT(bagod_dual_poly_compute(NULL, 1, 512, &dp) == BAGOD_OK);
    if (!dp)
        return;
    EXPECT(bagod_dual_poly_size(dp) == 512);
    for (i = 0; i < bagod_dual_poly_size(dp); ++i)
    {
        EXPECT(bagod_dual_poly_sample(dp, i, &theta, &value) == BAGOD_OK);
        EXPECT(theta >= 0.0 && theta <= 3.14159266);
        if (value > peak)
            peak = value;
    }
    EXPECT(peak > 0.5 && peak < 1.01);
    EXPECT(bagod_dual_poly_sample(dp, 512, &theta, &value) == BAGOD_ERR_INVALID_ARGUMENT);
    EXPECT(bagod_dual_poly_write(dp, "capi_dual.dat", NULL) == BAGOD_OK);
    remove("capi_dual.dat");
    bagod_dual_poly_free(dp);
}

static void test_validate(void)
{
    int reported = 0, failed = -1;
    EXPECT(bagod_validate(1, count_check, &reported, &failed) == BAGOD_OK);
    EXPECT(reported > 5);
    EXPECT(failed == 0);
}

int main(void)
{
    test_errors();
    test_run();
    test_dual_poly();
    test_validate();
    if (failures)
        fprintf(stderr, "%d expectation(s) failed\n", failures);
    else
        printf("all C API checks passed\n");
    return failures ? 1 : 0;
}
