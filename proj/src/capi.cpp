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

#include "bagod/experiment.hpp"
#include "bagod/validation.hpp"

#include <fstream>
#include <ios>
#include <memory>
#include <new>
#include <string>

struct bagod_experiment
{
    bagod::ExperimentSpec spec;
    std::string description;
};

struct bagod_result
{
    bagod::ExperimentResult result;
    std::vector<std::vector<double>> table;
    std::size_t failures = 0;
};

struct bagod_dual_poly
{
    bagod::DualPolyResult result;
    bagod::RVec normalized;
};

namespace
{

thread_local std::string g_last_error;

bagod_status fail(bagod_status s, const std::string &msg)
{
    g_last_error = msg;
    return s;
}

// Maps exceptions to status codes; nothing escapes across the C boundary.
template <typename F> bagod_status guarded(F &&body)
{
    try
    {
        g_last_error.clear();
        return body();
    }
    catch (const bagod::ConfigError &e)
    {
        return fail(BAGOD_ERR_CONFIG, e.what());
    }
    catch (const std::ios_base::failure &e)
    {
        return fail(BAGOD_ERR_IO, e.what());
    }
    catch (const std::invalid_argument &e)
    {
        return fail(BAGOD_ERR_INVALID_ARGUMENT, e.what());
    }
    catch (const std::out_of_range &e)
    {
        return fail(BAGOD_ERR_INVALID_ARGUMENT, e.what());
    }
    catch (const std::bad_alloc &)
    {
        return fail(BAGOD_ERR_INTERNAL, "out of memory");
    }
    catch (const std::runtime_error &e)
    {
        return fail(BAGOD_ERR_NUMERIC, e.what());
    }
    catch (const std::exception &e)
    {
        return fail(BAGOD_ERR_INTERNAL, e.what());
    }
    catch (...)
    {
        return fail(BAGOD_ERR_INTERNAL, "unknown error");
    }
}

void write_text(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::ios_base::failure("cannot open '" + path + "'");
    out << text << '\n';
    out.close();
    if (!out)
        throw std::ios_base::failure("write to '" + path + "' failed");
}

} // namespace

extern "C" {

const char *bagod_last_error(void)
{
    return g_last_error.c_str();
}

const char *bagod_status_string(bagod_status status)
{
    switch (status)
    {
    case BAGOD_OK: return "ok";
    case BAGOD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BAGOD_ERR_CONFIG: return "configuration error";
    case BAGOD_ERR_IO: return "i/o error";
    case BAGOD_ERR_NUMERIC: return "numerical failure";
    case BAGOD_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char *bagod_version(void)
{
    static const std::string v = bagod::version_string();
    return v.c_str();
}

bagod_status bagod_experiment_load(const char *path, bagod_experiment **out)
{
    if (!path || !out)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_load: null argument");
    *out = nullptr;
    return guarded([&] {
        auto e = std::make_unique<bagod_experiment>();
        e->spec = bagod::load_experiment_spec(path);
        *out = e.release();
        return BAGOD_OK;
    });
}

bagod_status bagod_experiment_parse(const char *json_text, bagod_experiment **out)
{
    if (!json_text || !out)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_parse: null argument");
    *out = nullptr;
    return guarded([&] {
        auto e = std::make_unique<bagod_experiment>();
        e->spec = bagod::parse_experiment_spec(json_text);
        *out = e.release();
        return BAGOD_OK;
    });
}

void bagod_experiment_free(bagod_experiment *exp)
{
    delete exp;
}

bagod_status bagod_experiment_set_seed(bagod_experiment *exp, uint64_t seed)
{
    if (!exp)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_set_seed: null handle");
    exp->spec.seed = seed;
    return BAGOD_OK;
}

bagod_status bagod_experiment_set_trials(bagod_experiment *exp, int trials)
{
    if (!exp)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_set_trials: null handle");
    if (trials < 1)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_set_trials: trials must be at least 1");
    exp->spec.trials = trials;
    return BAGOD_OK;
}

bagod_status bagod_experiment_set_threads(bagod_experiment *exp, int threads)
{
    if (!exp)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_set_threads: null handle");
    if (threads < 0)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_set_threads: threads must be nonnegative");
    exp->spec.threads = threads;
    return BAGOD_OK;
}

bagod_status bagod_experiment_set_output(bagod_experiment *exp, const char *path)
{
    if (!exp || !path)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_set_output: null argument");
    exp->spec.output = path;
    return BAGOD_OK;
}

const char *bagod_experiment_output(const bagod_experiment *exp)
{
    return exp ? exp->spec.output.c_str() : "";
}

const char *bagod_experiment_describe(bagod_experiment *exp)
{
    if (!exp)
        return "";
    exp->description = bagod::experiment_spec_to_json(exp->spec);
    return exp->description.c_str();
}

bagod_status bagod_experiment_run(const bagod_experiment *exp, bagod_progress_fn progress, void *user,
                                  bagod_result **out)
{
    if (!exp || !out)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_experiment_run: null argument");
    *out = nullptr;
    return guarded([&] {
        auto r = std::make_unique<bagod_result>();
        bagod::ProgressFn cb;
        if (progress)
            cb = [progress, user](std::size_t done, std::size_t total) { progress(done, total, user); };
        r->result = bagod::run_experiment(exp->spec, cb);
        r->table = r->result.table();
        for (const auto &rec : r->result.records)
            r->failures += !rec.failure.empty();
        *out = r.release();
        return BAGOD_OK;
    });
}

size_t bagod_result_rows(const bagod_result *res)
{
    return res ? res->table.size() : 0;
}

size_t bagod_result_cols(const bagod_result *res)
{
    return res && !res->table.empty() ? res->table.front().size() : 0;
}

bagod_status bagod_result_value(const bagod_result *res, size_t row, size_t col, double *value)
{
    if (!res || !value)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_result_value: null argument");
    if (row >= res->table.size() || col >= res->table[row].size())
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_result_value: index out of range");
    *value = res->table[row][col];
    return BAGOD_OK;
}

size_t bagod_result_failures(const bagod_result *res)
{
    return res ? res->failures : 0;
}

bagod_status bagod_result_write_dat(const bagod_result *res, const char *path)
{
    if (!res || !path)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_result_write_dat: null argument");
    return guarded([&] {
        bagod::emit_dat(res->table, std::string(path));
        return BAGOD_OK;
    });
}

bagod_status bagod_result_write_metadata(const bagod_result *res, const char *path)
{
    if (!res || !path)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_result_write_metadata: null argument");
    return guarded([&] {
        write_text(path, bagod::experiment_metadata(res->result));
        return BAGOD_OK;
    });
}

void bagod_result_free(bagod_result *res)
{
    delete res;
}

bagod_status bagod_dual_poly_compute(const char *scenario_path, uint64_t seed, int grid_size, bagod_dual_poly **out)
{
    if (!out)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_dual_poly_compute: null output");
    *out = nullptr;
    if (grid_size < 16)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_dual_poly_compute: grid_size must be at least 16");
    return guarded([&] {
        bagod::ScenarioConfig cfg;
        if (scenario_path)
            cfg = bagod::load_scenario_config(scenario_path);
        bagod::DetectOptions opts;
        opts.grid_size = grid_size;
        opts.spread_width = cfg.spread_width;
        auto d = std::make_unique<bagod_dual_poly>();
        d->result = bagod::dual_polynomial(cfg, seed, opts);
        d->normalized = d->result.spectrum.normalized();
        *out = d.release();
        return BAGOD_OK;
    });
}

size_t bagod_dual_poly_size(const bagod_dual_poly *dp)
{
    return dp ? static_cast<size_t>(dp->normalized.size()) : 0;
}

bagod_status bagod_dual_poly_sample(const bagod_dual_poly *dp, size_t i, double *theta, double *value)
{
    if (!dp || !theta || !value)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_dual_poly_sample: null argument");
    if (i >= static_cast<size_t>(dp->normalized.size()))
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_dual_poly_sample: index out of range");
    *theta = dp->result.spectrum.grid(static_cast<Eigen::Index>(i));
    *value = dp->normalized(static_cast<Eigen::Index>(i));
    return BAGOD_OK;
}

bagod_status bagod_dual_poly_write(const bagod_dual_poly *dp, const char *dat_path, const char *metadata_path)
{
    if (!dp || !dat_path)
        return fail(BAGOD_ERR_INVALID_ARGUMENT, "bagod_dual_poly_write: null argument");
    return guarded([&] {
        bagod::emit_dual_poly(dp->result, dat_path);
        if (metadata_path)
            write_text(metadata_path, bagod::dual_poly_metadata(dp->result));
        return BAGOD_OK;
    });
}

void bagod_dual_poly_free(bagod_dual_poly *dp)
{
    delete dp;
}

bagod_status bagod_validate(uint64_t seed, bagod_check_fn report, void *user, int *failed)
{
    return guarded([&] {
        int bad = 0;
        for (const auto &c : bagod::run_validation_suite(seed))
        {
            bad += !c.passed;
            if (report)
                report(c.name.c_str(), c.passed ? 1 : 0, c.detail.c_str(), c.seconds, user);
        }
        if (failed)
            *failed = bad;
        return BAGOD_OK;
    });
}

} // extern "C"
