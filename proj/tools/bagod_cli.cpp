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

// Command-line front end. Talks to the library only through the C interface.

#include "bagod/bagod.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace
{

int report_error(const char *what, bagod_status s)
{
    std::cerr << "bagod: " << what << ": " << bagod_status_string(s);
    const std::string msg = bagod_last_error();
    if (!msg.empty())
        std::cerr << ": " << msg;
    std::cerr << '\n';
    return 1;
}

std::string metadata_path(const std::string &dat)
{
    return dat + ".meta.json";
}

std::string default_output(const std::string &spec_path)
{
    std::string stem = spec_path;
    if (const auto slash = stem.find_last_of('/'); slash != std::string::npos)
        stem = stem.substr(slash + 1);
    if (const auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0)
        stem = stem.substr(0, dot);
    return stem + ".dat";
}

void progress_bar(size_t done, size_t total, void *)
{
    std::fprintf(stderr, "\r  trials %zu/%zu", done, total);
    if (done == total)
        std::fputc('\n', stderr);
}

void print_check(const char *name, int passed, const char *detail, double seconds, void *)
{
    std::printf("%s %-28s %s (%.2fs)\n", passed ? "PASS" : "FAIL", name, detail, seconds);
}

struct RunArgs
{
    std::string spec;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
    std::string out;
    bool quiet = false;
};

int cmd_run(const RunArgs &a)
{
    bagod_experiment *exp = nullptr;
    if (auto s = bagod_experiment_load(a.spec.c_str(), &exp); s != BAGOD_OK)
        return report_error("loading spec", s);
    bagod_status s = BAGOD_OK;
    if (a.seed)
        s = bagod_experiment_set_seed(exp, *a.seed);
    if (s == BAGOD_OK && a.trials)
        s = bagod_experiment_set_trials(exp, *a.trials);
    if (s == BAGOD_OK && a.threads)
        s = bagod_experiment_set_threads(exp, *a.threads);
    if (s != BAGOD_OK)
    {
        bagod_experiment_free(exp);
        return report_error("applying options", s);
    }
    std::string out = a.out;
    if (out.empty())
        out = bagod_experiment_output(exp);
    if (out.empty())
        out = default_output(a.spec);

    bagod_result *res = nullptr;
    s = bagod_experiment_run(exp, a.quiet ? nullptr : progress_bar, nullptr, &res);
    bagod_experiment_free(exp);
    if (s != BAGOD_OK)
        return report_error("running experiment", s);

    int rc = 0;
    if (auto w = bagod_result_write_dat(res, out.c_str()); w != BAGOD_OK)
        rc = report_error("writing table", w);
    else if (auto m = bagod_result_write_metadata(res, metadata_path(out).c_str()); m != BAGOD_OK)
        rc = report_error("writing metadata", m);
    if (rc == 0 && !a.quiet)
    {
        static const char *cols[] = {"t", "Pd-AMP", "Pfa-AMP", "Pd", "Pfa", "Pd,S", "Pfa,S", "Pd,M", "Pfa,M"};
        for (const char *c : cols)
            std::printf("%10s", c);
        std::printf("\n");
        for (size_t r = 0; r < bagod_result_rows(res); ++r)
        {
            for (size_t c = 0; c < bagod_result_cols(res); ++c)
            {
                double v = 0.0;
                bagod_result_value(res, r, c, &v);
                if (std::isnan(v))
                    std::printf("%10s", "-");
                else
                    std::printf("%10.4g", v);
            }
            std::printf("\n");
        }
        if (const size_t f = bagod_result_failures(res))
            std::printf("%zu trial(s) failed; see %s\n", f, metadata_path(out).c_str());
        std::printf("wrote %s and %s\n", out.c_str(), metadata_path(out).c_str());
    }
    bagod_result_free(res);
    return rc;
}

int cmd_dual_poly(const std::string &scenario, std::uint64_t seed, int grid, std::string out)
{
    if (out.empty())
        out = "dual_poly.dat";
    bagod_dual_poly *dp = nullptr;
    if (auto s = bagod_dual_poly_compute(scenario.empty() ? nullptr : scenario.c_str(), seed, grid, &dp);
        s != BAGOD_OK)
        return report_error("computing spectrum", s);
    const std::string meta = metadata_path(out);
    const bagod_status s = bagod_dual_poly_write(dp, out.c_str(), meta.c_str());
    bagod_dual_poly_free(dp);
    if (s != BAGOD_OK)
        return report_error("writing spectrum", s);
    std::printf("wrote %s and %s\n", out.c_str(), meta.c_str());
    return 0;
}

int cmd_validate(std::uint64_t seed)
{
    int failed = 0;
    if (auto s = bagod_validate(seed, print_check, nullptr, &failed); s != BAGOD_OK)
        return report_error("validation", s);
    std::printf("%s: %d failing check(s)\n", failed ? "FAILED" : "OK", failed);
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"bagod: blind asynchronous activity detection experiments"};
    app.set_version_flag("--version", std::string(bagod_version()));
    app.require_subcommand(1);

    RunArgs run;
    auto *run_cmd = app.add_subcommand("run", "run a Monte-Carlo sweep from a JSON spec");
    run_cmd->add_option("spec", run.spec, "experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", run.seed, "override the base seed");
    run_cmd->add_option("--trials", run.trials, "override trials per sweep point")->check(CLI::PositiveNumber);
    run_cmd->add_option("--threads", run.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--out", run.out, "output .dat path (metadata goes to <out>.meta.json)");
    run_cmd->add_flag("-q,--quiet", run.quiet, "no progress or table on the terminal");

    std::string scenario, dp_out;
    std::uint64_t dp_seed = 1;
    int grid = 8192;
    auto *dp_cmd = app.add_subcommand("dual-poly", "emit the normalized dual polynomial of one block");
    dp_cmd->add_option("scenario", scenario, "scenario config (JSON); defaults when omitted")
        ->check(CLI::ExistingFile);
    dp_cmd->add_option("--seed", dp_seed, "scenario and noise seed");
    dp_cmd->add_option("--grid", grid, "number of theta samples")->check(CLI::Range(16, 1 << 22));
    dp_cmd->add_option("--out", dp_out, "output .dat path (default dual_poly.dat)");

    std::uint64_t val_seed = 1;
    auto *val_cmd = app.add_subcommand("validate", "run the invariant suites");
    val_cmd->add_option("--seed", val_seed, "seed of the random instances");

    CLI11_PARSE(app, argc, argv);

    if (*run_cmd)
        return cmd_run(run);
    if (*dp_cmd)
        return cmd_dual_poly(scenario, dp_seed, grid, dp_out);
    return cmd_validate(val_seed);
}
