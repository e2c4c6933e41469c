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

#pragma once

#include "bagod/amp.hpp"
#include "bagod/config.hpp"
#include "bagod/detector.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bagod
{

enum class SweepVariable
{
    KaM,
    KaS,
    KM,
    KS,
    T,
    N,
    SNR
};

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string &name);

struct ExperimentSpec
{
    SweepVariable variable = SweepVariable::N;
    std::vector<double> values;
    ScenarioConfig scenario;
    int trials = 50;
    std::uint64_t seed = 1;
    bool run_bagod = true;
    bool run_amp = true;
    bool amp_impaired = false;      // feed AMP the delayed, gain-impaired pilots
    bool exclude_failures = false;  // otherwise a failed trial scores as a full miss
    int threads = 0;                // 0 picks the hardware concurrency
    std::string output;             // .dat path, may be empty
    DetectOptions detect;
    AmpConfig amp;

    void validate() const;
    // Scenario of one sweep point.
    ScenarioConfig point(std::size_t index) const;
};

ExperimentSpec parse_experiment_spec(const std::string &json_text);
ExperimentSpec load_experiment_spec(const std::string &path);
// Fully resolved spec, every knob spelled out.
std::string experiment_spec_to_json(const ExperimentSpec &spec);

struct TrialRecord
{
    std::size_t point = 0;
    int index = 0;
    std::uint64_t seed = 0;
    std::optional<Metrics> bagod;
    std::optional<Metrics> amp;
    bool solver_converged = true;
    int solver_iterations = 0;
    bool am_converged = true;
    bool amp_diverged = false;
    int amp_iterations = 0;
    std::string failure; // empty when the trial completed
    double wall_seconds = 0.0;
};

struct PointSummary
{
    double value = 0.0;
    Metrics bagod; // expectation estimates
    Metrics amp;
    int trials = 0;
    int included = 0;
    int failures = 0;
    int solver_nonconverged = 0;
    int amp_diverged = 0;
    bool pd_drop_flag = false; // P_d fell although SNR rose, a sanity flag only
    double wall_seconds = 0.0;
};

struct ExperimentResult
{
    ExperimentSpec spec;
    std::vector<PointSummary> points;
    std::vector<TrialRecord> records; // point-major, trial-minor
    int threads_used = 1;
    double wall_seconds = 0.0;

    // Row i: t, P_d-AMP, P_fa-AMP, P_d, P_fa, P_d_S, P_fa_S, P_d_M, P_fa_M (BaGOD). Methods not run are NaN.
    std::vector<std::vector<double>> table() const;
};

// Seed of trial `index`; identical for every sweep point so points share random draws where their
// dimensions agree.
std::uint64_t trial_seed(std::uint64_t seed, int index);

TrialRecord run_trial(const ExperimentSpec &spec, std::size_t point, int index);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;
ExperimentResult run_experiment(const ExperimentSpec &spec, const ProgressFn &progress = {});

// Header `t y1 .. y8`, one row per sweep point.
void emit_dat(const std::vector<std::vector<double>> &table, std::ostream &os);
void emit_dat(const std::vector<std::vector<double>> &table, const std::string &path);

// Resolved parameters, per-point counts, trial records and timings.
std::string experiment_metadata(const ExperimentResult &result);

// Spectrum of one synthesized block, for plotting the dual polynomial.
struct DualPolyResult
{
    ScenarioConfig config;
    std::uint64_t seed = 0;
    AngularSpectrum spectrum;
    std::vector<Peak> peaks;
    std::vector<std::pair<int, std::vector<double>>> true_angles; // active user id and path angles
    SdpSolution solution;
    double wall_seconds = 0.0;
};

DualPolyResult dual_polynomial(const ScenarioConfig &config, std::uint64_t seed, const DetectOptions &opts = {});
// Table `theta value` with the normalized spectrum c1 sqrt(N) ||q_G(theta)||.
void emit_dual_poly(const DualPolyResult &result, const std::string &path);
std::string dual_poly_metadata(const DualPolyResult &result);

std::string version_string();

} // namespace bagod
