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

#include "bagod/experiment.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bagod
{

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// delay_gain_vector examples and the bound max |e_t| <= 1 + zeta over random gain errors.
CheckResult check_delay_gain(int samples, std::uint64_t seed);

// Phase-ramp synthesis against the time-domain burst for every integer delay in [0, tau_max].
CheckResult check_synthesis_equivalence(int scenarios, std::uint64_t seed, double tol = 1e-10);

// Joint synthesis equals the sum of single-user syntheses.
CheckResult check_superposition(int scenarios, std::uint64_t seed, double tol = 1e-12);

// ADMM against the primal-dual reference on random instances with N <= 16, T <= 4.
CheckResult check_solver_agreement(int instances, std::uint64_t seed, double objective_tol = 1e-4,
                                   double feasibility_tol = 1e-6);

// max_theta c1 ||q_G(theta)|| <= 1 + tol for converged ADMM solutions on synthesized blocks; the
// sqrt(N)-scaled bound, which is tight at the support, must hold as well.
CheckResult check_dual_feasibility(int instances, std::uint64_t seed, int grid_size = 4096, double tol = 1e-3);

// Noiseless AM with the true angles: preambles after gauge fixing, integer delays, and a residual
// that never rises (am_solve throws otherwise).
CheckResult check_am_recovery(double zeta, int scenarios, std::uint64_t seed, double tol = 1e-3);

// Noiseless end-to-end detection: P_d = 1, P_fa = 0, every path angle within one grid cell.
CheckResult check_noiseless_detection(const ScenarioConfig &config, int trials, std::uint64_t seed,
                                      double angle_tol, const DetectOptions &opts);

// Options suited to noiseless blocks: tight solver tolerance with a larger iteration budget, peaks
// within 1% of the maximum, refinement alternated with AM until the angles settle.
DetectOptions noiseless_detect_options();

// S = {1,2,3}, S_hat = {1,2,4}, K = 100.
CheckResult check_metric_example();

// Codebook columns correlate to 1 with themselves and 0 with each other.
CheckResult check_codebook_matching(int t, int guard);

// Orthogonal pilots, no noise: AMP returns exactly the active set in both decision modes, and one
// iteration reproduces the matched filter.
CheckResult check_amp_orthogonal(int trials, std::uint64_t seed);

// Two runs of the same spec (with different thread counts) give identical .dat bytes.
CheckResult check_determinism(ExperimentSpec spec);

// Quick versions of all of the above.
std::vector<CheckResult> run_validation_suite(std::uint64_t seed);

} // namespace bagod
