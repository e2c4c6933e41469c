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

#include "bagod/scenario.hpp"

#include <cstdint>
#include <vector>

namespace bagod
{

enum class AmpDecision
{
    TopK,     // the K_a largest statistics, K_a known
    Threshold // posterior activity at or above activity_threshold
};

struct AmpConfig
{
    int max_iter = 100;
    double damping = 1.0; // weight of the new iterate, 1 disables damping
    double tol = 1e-6;    // relative change of the estimate
    double activity_threshold = 0.2;
    AmpDecision decision = AmpDecision::TopK;
    double divergence_factor = 1e3; // residual norm above this multiple of ||Y|| stops the run
};

// Bernoulli-Gaussian prior: each channel coefficient is nonzero with probability lambda and then
// CN(0, beta).
struct AmpPrior
{
    double lambda = 0.01;
    double beta = 1.0;
};

struct AmpResult
{
    CMat estimates;   // K x M
    CMat residual;    // T x M
    RVec activity;    // posterior activity probability per user, averaged over antennas
    RVec statistic;   // squared norm of the last denoiser input row (matched filter on iteration 1)
    std::vector<int> active; // decided active users, increasing
    int iterations = 0;
    bool diverged = false;
    bool converged = false;
    std::vector<double> residual_history;
};

// T x K i.i.d. complex Gaussian pilots with unit-norm columns.
CMat gaussian_pilots(int t, int k, std::uint64_t seed);

// Pilot-domain observation Y (T x M) = sum_k p_k h_k^T + noise. Synchronized by default; `impaired`
// applies each user's cyclic delay and gain error to its pilot. Noise follows the scenario SNR.
struct AmpSignal
{
    CMat y;
    double noise_var = 0.0; // per-entry variance used
    double beta = 0.0;      // mean per-antenna power of active channels (genie prior)
};
AmpSignal synthesize_amp_signal(const Scenario &scenario, const CMat &pilots, std::uint64_t seed, bool impaired = false);

// Multiple-measurement-vector AMP: entrywise Bernoulli-Gaussian MMSE denoiser with a per-antenna
// noise estimate and the matching Onsager correction.
AmpResult amp_detect(const CMat &y, const CMat &pilots, const AmpPrior &prior, double noise_var, int k_active,
                     const AmpConfig &config = {});

} // namespace bagod
