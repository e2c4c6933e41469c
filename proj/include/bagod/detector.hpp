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

#include "bagod/identification.hpp"

namespace bagod
{

struct DetectOptions
{
    SolverOptions solver{.tolerance = 1e-4};
    int grid_size = kDefaultSpectrumGrid;
    double rel_threshold = 0.9;       // peaks below this fraction of the spectrum maximum are dropped
    double spread_width = pi / 12.0;  // expected angular spread of one user
    double gap_threshold = 0.0;       // 0 selects default_gap_threshold(spread_width, grid_size)
    double cos_tol = 0.0;             // stationary matching on cos(theta), 0 derives it from the registry
    double corr_threshold = 0.8;      // mobile matching
    double prune_ratio = 0.2;         // drop peaks whose fitted row energy is below this fraction of the largest
    int refine_sweeps = 3;            // post-AM angle refinement, 0 disables it
    int refine_rounds = 1;            // refinement / AM alternations
    double refine_window = 0.0;       // search half-width in cos(theta), 0 means 1 / N
    double eta_floor = 1e-6;
    AmOptions am;
};

// Angles, users, preambles and identities from one received block.
DetectionReport detect(const ReceivedSignal &signal, const ArrayConfig &array, const Registry &registry, double zeta,
                       const DetectOptions &opts = {});

// Least-squares fit of Y on the steering vectors of all peaks with free rows; keeps peaks whose row
// norm reaches ratio * max row norm.
std::vector<Peak> prune_weak_peaks(const std::vector<Peak> &peaks, const ReceivedSignal &signal,
                                   const ArrayConfig &array, double ratio);

// Per cluster, the angle whose recovered path gain is largest.
std::vector<AngleOfArrival> los_by_gain(const ClusterResult &clusters, const AmEstimate &am);

} // namespace bagod
