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

#include "bagod/goal_sdp.hpp"

#include <iosfwd>
#include <vector>

namespace bagod
{

// ||q_G(theta)||_2 sampled on a theta grid.
struct AngularSpectrum
{
    RVec grid;
    RVec values;
    double c1 = 1.0;
    int n = 1;

    // c1 sqrt(N) ||q_G||: equals 1 at the support of the primal solution, never above 1 when feasible.
    RVec normalized() const { return values * (c1 * std::sqrt(static_cast<double>(n))); }
};

struct Peak
{
    AngleOfArrival angle;
    double value;
};

struct ClusterResult
{
    std::vector<std::vector<Peak>> clusters; // sorted by angle, disjoint
    int k_hat = 0;
    std::vector<int> l_hat;
    std::vector<AngleOfArrival> los_angle;

    std::vector<AngleOfArrival> angles(std::size_t cluster) const;
};

inline constexpr int kDefaultSpectrumGrid = 8192;

AngularSpectrum eval_dual_polynomial(const SdpSolution &sol, const SdpProblem &problem,
                                     int grid_size = kDefaultSpectrumGrid, double spacing_ratio = 0.5);

// Strict local maxima at or above rel_threshold * max(values), refined by a three-point parabola.
std::vector<Peak> find_peaks(const AngularSpectrum &spectrum, double rel_threshold, bool refine = true);

// Splits sorted peaks at gaps wider than gap_threshold radians. The LoS angle of a cluster is its
// highest spectrum value.
ClusterResult cluster_angles(const std::vector<Peak> &peaks, double gap_threshold);

double default_gap_threshold(double spread_width, int grid_size = kDefaultSpectrumGrid);

// Two whitespace-separated columns with a `theta value` header.
void write_spectrum(std::ostream &os, const AngularSpectrum &spectrum, bool normalized = false);

} // namespace bagod
