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

#include "bagod/am_recovery.hpp"
#include "bagod/scenario.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace bagod
{

// (sector, codebook column) pair that a mobile preamble occupies.
using MobileSlot = std::pair<int, int>;

// Distance used to compare LoS angles: radians, or the difference of cosines.
enum class MatchDomain
{
    Angle,
    Cosine
};

double match_distance(double a, double b, MatchDomain domain) noexcept;

// What the base station knows in advance about the user population.
struct Registry
{
    std::map<int, AngleOfArrival> stationary;             // user id -> LoS angle
    int sectors = 4;                                      // equal-width ranges partitioning (0, pi)
    RMat mobile_codebook;                                 // T x P, nonnegative orthonormal columns
    std::map<MobileSlot, std::vector<int>> mobile_assignment; // slot -> candidate user ids (sorted)
    int delay_guard = 0;                                  // cyclic shifts tolerated by mobile matching

    // Throws std::invalid_argument when stationary angles are closer than 2 * tol or the codebook
    // columns are not orthonormal and nonnegative.
    void validate(double tol, MatchDomain domain = MatchDomain::Angle) const;
    int k_total() const;
    // stationary_cos_tolerance of the registered LoS angles.
    double default_cos_tol() const;
};

Registry registry_from_scenario(const Scenario &scenario);

// Whitespace table, one user per line: `user_id type los_angle_deg sector preamble_index` with type
// S or M; stationary lines ignore the last two columns and mobile lines ignore the angle. Lines
// starting with '#' are comments.
Registry load_registry(std::istream &is, int sectors, RMat mobile_codebook, int delay_guard);
void save_registry(std::ostream &os, const Registry &registry);

struct StationaryMatch
{
    std::map<int, int> cluster_to_user; // cluster index -> stationary user id
    std::vector<int> unmatched;         // cluster indices left for mobile matching
    std::vector<int> contested;         // clusters that lost a user to a nearer cluster
};

// Nearest registered LoS angle within tol; a user is claimed by at most one cluster, the nearest one.
StationaryMatch match_stationary(const std::vector<AngleOfArrival> &los, const Registry &registry, double tol,
                                 MatchDomain domain = MatchDomain::Angle);

struct MobileDecision
{
    int cluster = -1;
    int sector = -1;
    int preamble_index = -1;
    double correlation = 0.0;
    bool on_boundary = false;
    bool identified = false;          // correlation reached the threshold
    std::vector<int> candidates;      // users sharing the slot
};

// Best codebook column by correlation, allowing cyclic shifts of up to delay_guard samples.
// `phi` must already carry the integer part of the estimated delay (see delay_aligned_preamble).
std::pair<int, double> best_codebook_column(const RVec &phi, const RMat &codebook, int delay_guard);

// Moves the rounded phase-ramp slope of `e` back into the preamble as a cyclic shift.
RVec delay_aligned_preamble(const RVec &phi, const CVec &e);

std::vector<MobileDecision> match_mobile(const std::vector<int> &clusters, const std::vector<AngleOfArrival> &los,
                                         const AmEstimate &am, const Registry &registry, double corr_threshold);

struct DetectionReport
{
    std::set<int> est_active;
    std::set<int> est_active_stationary;
    std::set<int> est_active_mobile;
    std::set<MobileSlot> mobile_slots; // detected mobile slots
    ClusterResult clusters;
    std::vector<AngleOfArrival> los; // per cluster, after gain-based reselection
    AmEstimate am;
    std::map<int, int> cluster_user;  // cluster -> stationary user id
    std::vector<MobileDecision> mobile;
    std::vector<int> unmatched;       // clusters neither stationary nor identified mobile
    bool solver_converged = true;
    bool am_converged = true;
    int solver_iterations = 0;
};

struct Metrics
{
    double p_d = 0.0, p_fa = 0.0;
    double p_d_s = 0.0, p_fa_s = 0.0;
    double p_d_m = 0.0, p_fa_m = 0.0;
    bool no_active = false;   // some detection ratio had an empty active population, set to 1
    bool no_inactive = false; // some false-alarm ratio had an empty inactive population, set to 0
};

// Single-trial ratios from explicit sets; populations are the total counts per class.
Metrics compute_metrics(const std::set<int> &truth_s, const std::set<int> &est_s, int k_s, const std::set<int> &truth_m,
                        const std::set<int> &est_m, int k_m);

// A detected mobile slot stands for whichever candidate holds it in the current block: the active
// candidate when there is one, otherwise the lowest id, which then counts as a false alarm.
Metrics compute_metrics(const DetectionReport &report, const Scenario &truth);

// Plain set version: p_d = |S n S^| / |S|, p_fa = |S^ \ S| / (K - |S|).
Metrics compute_metrics(const std::set<int> &truth, const std::set<int> &est, int k);

} // namespace bagod
