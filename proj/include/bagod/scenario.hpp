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

#include "bagod/array_channel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bagod
{

enum class Mobility
{
    Stationary,
    Mobile
};

enum class NoiseKind
{
    Gaussian,
    Uniform,
    None
};

enum class DelayMode
{
    Integer,
    Continuous
};

enum class GainErrorUsers
{
    MobileOnly,
    All,
    Nobody
};

struct UserProfile
{
    int user_id = 0;
    Mobility mobility = Mobility::Stationary;
    UserChannel channel;
    RVec preamble;   // time domain, nonnegative, unit norm
    double delay = 0.0;
    RVec gain_error; // per frequency bin, |g| <= zeta
    bool active = false;
    int sector = -1;         // mobile users only
    int preamble_index = -1; // mobile users only, column of the mobile codebook
};

// Everything the generator needs; mirrors the keys of the scenario config file.
struct ScenarioConfig
{
    int n = 32;                  // N antennas
    double spacing_ratio = 0.5;  // d / lambda
    int m = 0;                   // M selected antennas, 0 means M = N
    std::vector<int> omega;      // explicit 0-based antenna subset, overrides m
    int t = 2;                   // T
    int k_s = 100;               // stationary population
    int k_m = 8;                 // mobile population
    int k_as = 2;                // active stationary
    int k_am = 1;                // active mobile
    int l_max = 3;
    double snr_db = 20.0;        // +inf means noiseless
    double tau_max = 1.0;
    double zeta = 0.0;
    double spread_width = pi / 12.0;
    std::uint64_t seed = 1;

    int sectors = 4;
    DelayMode delay_mode = DelayMode::Integer;
    NoiseKind noise = NoiseKind::Gaussian;
    double eta_multiplier = 1.0;
    bool guaranteed_recovery = true; // reject channels with separation <= 1/N
    double min_cos_separation = 0.0; // 0 means 2/N
    double user_gap = 0.0;           // min angle between paths of different active users, 0 means 2.5 * spread_width
    double los_magnitude = 2.0;
    bool random_path_count = true;
    bool preamble_guard = false;     // zero tail of ceil(tau_max) samples on stationary preambles
    GainErrorUsers gain_error_users = GainErrorUsers::MobileOnly;
    double mobile_clearance = 0.0;   // min cos distance of a mobile LoS to stationary LoS angles and sector edges, 0 means auto

    int selected_antennas() const { return omega.empty() ? (m > 0 ? m : n) : static_cast<int>(omega.size()); }
    double resolved_min_cos_separation() const { return min_cos_separation > 0.0 ? min_cos_separation : 2.0 / n; }
    double resolved_user_gap() const { return user_gap > 0.0 ? user_gap : 2.5 * spread_width; }
    int delay_guard() const { return static_cast<int>(std::ceil(tau_max - 1e-12)); }
    void validate() const;
};

// Ground truth of one coherence block.
struct Scenario
{
    ArrayConfig array;
    std::vector<UserProfile> users;
    int t_len = 2;
    double tau_max = 0.0;
    double zeta = 0.0;
    std::vector<int> omega; // 0-based, strictly increasing
    double snr_db = 20.0;
    NoiseKind noise = NoiseKind::Gaussian;
    double eta_multiplier = 1.0;
    int sectors = 4;
    RMat mobile_codebook; // T x P

    int k() const noexcept { return static_cast<int>(users.size()); }
    int k_active() const noexcept;
    int k_active(Mobility m) const noexcept;
    int k_total(Mobility m) const noexcept;
    std::vector<int> active_ids() const;
    double c_e() const noexcept { return 1.0 + zeta; }
    void validate() const;
};

struct ReceivedSignal
{
    CMat y; // M x T
    std::vector<int> omega;
    double noise_bound = 0.0; // eta
    double sigma = 0.0;       // per-entry noise standard deviation used
    double noise_fro = 0.0;   // realized ||Noise||_F
};

struct SynthesisOptions
{
    bool strict = false; // refuse scenarios without active users
};

// Nonnegative orthonormal codebook whose columns stay distinguishable under cyclic shifts up to
// `guard` samples: column p is the canonical vector at index p * (guard + 1).
RMat make_mobile_codebook(int t, int guard);

// Stationary users are told apart by u = cos(theta), where the resolution of a uniform array does
// not depend on the angle. Default tolerance in u: a quarter of the closest registered pair, capped
// at pi / 180.
double stationary_cos_tolerance(const std::vector<double> &los);

// Equal-width sector partition of (0, pi); a boundary angle belongs to the lower sector.
int sector_of(double theta, int sectors, bool *on_boundary = nullptr);

Scenario generate_scenario(const ScenarioConfig &config, std::uint64_t seed);

// exp(j 2 pi delay t / T) * (1 + g[t]).
CVec delay_gain_vector(double delay, const RVec &gain_error, int t_len, double zeta);

// Noiseless contribution h (F phi)^H E of one user over all N antennas.
CMat user_contribution(const Scenario &scenario, const UserProfile &user);

// Sum of active contributions restricted to omega (the signal part X_Omega).
CMat clean_signal(const Scenario &scenario);

ReceivedSignal synthesize_received(const Scenario &scenario, std::uint64_t rng_seed,
                                   const SynthesisOptions &opts = {});

// Same observation built from the cyclic-prefixed, delayed and zero-padded time-domain burst.
// Requires integer delays.
ReceivedSignal time_domain_oracle(const Scenario &scenario, std::uint64_t rng_seed);

// 10 log10(||X||_F^2 / (M T sigma^2)); -inf for a zero signal.
double compute_snr(const CMat &signal_part, double sigma);

} // namespace bagod
