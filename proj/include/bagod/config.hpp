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

#include <stdexcept>
#include <string>

namespace bagod
{

// Scenario configuration as JSON text. Keys: N, M or omega, T, K_S, K_M, K_aS, K_aM, L_max, snr_db,
// tau_max, zeta, spread_width (radians), seed, plus the generator knobs (spacing_ratio, sectors,
// delay_mode, noise, eta_multiplier, guaranteed_recovery, min_cos_separation, user_gap,
// los_magnitude, random_path_count, preamble_guard, gain_error_users, mobile_clearance).
// snr_db accepts "inf" for a noiseless block. Unknown keys are rejected.
ScenarioConfig parse_scenario_config(const std::string &json_text);
ScenarioConfig load_scenario_config(const std::string &path);
std::string scenario_config_to_json(const ScenarioConfig &config);

// Thrown for malformed or out-of-range configuration.
struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

} // namespace bagod
