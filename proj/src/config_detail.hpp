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

#include "bagod/config.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace bagod::detail
{

using json = nlohmann::json;

// Rejects keys outside `allowed` so that typos do not silently fall back to defaults.
void check_keys(const json &obj, const std::set<std::string> &allowed, const std::string &where);

void read_scenario(const json &obj, ScenarioConfig &config);
json write_scenario(const ScenarioConfig &config);

// Numbers that may be written as "inf" / "-inf".
double read_extended_double(const json &v, const std::string &key);
json write_extended_double(double x);

json parse_text(const std::string &text, const std::string &where);
std::string read_file(const std::string &path);

} // namespace bagod::detail
