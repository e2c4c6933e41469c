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

#include "config_detail.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bagod
{
namespace detail
{

void check_keys(const json &obj, const std::set<std::string> &allowed, const std::string &where)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    for (const auto &[key, value] : obj.items())
        if (!allowed.contains(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

double read_extended_double(const json &v, const std::string &key)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
    {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf" || s == "-infinity")
            return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError("'" + key + "' must be a number or \"inf\"");
}

json write_extended_double(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return x;
}

namespace
{

template <typename T> T get_as(const json &obj, const char *key)
{
    try
    {
        return obj.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("'") + key + "': " + e.what());
    }
}

int get_int(const json &obj, const char *key)
{
    const auto &v = obj.at(key);
    if (v.is_number_integer())
        return v.get<int>();
    if (v.is_number_float())
    {
        const double d = v.get<double>();
        if (d == std::floor(d) && std::abs(d) < 1e9)
            return static_cast<int>(d);
    }
    throw ConfigError(std::string("'") + key + "' must be an integer");
}

const std::set<std::string> kScenarioKeys = {
    "N", "M", "omega", "T", "K_S", "K_M", "K_aS", "K_aM", "L_max", "snr_db", "tau_max", "zeta",
    "spread_width", "seed", "spacing_ratio", "sectors", "delay_mode", "noise", "eta_multiplier",
    "guaranteed_recovery", "min_cos_separation", "user_gap", "los_magnitude", "random_path_count",
    "preamble_guard", "gain_error_users", "mobile_clearance"};

} // namespace

void read_scenario(const json &obj, ScenarioConfig &c)
{
    check_keys(obj, kScenarioKeys, "scenario");
    auto opt_int = [&](const char *k, int &dst) {
        if (obj.contains(k))
            dst = get_int(obj, k);
    };
    auto opt_double = [&](const char *k, double &dst) {
        if (obj.contains(k))
            dst = read_extended_double(obj.at(k), k);
    };
    auto opt_bool = [&](const char *k, bool &dst) {
        if (obj.contains(k))
            dst = get_as<bool>(obj, k);
    };
    opt_int("N", c.n);
    opt_int("M", c.m);
    if (obj.contains("omega"))
        c.omega = get_as<std::vector<int>>(obj, "omega");
    opt_int("T", c.t);
    opt_int("K_S", c.k_s);
    opt_int("K_M", c.k_m);
    opt_int("K_aS", c.k_as);
    opt_int("K_aM", c.k_am);
    opt_int("L_max", c.l_max);
    opt_double("snr_db", c.snr_db);
    opt_double("tau_max", c.tau_max);
    opt_double("zeta", c.zeta);
    opt_double("spread_width", c.spread_width);
    if (obj.contains("seed"))
        c.seed = get_as<std::uint64_t>(obj, "seed");
    opt_double("spacing_ratio", c.spacing_ratio);
    opt_int("sectors", c.sectors);
    if (obj.contains("delay_mode"))
    {
        const auto s = get_as<std::string>(obj, "delay_mode");
        if (s == "integer")
            c.delay_mode = DelayMode::Integer;
        else if (s == "continuous")
            c.delay_mode = DelayMode::Continuous;
        else
            throw ConfigError("'delay_mode' must be \"integer\" or \"continuous\"");
    }
    if (obj.contains("noise"))
    {
        const auto s = get_as<std::string>(obj, "noise");
        if (s == "gaussian")
            c.noise = NoiseKind::Gaussian;
        else if (s == "uniform")
            c.noise = NoiseKind::Uniform;
        else if (s == "none")
            c.noise = NoiseKind::None;
        else
            throw ConfigError("'noise' must be \"gaussian\", \"uniform\" or \"none\"");
    }
    opt_double("eta_multiplier", c.eta_multiplier);
    opt_bool("guaranteed_recovery", c.guaranteed_recovery);
    opt_double("min_cos_separation", c.min_cos_separation);
    opt_double("user_gap", c.user_gap);
    opt_double("los_magnitude", c.los_magnitude);
    opt_bool("random_path_count", c.random_path_count);
    opt_bool("preamble_guard", c.preamble_guard);
    if (obj.contains("gain_error_users"))
    {
        const auto s = get_as<std::string>(obj, "gain_error_users");
        if (s == "mobile")
            c.gain_error_users = GainErrorUsers::MobileOnly;
        else if (s == "all")
            c.gain_error_users = GainErrorUsers::All;
        else if (s == "none")
            c.gain_error_users = GainErrorUsers::Nobody;
        else
            throw ConfigError("'gain_error_users' must be \"mobile\", \"all\" or \"none\"");
    }
    opt_double("mobile_clearance", c.mobile_clearance);
    try
    {
        c.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(e.what());
    }
}

json write_scenario(const ScenarioConfig &c)
{
    json j;
    j["N"] = c.n;
    j["M"] = c.m; // 0 means all N antennas
    if (!c.omega.empty())
        j["omega"] = c.omega;
    j["T"] = c.t;
    j["K_S"] = c.k_s;
    j["K_M"] = c.k_m;
    j["K_aS"] = c.k_as;
    j["K_aM"] = c.k_am;
    j["L_max"] = c.l_max;
    j["snr_db"] = write_extended_double(c.snr_db);
    j["tau_max"] = c.tau_max;
    j["zeta"] = c.zeta;
    j["spread_width"] = c.spread_width;
    j["seed"] = c.seed;
    j["spacing_ratio"] = c.spacing_ratio;
    j["sectors"] = c.sectors;
    j["delay_mode"] = c.delay_mode == DelayMode::Integer ? "integer" : "continuous";
    j["noise"] = c.noise == NoiseKind::Gaussian ? "gaussian" : c.noise == NoiseKind::Uniform ? "uniform" : "none";
    j["eta_multiplier"] = c.eta_multiplier;
    j["guaranteed_recovery"] = c.guaranteed_recovery;
    j["min_cos_separation"] = c.min_cos_separation; // 0 keeps 2/N per sweep point
    j["user_gap"] = c.user_gap;
    j["los_magnitude"] = c.los_magnitude;
    j["random_path_count"] = c.random_path_count;
    j["preamble_guard"] = c.preamble_guard;
    j["gain_error_users"] = c.gain_error_users == GainErrorUsers::MobileOnly ? "mobile"
                            : c.gain_error_users == GainErrorUsers::All     ? "all"
                                                                            : "none";
    j["mobile_clearance"] = c.mobile_clearance;
    return j;
}

json parse_text(const std::string &text, const std::string &where)
{
    try
    {
        return json::parse(text, nullptr, true, true);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(where + ": " + e.what());
    }
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace detail

ScenarioConfig parse_scenario_config(const std::string &json_text)
{
    ScenarioConfig c;
    detail::read_scenario(detail::parse_text(json_text, "scenario config"), c);
    return c;
}

ScenarioConfig load_scenario_config(const std::string &path)
{
    return parse_scenario_config(detail::read_file(path));
}

std::string scenario_config_to_json(const ScenarioConfig &config)
{
    return detail::write_scenario(config).dump(2);
}

} // namespace bagod
