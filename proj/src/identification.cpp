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

#include "bagod/identification.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bagod
{

double match_distance(double a, double b, MatchDomain domain) noexcept
{
    return domain == MatchDomain::Angle ? std::abs(a - b) : std::abs(std::cos(a) - std::cos(b));
}

void Registry::validate(double tol, MatchDomain domain) const
{
    if (sectors < 1)
        throw std::invalid_argument("registry: sectors must be positive");
    if (delay_guard < 0)
        throw std::invalid_argument("registry: negative delay guard");
    std::vector<double> los;
    for (const auto &[id, a] : stationary)
        los.push_back(a.radians());
    std::ranges::sort(los);
    for (std::size_t i = 1; i < los.size(); ++i)
        if (match_distance(los[i], los[i - 1], domain) < 2.0 * tol)
            throw std::invalid_argument("registry: stationary LoS angles closer than twice the matching tolerance");
    if (mobile_codebook.size() > 0)
    {
        const RMat gram = mobile_codebook.transpose() * mobile_codebook;
        if (!gram.isIdentity(1e-9))
            throw std::invalid_argument("registry: codebook columns are not orthonormal");
        if (mobile_codebook.minCoeff() < 0.0)
            throw std::invalid_argument("registry: codebook has negative entries");
    }
    for (const auto &[slot, ids] : mobile_assignment)
    {
        if (slot.first < 0 || slot.first >= sectors || slot.second < 0 || slot.second >= mobile_codebook.cols())
            throw std::invalid_argument("registry: mobile slot out of range");
        for (int id : ids)
            if (stationary.contains(id))
                throw std::invalid_argument("registry: user registered both as stationary and mobile");
    }
}

int Registry::k_total() const
{
    std::size_t n = stationary.size();
    for (const auto &[slot, ids] : mobile_assignment)
        n += ids.size();
    return static_cast<int>(n);
}

double Registry::default_cos_tol() const
{
    std::vector<double> los;
    for (const auto &[id, a] : stationary)
        los.push_back(a.radians());
    return stationary_cos_tolerance(los);
}

Registry registry_from_scenario(const Scenario &scenario)
{
    Registry r;
    r.sectors = scenario.sectors;
    r.mobile_codebook = scenario.mobile_codebook;
    r.delay_guard = static_cast<int>(std::ceil(scenario.tau_max - 1e-12));
    for (const auto &u : scenario.users)
    {
        if (u.mobility == Mobility::Stationary)
            r.stationary.emplace(u.user_id, u.channel.los());
        else
            r.mobile_assignment[{u.sector, u.preamble_index}].push_back(u.user_id);
    }
    for (auto &[slot, ids] : r.mobile_assignment)
        std::ranges::sort(ids);
    return r;
}

Registry load_registry(std::istream &is, int sectors, RMat mobile_codebook, int delay_guard)
{
    Registry r;
    r.sectors = sectors;
    r.mobile_codebook = std::move(mobile_codebook);
    r.delay_guard = delay_guard;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line))
    {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream ls(line);
        int id = 0, sector = -1, index = -1;
        std::string type;
        double deg = 0.0;
        if (!(ls >> id >> type >> deg >> sector >> index))
            throw std::invalid_argument("registry: malformed line " + std::to_string(line_no));
        if (type == "S")
        {
            if (!r.stationary.emplace(id, AngleOfArrival::from_degrees(deg)).second)
                throw std::invalid_argument("registry: duplicate user id on line " + std::to_string(line_no));
        }
        else if (type == "M")
        {
            r.mobile_assignment[{sector, index}].push_back(id);
        }
        else
        {
            throw std::invalid_argument("registry: unknown user type on line " + std::to_string(line_no));
        }
    }
    for (auto &[slot, ids] : r.mobile_assignment)
        std::ranges::sort(ids);
    return r;
}

void save_registry(std::ostream &os, const Registry &registry)
{
    os << "# user_id type los_angle_deg sector preamble_index\n";
    os.precision(17);
    for (const auto &[id, a] : registry.stationary)
        os << id << " S " << a.degrees() << " -1 -1\n";
    for (const auto &[slot, ids] : registry.mobile_assignment)
        for (int id : ids)
            os << id << " M 0 " << slot.first << ' ' << slot.second << '\n';
}

StationaryMatch match_stationary(const std::vector<AngleOfArrival> &los, const Registry &registry, double tol,
                                 MatchDomain domain)
{
    StationaryMatch out;
    // best claim per user: (distance, cluster)
    std::map<int, std::pair<double, int>> claims;
    std::vector<int> wanted(los.size(), -1);
    std::vector<std::pair<double, int>> ref;
    for (const auto &[id, a] : registry.stationary)
        ref.emplace_back(a.radians(), id);
    std::ranges::sort(ref);
    std::vector<double> ref_angles;
    std::vector<int> ref_ids;
    for (const auto &[a, id] : ref)
    {
        ref_angles.push_back(a);
        ref_ids.push_back(id);
    }
    for (std::size_t c = 0; c < los.size(); ++c)
    {
        const double th = los[c].radians();
        const auto it = std::ranges::lower_bound(ref_angles, th);
        double best = std::numeric_limits<double>::infinity();
        int best_id = -1;
        for (auto cand : {it, it == ref_angles.begin() ? it : std::prev(it)})
        {
            if (cand == ref_angles.end())
                continue;
            const double d = match_distance(*cand, th, domain);
            const int id = ref_ids[static_cast<std::size_t>(cand - ref_angles.begin())];
            if (d < best || (d == best && id < best_id))
            {
                best = d;
                best_id = id;
            }
        }
        if (best_id < 0 || best > tol)
            continue;
        wanted[c] = best_id;
        const auto prev = claims.find(best_id);
        const std::pair<double, int> mine{best, static_cast<int>(c)};
        if (prev == claims.end() || mine < prev->second)
            claims[best_id] = mine;
    }
    for (std::size_t c = 0; c < los.size(); ++c)
    {
        const int id = wanted[c];
        if (id >= 0 && claims[id].second == static_cast<int>(c))
        {
            out.cluster_to_user[static_cast<int>(c)] = id;
            continue;
        }
        if (id >= 0)
            out.contested.push_back(static_cast<int>(c));
        out.unmatched.push_back(static_cast<int>(c));
    }
    return out;
}

std::pair<int, double> best_codebook_column(const RVec &phi, const RMat &codebook, int delay_guard)
{
    int best = -1;
    double corr = 0.0;
    const double norm = phi.norm();
    if (!(norm > 0.0) || codebook.cols() == 0)
        return {best, corr};
    for (int s = 0; s <= delay_guard; ++s)
    {
        const RVec back = circular_shift(phi, -s) / norm;
        for (Eigen::Index p = 0; p < codebook.cols(); ++p)
        {
            const double c = std::abs(back.dot(codebook.col(p)));
            if (c > corr + 1e-12)
            {
                corr = c;
                best = static_cast<int>(p);
            }
        }
    }
    return {best, corr};
}

RVec delay_aligned_preamble(const RVec &phi, const CVec &e)
{
    const auto t = static_cast<int>(phi.size());
    if (t == 0)
        return phi;
    const int shift = static_cast<int>(std::lround(estimate_delay(e))) % t;
    return circular_shift(phi, shift);
}

std::vector<MobileDecision> match_mobile(const std::vector<int> &clusters, const std::vector<AngleOfArrival> &los,
                                         const AmEstimate &am, const Registry &registry, double corr_threshold)
{
    std::vector<MobileDecision> out;
    for (int c : clusters)
    {
        const auto cc = static_cast<std::size_t>(c);
        if (cc >= los.size() || c >= am.users())
            throw std::out_of_range("match_mobile: cluster index out of range");
        MobileDecision d;
        d.cluster = c;
        d.sector = sector_of(los[cc].radians(), registry.sectors, &d.on_boundary);
        const RVec phi = delay_aligned_preamble(am.preambles.col(c), am.delay_gain[cc]);
        std::tie(d.preamble_index, d.correlation) = best_codebook_column(phi, registry.mobile_codebook, registry.delay_guard);
        if (d.preamble_index >= 0 && d.correlation >= corr_threshold)
        {
            const auto it = registry.mobile_assignment.find({d.sector, d.preamble_index});
            if (it != registry.mobile_assignment.end() && !it->second.empty())
            {
                d.candidates = it->second;
                d.identified = true;
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

namespace
{

double detection_ratio(const std::set<int> &truth, const std::set<int> &est, bool &flag)
{
    if (truth.empty())
    {
        flag = true;
        return 1.0;
    }
    std::size_t hit = 0;
    for (int id : est)
        hit += truth.contains(id);
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double false_alarm_ratio(const std::set<int> &truth, const std::set<int> &est, int population, bool &flag)
{
    const int inactive = population - static_cast<int>(truth.size());
    if (inactive <= 0)
    {
        flag = true;
        return 0.0;
    }
    std::size_t miss = 0;
    for (int id : est)
        miss += !truth.contains(id);
    return static_cast<double>(miss) / static_cast<double>(inactive);
}

} // namespace

Metrics compute_metrics(const std::set<int> &truth, const std::set<int> &est, int k)
{
    Metrics m;
    m.p_d = detection_ratio(truth, est, m.no_active);
    m.p_fa = false_alarm_ratio(truth, est, k, m.no_inactive);
    m.p_d_s = m.p_d;
    m.p_fa_s = m.p_fa;
    m.p_d_m = 1.0;
    m.p_fa_m = 0.0;
    return m;
}

Metrics compute_metrics(const std::set<int> &truth_s, const std::set<int> &est_s, int k_s, const std::set<int> &truth_m,
                        const std::set<int> &est_m, int k_m)
{
    Metrics m;
    std::set<int> truth = truth_s, est = est_s;
    truth.insert(truth_m.begin(), truth_m.end());
    est.insert(est_m.begin(), est_m.end());
    m.p_d = detection_ratio(truth, est, m.no_active);
    m.p_fa = false_alarm_ratio(truth, est, k_s + k_m, m.no_inactive);
    m.p_d_s = detection_ratio(truth_s, est_s, m.no_active);
    m.p_fa_s = false_alarm_ratio(truth_s, est_s, k_s, m.no_inactive);
    m.p_d_m = detection_ratio(truth_m, est_m, m.no_active);
    m.p_fa_m = false_alarm_ratio(truth_m, est_m, k_m, m.no_inactive);
    return m;
}

Metrics compute_metrics(const DetectionReport &report, const Scenario &truth)
{
    std::set<int> truth_s, truth_m;
    for (const auto &u : truth.users)
        if (u.active)
            (u.mobility == Mobility::Stationary ? truth_s : truth_m).insert(u.user_id);

    std::set<int> est_m;
    for (const auto &d : report.mobile)
    {
        if (!d.identified || d.candidates.empty())
            continue;
        int pick = d.candidates.front();
        for (int id : d.candidates)
            if (truth_m.contains(id))
            {
                pick = id;
                break;
            }
        est_m.insert(pick);
    }
    return compute_metrics(truth_s, report.est_active_stationary, truth.k_total(Mobility::Stationary), truth_m, est_m,
                           truth.k_total(Mobility::Mobile));
}

} // namespace bagod
