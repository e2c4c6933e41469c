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

#include "bagod/spectrum.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace bagod
{

std::vector<AngleOfArrival> ClusterResult::angles(std::size_t cluster) const
{
    std::vector<AngleOfArrival> out;
    for (const auto &p : clusters.at(cluster))
        out.push_back(p.angle);
    return out;
}

AngularSpectrum eval_dual_polynomial(const SdpSolution &sol, const SdpProblem &problem, int grid_size,
                                     double spacing_ratio)
{
    if (grid_size < 4 * problem.n)
        throw std::invalid_argument("eval_dual_polynomial: grid must hold at least 4N points");
    AngularSpectrum s;
    s.grid = uniform_theta_grid(grid_size);
    s.c1 = problem.c1;
    s.n = problem.n;
    const CMat a = adjoint_expand(sol.v, problem.omega, problem.n);
    s.values = manifold_response_norms(ArrayConfig{problem.n, spacing_ratio}, a, s.grid);
    return s;
}

std::vector<Peak> find_peaks(const AngularSpectrum &spectrum, double rel_threshold, bool refine)
{
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
        throw std::invalid_argument("find_peaks: rel_threshold must lie in (0, 1)");
    std::vector<Peak> peaks;
    const auto &y = spectrum.values;
    const auto &g = spectrum.grid;
    const Eigen::Index len = y.size();
    if (len < 3)
        return peaks;
    const double top = y.maxCoeff();
    if (!(top > 0.0))
        return peaks;
    const double floor_value = rel_threshold * top;
    for (Eigen::Index i = 1; i + 1 < len; ++i)
    {
        if (!(y(i) > y(i - 1) && y(i) > y(i + 1)) || y(i) < floor_value)
            continue;
        double theta = g(i);
        double value = y(i);
        if (refine)
        {
            const double denom = y(i - 1) - 2.0 * y(i) + y(i + 1);
            if (denom < 0.0)
            {
                const double h = 0.5 * (g(i + 1) - g(i - 1));
                const double off = std::clamp(0.5 * (y(i - 1) - y(i + 1)) / denom, -0.5, 0.5);
                theta += off * h;
                value -= 0.25 * (y(i - 1) - y(i + 1)) * off;
            }
        }
        peaks.push_back({AngleOfArrival(theta), value});
    }
    return peaks;
}

ClusterResult cluster_angles(const std::vector<Peak> &peaks, double gap_threshold)
{
    ClusterResult res;
    if (peaks.empty())
        return res;
    if (!std::ranges::is_sorted(peaks, {}, [](const Peak &p) { return p.angle.radians(); }))
        throw std::invalid_argument("cluster_angles: peaks must be sorted by angle");

    res.clusters.emplace_back();
    res.clusters.back().push_back(peaks.front());
    for (std::size_t i = 1; i < peaks.size(); ++i)
    {
        if (peaks[i].angle.radians() - peaks[i - 1].angle.radians() > gap_threshold)
            res.clusters.emplace_back();
        res.clusters.back().push_back(peaks[i]);
    }
    res.k_hat = static_cast<int>(res.clusters.size());
    for (const auto &c : res.clusters)
    {
        res.l_hat.push_back(static_cast<int>(c.size()));
        const auto best = std::ranges::max_element(c, {}, &Peak::value);
        res.los_angle.push_back(best->angle);
    }
    return res;
}

double default_gap_threshold(double spread_width, int grid_size)
{
    return std::max(2.0 * spread_width, 4.0 * pi / grid_size);
}

void write_spectrum(std::ostream &os, const AngularSpectrum &spectrum, bool normalized)
{
    const RVec vals = normalized ? spectrum.normalized() : spectrum.values;
    os << "theta value\n";
    os << std::setprecision(10);
    for (Eigen::Index i = 0; i < spectrum.grid.size(); ++i)
        os << spectrum.grid(i) << ' ' << vals(i) << '\n';
}

} // namespace bagod
