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

#include "bagod/array_channel.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bagod
{

void ArrayConfig::validate() const
{
    if (n_antennas < 2)
        throw std::invalid_argument("ArrayConfig: n_antennas must be at least 2");
    if (!(spacing_ratio > 0.0))
        throw std::invalid_argument("ArrayConfig: spacing_ratio must be positive");
}

AngleOfArrival::AngleOfArrival(double theta) : theta_(theta)
{
    if (!(theta > 0.0 && theta < pi))
        throw std::invalid_argument("AngleOfArrival: theta must lie in (0, pi), got " + std::to_string(theta));
}

void UserChannel::validate(int max_paths, double max_spread_width) const
{
    if (angles.empty())
        throw std::invalid_argument("UserChannel: at least one path required");
    if (angles.size() != gains.size())
        throw std::invalid_argument("UserChannel: angles and gains differ in length");
    if (static_cast<int>(angles.size()) > max_paths)
        throw std::invalid_argument("UserChannel: more paths than L_max");
    if (spread.second < spread.first || spread.second - spread.first > max_spread_width + 1e-12)
        throw std::invalid_argument("UserChannel: angular spread too wide");
    for (const auto &a : angles)
        if (a.radians() < spread.first - 1e-12 || a.radians() > spread.second + 1e-12)
            throw std::invalid_argument("UserChannel: path angle outside its spread");
}

CVec steering_vector(const ArrayConfig &config, AngleOfArrival theta)
{
    const int n = config.n_antennas;
    const double phase = -2.0 * pi * config.spacing_ratio * theta.cosine();
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    CVec a(n);
    for (int i = 0; i < n; ++i)
        a(i) = std::polar(norm, phase * i);
    return a;
}

CMat steering_matrix(const ArrayConfig &config, std::span<const AngleOfArrival> angles)
{
    CMat a(config.n_antennas, static_cast<Eigen::Index>(angles.size()));
    for (std::size_t l = 0; l < angles.size(); ++l)
        a.col(static_cast<Eigen::Index>(l)) = steering_vector(config, angles[l]);
    return a;
}

CVec synthesize_channel(const ArrayConfig &config, const UserChannel &channel)
{
    CVec h = CVec::Zero(config.n_antennas);
    for (std::size_t l = 0; l < channel.angles.size(); ++l)
        h += channel.gains[l] * steering_vector(config, channel.angles[l]);
    return h;
}

RVec manifold_response_norms(const ArrayConfig &config, const CMat &x, const RVec &grid)
{
    if (x.rows() != config.n_antennas)
        throw std::invalid_argument("manifold_response_norms: row count differs from N");
    const auto n = x.rows();
    const auto t = x.cols();
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    const CMat xc = x.conjugate();
    RVec out(grid.size());
    std::vector<cd> acc(static_cast<std::size_t>(t));
    for (Eigen::Index g = 0; g < grid.size(); ++g)
    {
        const cd z = std::polar(1.0, -2.0 * pi * config.spacing_ratio * std::cos(grid(g)));
        std::ranges::fill(acc, cd(0.0, 0.0));
        for (Eigen::Index row = n - 1; row >= 0; --row)
            for (Eigen::Index col = 0; col < t; ++col)
                acc[static_cast<std::size_t>(col)] = acc[static_cast<std::size_t>(col)] * z + xc(row, col);
        double s = 0.0;
        for (const auto &v : acc)
            s += std::norm(v);
        out(g) = norm * std::sqrt(s);
    }
    return out;
}

RVec uniform_theta_grid(int size)
{
    if (size < 2)
        throw std::invalid_argument("uniform_theta_grid: need at least two points");
    RVec g(size);
    for (int i = 0; i < size; ++i)
        g(i) = pi * (i + 0.5) / size;
    return g;
}

double cos_circle_distance(double cos_a, double cos_b, double period) noexcept
{
    const double d = std::fmod(std::abs(cos_a - cos_b), period);
    return std::min(d, period - d);
}

double min_separation(std::span<const UserChannel> channels, double period)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto &ch : channels)
        for (std::size_t i = 0; i < ch.angles.size(); ++i)
            for (std::size_t q = i + 1; q < ch.angles.size(); ++q)
                best = std::min(best, cos_circle_distance(ch.angles[i].cosine(), ch.angles[q].cosine(), period));
    return best;
}

UserChannel generate_channel(const ArrayConfig &config, const ChannelModel &model, double los_theta,
                             Rng &rng)
{
    config.validate();
    if (model.max_paths < 1)
        throw std::invalid_argument("ChannelModel: max_paths must be at least 1");
    const double w = model.spread_width;
    const double lo_min = model.edge_margin;
    const double hi_max = pi - model.edge_margin;
    if (los_theta < lo_min || los_theta > hi_max)
        throw std::invalid_argument("generate_channel: LoS angle inside the endfire margin");

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double lo = los_theta - w * unit(rng);
    lo = std::clamp(lo, lo_min, std::max(lo_min, hi_max - w));
    lo = std::min(lo, los_theta);
    const double hi = std::min(lo + w, hi_max);

    int n_paths = model.max_paths;
    if (model.random_path_count)
        n_paths = std::uniform_int_distribution<int>(1, model.max_paths)(rng);

    UserChannel ch;
    ch.spread = {lo, std::max(hi, los_theta)};
    ch.angles.emplace_back(los_theta);
    for (int l = 1; l < n_paths; ++l)
    {
        for (int attempt = 0; attempt < 200; ++attempt)
        {
            const double cand = lo + (ch.spread.second - lo) * unit(rng);
            if (!(cand > 0.0 && cand < pi))
                continue;
            const double c = std::cos(cand);
            const bool separated = std::ranges::all_of(ch.angles, [&](const AngleOfArrival &a)
                                                       { return cos_circle_distance(a.cosine(), c, 1.0 / config.spacing_ratio) >= model.min_cos_separation &&
                                                                a.radians() != cand; });
            if (separated)
            {
                ch.angles.emplace_back(cand);
                break;
            }
        }
    }

    for (std::size_t l = 0; l < ch.angles.size(); ++l)
    {
        const double mag = (l == 0) ? model.los_magnitude : 1.0;
        ch.gains.push_back(std::polar(mag, 2.0 * pi * unit(rng)));
    }
    return ch;
}

} // namespace bagod
