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

#include "bagod/common.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace bagod
{

// Uniform linear array: n_antennas elements, spacing given as a fraction of the wavelength.
struct ArrayConfig
{
    int n_antennas = 64;
    double spacing_ratio = 0.5;

    void validate() const;
};

// Angle of arrival in radians, strictly inside (0, pi).
class AngleOfArrival
{
  public:
    explicit AngleOfArrival(double theta);

    double radians() const noexcept { return theta_; }
    double degrees() const noexcept { return theta_ * 180.0 / pi; }
    double cosine() const noexcept { return std::cos(theta_); }

    static AngleOfArrival from_degrees(double deg) { return AngleOfArrival(deg * pi / 180.0); }

    friend bool operator==(const AngleOfArrival &, const AngleOfArrival &) = default;
    friend auto operator<=>(const AngleOfArrival &, const AngleOfArrival &) = default;

  private:
    double theta_;
};

// Multipath channel of one user. angles[0] is the LoS path.
struct UserChannel
{
    std::vector<AngleOfArrival> angles;
    std::vector<cd> gains;
    std::pair<double, double> spread{0.0, pi}; // (theta_min, theta_max)

    std::size_t n_paths() const noexcept { return angles.size(); }
    const AngleOfArrival &los() const { return angles.front(); }

    // Throws std::invalid_argument when the channel breaks its invariants.
    void validate(int max_paths, double max_spread_width = pi / 12.0) const;
};

// Knobs of the random channel generator.
struct ChannelModel
{
    double spread_width = pi / 12.0;
    int max_paths = 3;           // L_max
    bool random_path_count = true; // L_k uniform in [1, max_paths], else always max_paths
    double min_cos_separation = 0.0; // within one user; 0 disables the check
    double los_magnitude = 2.0;  // NLoS paths have unit magnitude
    double edge_margin = pi / 36.0; // keep spreads away from endfire
};

CVec steering_vector(const ArrayConfig &config, AngleOfArrival theta);

// Array manifold matrix with one steering vector per column.
CMat steering_matrix(const ArrayConfig &config, std::span<const AngleOfArrival> angles);

CVec synthesize_channel(const ArrayConfig &config, const UserChannel &channel);

// ||X^H a(theta)||_2 for every theta in grid, X being N x T. Each column polynomial is evaluated
// by Horner's rule in z = exp(-j 2 pi d cos theta), one complex exponential per grid point.
RVec manifold_response_norms(const ArrayConfig &config, const CMat &x, const RVec &grid);

// Uniform grid of `size` midpoints covering (0, pi).
RVec uniform_theta_grid(int size);

// Wrap-around distance between two cosines. The steering vector is periodic in cos(theta) with
// period lambda / d, which is 2 for half-wavelength spacing.
double cos_circle_distance(double cos_a, double cos_b, double period = 2.0) noexcept;

// Minimum pairwise separation of path cosines over all users; +inf when no user has two paths.
double min_separation(std::span<const UserChannel> channels, double period = 2.0);

// Draws a channel whose LoS angle is los_theta and whose other paths sit in a spread window
// around it. Paths that cannot be placed at the requested separation are dropped.
UserChannel generate_channel(const ArrayConfig &config, const ChannelModel &model, double los_theta,
                             Rng &rng);

} // namespace bagod
