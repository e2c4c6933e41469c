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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bagod/array_channel.hpp"

#include <cmath>
#include <limits>

using namespace bagod;

namespace
{

// Direct evaluation of the ULA response, entry by entry.
cd steering_entry(int n, int idx, double d, double theta)
{
    return std::polar(1.0 / std::sqrt(static_cast<double>(n)), -2.0 * pi * d * idx * std::cos(theta));
}

} // namespace

TEST_CASE("steering vector at broadside is flat")
{
    const CVec a = steering_vector({4, 0.5}, AngleOfArrival(pi / 2));
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(a(i) - cd(0.5, 0.0)) < 1e-15);
}

TEST_CASE("steering vector near endfire alternates sign")
{
    const CVec a = steering_vector({2, 0.5}, AngleOfArrival(1e-9));
    CHECK(std::abs(a(0) - cd(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
    CHECK(std::abs(a(1) - cd(-1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
}

TEST_CASE("steering vectors have unit norm and match the entrywise formula")
{
    Rng rng = make_rng(11);
    std::uniform_real_distribution<double> u(1e-6, pi - 1e-6);
    std::uniform_int_distribution<int> nn(2, 128);
    for (int s = 0; s < 1000; ++s)
    {
        const int n = nn(rng);
        const double d = s % 2 ? 0.5 : 0.37;
        const double th = u(rng);
        const CVec a = steering_vector({n, d}, AngleOfArrival(th));
        REQUIRE(a.size() == n);
        CHECK(std::abs(a.norm() - 1.0) < 1e-12);
        for (int i = 0; i < n; i += 7)
            CHECK(std::abs(a(i) - steering_entry(n, i, d, th)) < 1e-12);
    }
}

TEST_CASE("steering matrix stacks steering vectors")
{
    const ArrayConfig cfg{8, 0.5};
    const std::vector<AngleOfArrival> th{AngleOfArrival(0.3), AngleOfArrival(1.9)};
    const CMat a = steering_matrix(cfg, th);
    CHECK((a.col(1) - steering_vector(cfg, th[1])).norm() < 1e-15);
}

TEST_CASE("angle, array and channel invariants")
{
    CHECK_THROWS_AS(AngleOfArrival{0.0}, std::invalid_argument);
    CHECK_THROWS_AS(AngleOfArrival{pi}, std::invalid_argument);
    CHECK_THROWS_AS(AngleOfArrival{std::nan("")}, std::invalid_argument);
    CHECK_THROWS_AS((ArrayConfig{1, 0.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ArrayConfig{8, 0.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((ArrayConfig{2, 0.5}.validate()));

    UserChannel ch;
    ch.angles = {AngleOfArrival(1.0), AngleOfArrival(1.1)};
    ch.gains = {cd(2, 0)};
    ch.spread = {0.95, 1.2};
    CHECK_THROWS_AS(ch.validate(3), std::invalid_argument); // length mismatch
    ch.gains.push_back(cd(0, 1));
    CHECK_NOTHROW(ch.validate(3));
    CHECK_THROWS_AS(ch.validate(1), std::invalid_argument); // more paths than L_max
    ch.spread = {1.05, 1.2};
    CHECK_THROWS_AS(ch.validate(3), std::invalid_argument); // LoS outside its spread
    ch.spread = {0.2, 1.5};
    CHECK_THROWS_AS(ch.validate(3, pi / 12), std::invalid_argument); // spread too wide
}

TEST_CASE("single-path channel is the scaled steering vector")
{
    const ArrayConfig cfg{16, 0.5};
    UserChannel ch;
    ch.angles = {AngleOfArrival(0.8)};
    ch.gains = {cd(1, 0)};
    ch.spread = {0.7, 0.9};
    CHECK((synthesize_channel(cfg, ch) - steering_vector(cfg, ch.angles[0])).norm() < 1e-15);
    ch.gains = {cd(0, 0)};
    CHECK(synthesize_channel(cfg, ch).norm() == 0.0);
}

TEST_CASE("multipath channel matches a scalar loop and is additive in the gains")
{
    const ArrayConfig cfg{24, 0.5};
    Rng rng = make_rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    UserChannel a, b;
    a.angles = b.angles = {AngleOfArrival(1.0), AngleOfArrival(1.08), AngleOfArrival(1.17)};
    a.spread = b.spread = {0.95, 1.2};
    for (int l = 0; l < 3; ++l)
    {
        a.gains.emplace_back(g(rng), g(rng));
        b.gains.emplace_back(g(rng), g(rng));
    }
    const CVec h = synthesize_channel(cfg, a);
    for (int i = 0; i < cfg.n_antennas; ++i)
    {
        cd acc = 0.0;
        for (int l = 0; l < 3; ++l)
            acc += a.gains[static_cast<std::size_t>(l)] *
                   steering_entry(cfg.n_antennas, i, cfg.spacing_ratio, a.angles[static_cast<std::size_t>(l)].radians());
        CHECK(std::abs(h(i) - acc) < 1e-12);
    }
    UserChannel sum = a;
    for (int l = 0; l < 3; ++l)
        sum.gains[static_cast<std::size_t>(l)] += b.gains[static_cast<std::size_t>(l)];
    CHECK((synthesize_channel(cfg, sum) - h - synthesize_channel(cfg, b)).norm() < 1e-12);
}

TEST_CASE("minimum separation on the cosine circle")
{
    auto channel = [](std::initializer_list<double> cosines) {
        UserChannel ch;
        for (double c : cosines)
        {
            ch.angles.emplace_back(std::acos(c));
            ch.gains.emplace_back(1.0, 0.0);
        }
        return ch;
    };
    // the footnote example wraps with period 1; half-wavelength arrays wrap with period 2
    std::vector<UserChannel> one{channel({0.2, 0.8})};
    CHECK(min_separation(one, 1.0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(min_separation(one) == doctest::Approx(0.6).epsilon(1e-12));
    std::vector<UserChannel> single{channel({0.3})};
    CHECK(std::isinf(min_separation(single)));
    std::vector<UserChannel> three{channel({0.0, 0.5, 0.6})};
    CHECK(min_separation(three) == doctest::Approx(0.1).epsilon(1e-12));
    std::vector<UserChannel> wrap{channel({-0.95, 0.95})};
    CHECK(min_separation(wrap) == doctest::Approx(0.1).epsilon(1e-12));
    // paths of different users do not constrain each other
    std::vector<UserChannel> two{channel({0.1, 0.6}), channel({0.11, 0.9})};
    CHECK(min_separation(two) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cos_circle_distance(0.2, 0.8, 1.0) == doctest::Approx(0.4));
    CHECK(cos_circle_distance(0.2, 0.8) == doctest::Approx(0.6));
    CHECK(cos_circle_distance(-1.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("manifold response norms match direct evaluation")
{
    const ArrayConfig cfg{12, 0.5};
    Rng rng = make_rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    CMat x(12, 3);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 3; ++j)
            x(i, j) = cd(g(rng), g(rng));
    const RVec grid = uniform_theta_grid(257);
    const RVec fast = manifold_response_norms(cfg, x, grid);
    for (Eigen::Index i = 0; i < grid.size(); ++i)
    {
        CVec a(12);
        for (int k = 0; k < 12; ++k)
            a(k) = steering_entry(12, k, 0.5, grid(i));
        CHECK(std::abs(fast(i) - (x.adjoint() * a).norm()) < 1e-10);
    }
    CHECK(grid(0) > 0.0);
    CHECK(grid(grid.size() - 1) < pi);
}

TEST_CASE("generated channels respect spread, LoS dominance and separation")
{
    const ArrayConfig cfg{32, 0.5};
    ChannelModel model;
    model.max_paths = 3;
    model.min_cos_separation = 2.0 / 32;
    Rng rng = make_rng(3);
    for (int s = 0; s < 200; ++s)
    {
        const double los = 0.5 + 2.0 * (s / 200.0);
        const UserChannel ch = generate_channel(cfg, model, los, rng);
        REQUIRE(ch.n_paths() >= 1);
        CHECK(ch.los().radians() == doctest::Approx(los));
        CHECK(ch.spread.second - ch.spread.first <= model.spread_width + 1e-12);
        for (std::size_t l = 0; l < ch.n_paths(); ++l)
        {
            CHECK(ch.angles[l].radians() >= ch.spread.first);
            CHECK(ch.angles[l].radians() <= ch.spread.second);
            if (l > 0)
                CHECK(std::abs(ch.gains[l]) < std::abs(ch.gains[0]));
        }
        std::vector<UserChannel> v{ch};
        CHECK(min_separation(v) >= 2.0 / 32 - 1e-12);
        CHECK_NOTHROW(ch.validate(3, model.spread_width));
    }
}
