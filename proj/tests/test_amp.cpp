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

#include "bagod/amp.hpp"

#include <Eigen/QR>

#include <algorithm>

using namespace bagod;

namespace
{

CMat random_unitary(int n, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMat a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a(i) = cd(g(rng), g(rng));
    Eigen::HouseholderQR<CMat> qr(a);
    return qr.householderQ() * CMat::Identity(n, n);
}

CMat sparse_rows(int k, int m, const std::vector<int> &active, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CMat h = CMat::Zero(k, m);
    for (int i : active)
        for (int j = 0; j < m; ++j)
            h(i, j) = cd(g(rng), g(rng));
    return h;
}

ScenarioConfig amp_scenario(int k_a)
{
    ScenarioConfig c;
    c.n = 64;
    c.t = 8;
    c.k_s = 100;
    c.k_m = 0;
    c.k_as = k_a;
    c.k_am = 0;
    c.snr_db = 20.0;
    c.tau_max = 1;
    return c;
}

std::vector<int> active_ids(const Scenario &sc)
{
    std::vector<int> ids;
    for (const auto &u : sc.users)
        if (u.active)
            ids.push_back(u.user_id);
    return ids;
}

} // namespace

TEST_CASE("gaussian pilots: unit columns, reproducible, seed dependent")
{
    const CMat p = gaussian_pilots(8, 50, 3);
    CHECK(p.rows() == 8);
    CHECK(p.cols() == 50);
    for (Eigen::Index k = 0; k < p.cols(); ++k)
        CHECK(std::abs(p.col(k).norm() - 1.0) < 1e-12);
    CHECK((gaussian_pilots(8, 50, 3) - p).norm() == 0.0);
    CHECK((gaussian_pilots(8, 50, 4) - p).norm() > 0.0);
    CHECK_THROWS_AS(gaussian_pilots(0, 5, 1), std::invalid_argument);
}

TEST_CASE("orthogonal pilots, noiseless: exact support")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        const CMat p = random_unitary(16, seed);
        const std::vector<int> truth{1, 7, 12};
        const CMat y = p * sparse_rows(16, 8, truth, seed + 100);
        for (auto decision : {AmpDecision::TopK, AmpDecision::Threshold})
        {
            AmpConfig cfg;
            cfg.decision = decision;
            const AmpResult r = amp_detect(y, p, {3.0 / 16.0, 1.0}, 0.0, 3, cfg);
            CHECK(r.active == truth);
            CHECK_FALSE(r.diverged);
            CHECK(r.statistic.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("no active users: empty decision under the threshold rule")
{
    const CMat p = gaussian_pilots(8, 40, 2);
    Rng rng = make_rng(6);
    std::normal_distribution<double> g(0.0, 0.01);
    CMat y(8, 16);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y(i) = cd(g(rng), g(rng));
    AmpConfig cfg;
    cfg.decision = AmpDecision::Threshold;
    const AmpResult r = amp_detect(y, p, {0.05, 1.0}, 2e-4, 0, cfg);
    CHECK(r.active.empty());
    CHECK(amp_detect(y, p, {0.05, 1.0}, 2e-4, 0).active.empty());
}

TEST_CASE("first iteration statistic is the matched filter")
{
    const Scenario sc = generate_scenario(amp_scenario(1), 21);
    const CMat p = gaussian_pilots(8, sc.k(), 21);
    const AmpSignal s = synthesize_amp_signal(sc, p, 21);
    AmpConfig one;
    one.max_iter = 1;
    const AmpResult r = amp_detect(s.y, p, {0.01, s.beta}, s.noise_var, 1, one);
    const CMat mf = p.adjoint() * s.y;
    for (Eigen::Index k = 0; k < p.cols(); ++k)
        CHECK(r.statistic(k) == doctest::Approx(mf.row(k).squaredNorm()).epsilon(1e-12));

    // a single active user at 20 dB has the largest statistic, with and without iterating
    const int who = active_ids(sc).front();
    Eigen::Index top = 0;
    r.statistic.maxCoeff(&top);
    CHECK(top == who);
    const AmpResult full = amp_detect(s.y, p, {0.01, s.beta}, s.noise_var, 1);
    CHECK(full.active == std::vector<int>{who});
}

TEST_CASE("damping keeps the residual bounded")
{
    const Scenario sc = generate_scenario(amp_scenario(3), 5);
    const CMat p = gaussian_pilots(8, sc.k(), 5);
    const AmpSignal s = synthesize_amp_signal(sc, p, 5);
    AmpConfig cfg;
    cfg.damping = 0.5;
    const AmpResult r = amp_detect(s.y, p, {0.03, s.beta}, s.noise_var, 3, cfg);
    CHECK_FALSE(r.diverged);
    REQUIRE_FALSE(r.residual_history.empty());
    const double last = r.residual_history.back();
    WARN(last <= r.residual_history.front() * (1.0 + 1e-9));
    CHECK(last <= 10.0 * s.y.norm());
}

TEST_CASE("invalid parameters are rejected")
{
    const CMat p = gaussian_pilots(4, 10, 1);
    const CMat y = CMat::Ones(4, 3);
    CHECK_THROWS_AS(amp_detect(y, gaussian_pilots(5, 10, 1), {}, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(amp_detect(y, p, {0.0, 1.0}, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(amp_detect(y, p, {1.0, 1.0}, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(amp_detect(y, p, {0.1, 0.0}, 0.1, 1), std::invalid_argument);
    AmpConfig cfg;
    cfg.damping = 0.0;
    CHECK_THROWS_AS(amp_detect(y, p, {0.1, 1.0}, 0.1, 1, cfg), std::invalid_argument);
    cfg.damping = 1.5;
    CHECK_THROWS_AS(amp_detect(y, p, {0.1, 1.0}, 0.1, 1, cfg), std::invalid_argument);
    Scenario sc = generate_scenario(amp_scenario(1), 1);
    CHECK_THROWS_AS(synthesize_amp_signal(sc, p, 1), std::invalid_argument);
}

TEST_CASE("divergence guard stops the run and raises the flag")
{
    const Scenario sc = generate_scenario(amp_scenario(3), 9);
    const CMat p = gaussian_pilots(8, sc.k(), 9);
    const AmpSignal s = synthesize_amp_signal(sc, p, 9);
    AmpConfig cfg;
    cfg.divergence_factor = 1e-9;
    const AmpResult r = amp_detect(s.y, p, {0.03, s.beta}, s.noise_var, 3, cfg);
    CHECK(r.diverged);
    CHECK(r.iterations == 0);
    CHECK(r.active.size() == 3);
}

TEST_CASE("gaussian pilots at 20 dB: top-K detection rate")
{
    double hits = 0.0;
    const int trials = 20;
    for (int i = 0; i < trials; ++i)
    {
        const auto seed = static_cast<std::uint64_t>(1000 + i);
        const Scenario sc = generate_scenario(amp_scenario(3), seed);
        const CMat p = gaussian_pilots(8, sc.k(), seed);
        const AmpSignal s = synthesize_amp_signal(sc, p, seed);
        const AmpResult r = amp_detect(s.y, p, {0.03, s.beta}, s.noise_var, 3);
        const auto truth = active_ids(sc);
        for (int id : r.active)
            hits += std::ranges::binary_search(truth, id);
    }
    CHECK(hits / (3.0 * trials) >= 0.9);
}
