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

#include "bagod/detector.hpp"
#include "bagod/spectrum.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace bagod;

namespace
{

std::vector<int> all_rows(int n)
{
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = i;
    return v;
}

// Problem and solution shells that carry a chosen dual variable.
std::pair<SdpProblem, SdpSolution> with_dual(const CMat &v, std::vector<int> omega, int n)
{
    SdpProblem p;
    p.n = n;
    p.t = static_cast<int>(v.cols());
    p.omega = std::move(omega);
    p.y = CMat::Zero(v.rows(), v.cols());
    p.c1 = 1.0 / std::sqrt(static_cast<double>(n));
    SdpSolution s;
    s.v = v;
    s.q = CMat::Identity(n, n) / static_cast<double>(n);
    return {p, s};
}

AngularSpectrum synthetic(const std::vector<double> &centers, const std::vector<double> &heights, int size)
{
    AngularSpectrum s;
    s.grid = uniform_theta_grid(size);
    s.values = RVec::Zero(size);
    for (int i = 0; i < size; ++i)
        for (std::size_t k = 0; k < centers.size(); ++k)
            s.values(i) += heights[k] * std::exp(-std::pow((s.grid(i) - centers[k]) / 0.02, 2));
    return s;
}

std::vector<Peak> peaks_at(std::initializer_list<double> degrees)
{
    std::vector<Peak> p;
    double v = 1.0;
    for (double d : degrees)
        p.push_back({AngleOfArrival::from_degrees(d), v += 0.1});
    return p;
}

} // namespace

TEST_CASE("zero dual variable gives a zero spectrum and no peaks")
{
    auto [p, s] = with_dual(CMat::Zero(8, 2), all_rows(8), 8);
    const AngularSpectrum spec = eval_dual_polynomial(s, p, 512);
    CHECK(spec.values.maxCoeff() == 0.0);
    CHECK(find_peaks(spec, 0.5).empty());
}

TEST_CASE("rank-one dual variable peaks at its angle with the row norm")
{
    const ArrayConfig cfg{16, 0.5};
    const RVec grid = uniform_theta_grid(4096);
    const double th = grid(1500);
    CVec u(2);
    u << cd(0.3, -0.4), cd(1.2, 0.0);
    auto [p, s] = with_dual(steering_vector(cfg, AngleOfArrival(th)) * u.adjoint(), all_rows(16), 16);
    const AngularSpectrum spec = eval_dual_polynomial(s, p, 4096);
    Eigen::Index best;
    spec.values.maxCoeff(&best);
    CHECK(best == 1500);
    CHECK(spec.values(best) == doctest::Approx(u.norm()).epsilon(1e-12));
    const auto peaks = find_peaks(spec, 0.5);
    REQUIRE(peaks.size() == 1);
    CHECK(std::abs(peaks[0].angle.radians() - th) < pi / 4096);
}

TEST_CASE("fast evaluation matches the direct sum on random duals")
{
    Rng rng = make_rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::vector<int> rows{0, 2, 3, 7, 9};
    CMat v(5, 3);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 3; ++j)
            v(i, j) = cd(g(rng), g(rng));
    auto [p, s] = with_dual(v, rows, 12);
    const AngularSpectrum spec = eval_dual_polynomial(s, p, 1024);
    REQUIRE(spec.grid.size() == 1024);
    for (Eigen::Index i = 0; i < 1024; ++i)
    {
        CVec q = CVec::Zero(3);
        for (std::size_t r = 0; r < rows.size(); ++r)
        {
            const cd a = std::polar(1.0 / std::sqrt(12.0), -pi * rows[r] * std::cos(spec.grid(i)));
            q += std::conj(a) * v.row(static_cast<Eigen::Index>(r)).transpose();
        }
        CHECK(std::abs(spec.values(i) - q.norm()) <= 1e-10);
    }
    for (Eigen::Index i = 1; i < spec.grid.size(); ++i)
        CHECK(spec.grid(i) > spec.grid(i - 1));
}

TEST_CASE("peak finding on constructed spectra")
{
    const auto one = find_peaks(synthetic({1.2}, {1.0}, 2048), 0.5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].angle.radians() == doctest::Approx(1.2).epsilon(1e-4));

    const auto two = find_peaks(synthetic({1.0, 1.6}, {1.0, 1.0}, 2048), 0.5);
    CHECK(two.size() == 2);
    // the weak lobe falls under the relative threshold
    CHECK(find_peaks(synthetic({1.0, 1.6}, {1.0, 0.3}, 2048), 0.5).size() == 1);
    CHECK(find_peaks(synthetic({1.0, 1.6}, {1.0, 0.3}, 2048), 0.2).size() == 2);

    AngularSpectrum flat;
    flat.grid = uniform_theta_grid(64);
    flat.values = RVec::Zero(64);
    CHECK(find_peaks(flat, 0.5).empty());
    CHECK_THROWS_AS(find_peaks(flat, 1.5), std::invalid_argument);
}

TEST_CASE("two steering lobes separated by more than 1/N give two peaks")
{
    const int n = 32;
    const ArrayConfig cfg{n, 0.5};
    const double c0 = 0.1, c1 = c0 + 3.0 / n;
    CMat v = steering_vector(cfg, AngleOfArrival(std::acos(c0))) * CVec::Ones(1).adjoint();
    v += steering_vector(cfg, AngleOfArrival(std::acos(c1))) * CVec::Ones(1).adjoint();
    auto [p, s] = with_dual(v, all_rows(n), n);
    const auto peaks = find_peaks(eval_dual_polynomial(s, p, 8192), 0.9);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0].angle.cosine() - c1) < 0.01);
    CHECK(std::abs(peaks[1].angle.cosine() - c0) < 0.01);
}

TEST_CASE("peak count never exceeds the number of strict local maxima")
{
    Rng rng = make_rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AngularSpectrum s;
    s.grid = uniform_theta_grid(500);
    s.values.resize(500);
    for (int i = 0; i < 500; ++i)
        s.values(i) = u(rng);
    int maxima = 0;
    for (int i = 1; i + 1 < 500; ++i)
        maxima += s.values(i) > s.values(i - 1) && s.values(i) > s.values(i + 1);
    CHECK(static_cast<int>(find_peaks(s, 0.01, false).size()) <= maxima + 2);
}

TEST_CASE("clustering splits at jump points")
{
    const double gap = 5.0 * pi / 180.0;
    const ClusterResult r = cluster_angles(peaks_at({10, 11, 12, 50, 51}), gap);
    CHECK(r.k_hat == 2);
    CHECK(r.l_hat == std::vector<int>{3, 2});
    CHECK(r.clusters.size() == 2u);
    // LoS is the strongest peak of each cluster
    CHECK(r.los_angle[0].degrees() == doctest::Approx(12.0));
    CHECK(r.los_angle[1].degrees() == doctest::Approx(51.0));

    const ClusterResult single = cluster_angles(peaks_at({33}), gap);
    CHECK(single.k_hat == 1);
    CHECK(single.l_hat == std::vector<int>{1});
    const ClusterResult none = cluster_angles({}, gap);
    CHECK(none.k_hat == 0);
    CHECK(none.clusters.empty());
}

TEST_CASE("clustering invariants")
{
    Rng rng = make_rng(4);
    std::uniform_real_distribution<double> u(5.0, 175.0);
    for (int s = 0; s < 50; ++s)
    {
        std::vector<double> deg;
        for (int i = 0; i < 12; ++i)
            deg.push_back(u(rng));
        std::ranges::sort(deg);
        std::vector<Peak> peaks;
        for (double d : deg)
            peaks.push_back({AngleOfArrival::from_degrees(d), 1.0});
        const double gap = 6.0 * pi / 180.0;
        const ClusterResult r = cluster_angles(peaks, gap);
        int total = 0;
        for (std::size_t k = 0; k < r.clusters.size(); ++k)
        {
            CHECK(r.l_hat[k] == static_cast<int>(r.clusters[k].size()));
            CHECK(r.l_hat[k] >= 1);
            total += r.l_hat[k];
            if (k > 0)
                CHECK(r.clusters[k].front().angle.radians() - r.clusters[k - 1].back().angle.radians() > gap);
        }
        CHECK(total == 12);
        CHECK(r.k_hat == static_cast<int>(r.clusters.size()));

        // duplicating a peak next to itself changes no grouping
        std::vector<Peak> dup = peaks;
        dup.insert(dup.begin() + 5, peaks[5]);
        CHECK(cluster_angles(dup, gap).k_hat == r.k_hat);
    }
    CHECK_THROWS_AS(cluster_angles(peaks_at({20, 10}), 0.1), std::invalid_argument);
}

TEST_CASE("default jump threshold")
{
    CHECK(default_gap_threshold(pi / 12, 8192) == doctest::Approx(pi / 6));
    CHECK(default_gap_threshold(1e-5, 1024) == doctest::Approx(4 * pi / 1024));
}

TEST_CASE("spectrum of a feasible solution stays under the bound")
{
    ScenarioConfig c;
    c.n = 16;
    c.t = 2;
    c.k_s = 20;
    c.k_m = 4;
    const Scenario sc = generate_scenario(c, 3);
    const ReceivedSignal sig = synthesize_received(sc, 3);
    const SdpProblem p = build_problem(sig, c.n, 0.0);
    const SdpSolution sol = solve_admm(p);
    const AngularSpectrum spec = eval_dual_polynomial(sol, p, 4096);
    CHECK((spec.values * spec.c1).maxCoeff() <= 1.0 + 1e-3);
    CHECK(spec.normalized().maxCoeff() <= 1.0 + 1e-3);
    CHECK(spec.values.minCoeff() >= 0.0);

    std::ostringstream os;
    write_spectrum(os, spec, true);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "theta value");
    int lines = 0;
    for (std::string line; std::getline(is, line);)
        ++lines;
    CHECK(lines == 4096);
}

TEST_CASE("planted users: clusters match the planted angle sets")
{
    ScenarioConfig c;
    c.n = 32;
    c.t = 2;
    c.k_s = 30;
    c.k_m = 8;
    c.k_as = 2;
    c.k_am = 1;
    c.noise = NoiseKind::None;
    c.snr_db = std::numeric_limits<double>::infinity();
    DetectOptions o;
    o.solver.tolerance = 1e-6;
    o.rel_threshold = 0.99;
    o.refine_sweeps = 0; // angles straight from the spectrum
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
    {
        const Scenario sc = generate_scenario(c, seed);
        const ReceivedSignal sig = synthesize_received(sc, seed);
        const DetectionReport rep = detect(sig, sc.array, registry_from_scenario(sc), 0.0, o);
        REQUIRE(rep.clusters.k_hat == 3);
        std::vector<std::vector<double>> truth;
        for (const auto &u : sc.users)
            if (u.active)
            {
                std::vector<double> a;
                for (const auto &x : u.channel.angles)
                    a.push_back(x.radians());
                std::ranges::sort(a);
                truth.push_back(a);
            }
        std::ranges::sort(truth);
        for (std::size_t k = 0; k < 3; ++k)
        {
            const auto got = rep.clusters.angles(k);
            REQUIRE(got.size() == truth[k].size());
            for (std::size_t l = 0; l < got.size(); ++l)
                CHECK(std::abs(got[l].radians() - truth[k][l]) <= pi / 8192);
        }
    }
}
