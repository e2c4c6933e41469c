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

#include "bagod/goal_sdp.hpp"
#include "bagod/spectrum.hpp"

#include <cmath>
#include <limits>

using namespace bagod;

namespace
{

CMat random_matrix(Eigen::Index r, Eigen::Index c, Rng &rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CMat x(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            x(i, j) = cd(g(rng), g(rng));
    return x;
}

ReceivedSignal random_signal(int n, int t, Rng &rng, double eta = 1.0)
{
    ReceivedSignal s;
    for (int i = 0; i < n; ++i)
        s.omega.push_back(i);
    s.y = random_matrix(n, t, rng);
    s.noise_bound = eta;
    return s;
}

std::vector<int> all_rows(int n)
{
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = i;
    return v;
}

} // namespace

TEST_CASE("adjoint expansion embeds the selected rows")
{
    Rng rng = make_rng(1);
    const CMat v = random_matrix(3, 2, rng);
    const std::vector<int> full = all_rows(3);
    CHECK((adjoint_expand(v, full, 3) - v).norm() == 0.0);

    const CMat r = random_matrix(1, 2, rng);
    const std::vector<int> mid{1};
    const CMat e = adjoint_expand(r, mid, 3);
    CHECK(e.row(0).norm() == 0.0);
    CHECK((e.row(1) - r.row(0)).norm() == 0.0);
    CHECK(e.row(2).norm() == 0.0);

    const std::vector<int> rows{0, 2, 5};
    const CMat w = random_matrix(3, 4, rng);
    CHECK((select_rows(adjoint_expand(w, rows, 7), rows) - w).norm() == 0.0);
    const std::vector<int> bad{0, 9};
    CHECK_THROWS(adjoint_expand(random_matrix(2, 1, rng), bad, 4));
}

TEST_CASE("problem construction: gamma = 1/eta and c1 = C_e / (min beta sqrt(N))")
{
    Rng rng = make_rng(2);
    const ReceivedSignal s = random_signal(64, 2, rng, 0.1);
    const SdpProblem p = build_problem(s, 64, 0.0);
    CHECK(p.gamma == doctest::Approx(10.0));
    CHECK(p.c1 == doctest::Approx(1.0 / 8.0));
    CHECK(build_problem(s, 64, 0.5).c1 == doctest::Approx(1.5 / 8.0));
    const std::vector<double> beta{2.0, 2.0, 2.0};
    CHECK(build_problem(s, 64, 0.0, beta).c1 == doctest::Approx(1.0 / 16.0));
    const std::vector<double> mixed{2.0, 0.5};
    CHECK(build_problem(s, 64, 0.0, mixed).c1 == doctest::Approx(1.0 / 4.0));

    ReceivedSignal quiet = s;
    quiet.noise_bound = 0.0;
    CHECK(build_problem(quiet, 64, 0.0, {}, 1e-3).gamma == doctest::Approx(1e3));
}

TEST_CASE("Toeplitz constraint set")
{
    const ToeplitzConstraintSet set(5);
    CHECK((set.basis(0) - RMat::Identity(5, 5)).norm() == 0.0);
    CHECK(set.basis(2)(3, 1) == 1.0);
    CHECK(set.basis(2).sum() == 3.0);

    Rng rng = make_rng(3);
    CMat w = random_matrix(5, 5, rng);
    w = (w + w.adjoint()).eval();
    const CVec sums = set.evaluate(w);
    CHECK(std::abs(sums(4) - w.trace()) < 1e-12); // index q + N - 1 with q = 0

    const CMat p = set.project(w);
    CHECK(set.max_violation(p) < 1e-12);
    CHECK((p - p.adjoint()).norm() < 1e-12);
    CHECK((set.project(p) - p).norm() < 1e-12);
    // nearest point of an affine set: the correction is orthogonal to every feasible direction
    for (int s = 0; s < 5; ++s)
    {
        CMat z = random_matrix(5, 5, rng);
        z = set.project((z + z.adjoint()).eval());
        CHECK(std::abs((w - p).cwiseProduct((z - p).conjugate()).sum().real()) < 1e-10);
    }
    CHECK(set.max_violation(CMat::Identity(5, 5) / 5.0) < 1e-15);
}

TEST_CASE("PSD projection")
{
    Rng rng = make_rng(4);
    CMat a = random_matrix(6, 6, rng);
    a = (a + a.adjoint()).eval();
    const CMat p = project_psd(a);
    Eigen::SelfAdjointEigenSolver<CMat> es(p);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK((project_psd(p) - p).norm() < 1e-10);
}

TEST_CASE("zero observation: V = 0 and Q = I/N are optimal")
{
    ReceivedSignal s;
    s.omega = all_rows(8);
    s.y = CMat::Zero(8, 2);
    s.noise_bound = 1.0;
    const SdpProblem p = build_problem(s, 8, 0.0);
    const SdpSolution a = solve_admm(p, SolverOptions{.tolerance = 1e-8});
    CHECK(a.converged);
    CHECK(a.v.norm() < 1e-8);
    CHECK(std::abs(a.objective) < 1e-12);
    const auto f = check_feasibility(a, p, 512);
    CHECK(f.feasible(1e-8));
    const SdpSolution r = solve_reference(p);
    CHECK(std::abs(r.objective) < 1e-12);

    SdpSolution manual;
    manual.v = CMat::Zero(8, 2);
    manual.q = CMat::Identity(8, 8) / 8.0;
    const auto m = check_feasibility(manual, p, 512);
    CHECK(m.schur_min_eigenvalue >= 0.0);
    CHECK(m.toeplitz_violation == doctest::Approx(0.0));
    CHECK(m.grid_max == 0.0);
}

TEST_CASE("ADMM agrees with the primal-dual reference on small instances")
{
    Rng rng = make_rng(5);
    for (int s = 0; s < 6; ++s)
    {
        const int n = 4 + 2 * s;
        const int t = 1 + s % 4;
        ReceivedSignal sig = random_signal(n, t, rng, 0.5 + 0.3 * s);
        if (s % 2)
        {
            sig.omega = {0, 1, 3, n - 1};
            sig.y = random_matrix(4, t, rng);
        }
        const SdpProblem p = build_problem(sig, n, s % 3 ? 0.0 : 0.2);
        const SdpSolution a = solve_admm(p, SolverOptions{.tolerance = 1e-8, .max_iter = 50000});
        const SdpSolution r = solve_reference(p);
        REQUIRE(a.converged);
        REQUIRE(r.converged);
        CHECK(std::abs(a.objective - r.objective) / std::max(1.0, std::abs(r.objective)) <= 1e-4);
        for (const auto *sol : {&a, &r})
        {
            const auto f = check_feasibility(*sol, p, 1024);
            CHECK(f.schur_min_eigenvalue >= -1e-6);
            CHECK(f.toeplitz_violation <= 1e-6);
            CHECK(f.grid_max <= 1.0 + 1e-3);
            CHECK(f.grid_max_normalized <= 1.0 + 1e-3);
        }
        // completing the square bounds the optimum by gamma/2 ||Y||^2
        CHECK(a.objective <= 0.5 * p.gamma * p.y.squaredNorm() + 1e-9);
        CHECK(a.primal_residual <= 1e-8);
        CHECK(a.dual_residual <= 1e-8);
    }
}

TEST_CASE("reference solver refuses large problems")
{
    Rng rng = make_rng(6);
    const SdpProblem p = build_problem(random_signal(kReferenceMaxN + 1, 2, rng), kReferenceMaxN + 1, 0.0);
    CHECK_THROWS_AS(solve_reference(p), std::length_error);
}

TEST_CASE("ADMM iterates settle: the objective tail is flat")
{
    // Intermediate iterates are infeasible, so the sequence is not monotone; once the residuals are
    // small the objective must stay put.
    Rng rng = make_rng(7);
    const SdpProblem p = build_problem(random_signal(8, 2, rng), 8, 0.0);
    SolverOptions o;
    o.tolerance = 1e-7;
    o.record_history = true;
    const SdpSolution a = solve_admm(p, o);
    REQUIRE(a.converged);
    const auto &h = a.objective_history;
    REQUIRE(h.size() >= 10);
    for (std::size_t i = h.size() - 5; i < h.size(); ++i)
        CHECK(std::abs(h[i] - a.objective) <= 1e-4 * std::max(1.0, std::abs(a.objective)));
}

TEST_CASE("feasibility checker flags a scaled-up dual variable")
{
    Rng rng = make_rng(8);
    const SdpProblem p = build_problem(random_signal(8, 2, rng), 8, 0.0);
    SdpSolution a = solve_admm(p, SolverOptions{.tolerance = 1e-8});
    CHECK(check_feasibility(a, p, 2048).feasible(1e-6));
    a.v *= 2.0;
    const auto f = check_feasibility(a, p, 2048);
    CHECK_FALSE(f.feasible(1e-6));
    CHECK(f.schur_min_eigenvalue < -1e-6);
    CHECK(f.grid_max_normalized > 1.0 + 1e-3);
}

TEST_CASE("grid dual atomic norm")
{
    const ArrayConfig cfg{16, 0.5};
    const RVec grid = uniform_theta_grid(4096);
    const double th = grid(1234);
    CVec u(3);
    u << cd(1, 2), cd(-0.5, 0), cd(0, 1);
    const CMat x = steering_vector(cfg, AngleOfArrival(th)) * u.adjoint();
    CHECK(dual_atomic_norm_grid(x, 0.7, 4096) == doctest::Approx(0.7 * u.norm()).epsilon(1e-12));
    CHECK(dual_atomic_norm_grid(CMat::Zero(16, 3), 0.7, 4096) == 0.0);

    Rng rng = make_rng(9);
    const CMat r = random_matrix(16, 3, rng) / 8.0;
    const double coarse = dual_atomic_norm_grid(r, 1.0, 8192);
    const double fine = dual_atomic_norm_grid(r, 1.0, 65536);
    CHECK(std::abs(coarse - fine) <= 1e-3 * std::max(1.0, fine));
    CHECK(coarse <= fine + 1e-12);
}

TEST_CASE("noiseless single user: the spectrum peaks at a true angle")
{
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
    {
        ScenarioConfig c;
        c.n = 16;
        c.t = 2;
        c.k_s = 10;
        c.k_m = 2;
        c.k_as = 1;
        c.k_am = 0;
        c.noise = NoiseKind::None;
        c.snr_db = std::numeric_limits<double>::infinity();
        const Scenario sc = generate_scenario(c, seed);
        const ReceivedSignal sig = synthesize_received(sc, seed);
        const SdpProblem p = build_problem(sig, c.n, 0.0);
        const SdpSolution sol = solve_admm(p, SolverOptions{.tolerance = 1e-7});
        const AngularSpectrum spec = eval_dual_polynomial(sol, p, 8192);
        Eigen::Index best;
        spec.values.maxCoeff(&best);
        const double cell = pi / 8192;
        double err = pi;
        for (const auto &u : sc.users)
            if (u.active)
                for (const auto &a : u.channel.angles)
                    err = std::min(err, std::abs(a.radians() - spec.grid(best)));
        CHECK(err <= cell);
    }
}
