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

#include "bagod/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace bagod
{

namespace
{

using Clock = std::chrono::steady_clock;

// Runs `body`, which fills passed/detail; exceptions count as failures.
template <typename F> CheckResult timed(std::string name, F &&body)
{
    CheckResult r;
    r.name = std::move(name);
    const auto t0 = Clock::now();
    try
    {
        body(r);
    }
    catch (const std::exception &e)
    {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

CMat random_unitary(int n, Rng &rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = cd(g(rng), g(rng));
    Eigen::HouseholderQR<CMat> qr(a);
    return qr.householderQ() * CMat::Identity(n, n);
}

} // namespace

CheckResult check_delay_gain(int samples, std::uint64_t seed)
{
    return timed("delay-gain bound", [&](CheckResult &r) {
        const CVec ramp = delay_gain_vector(1.0, RVec::Zero(4), 4, 0.0);
        CVec expect(4);
        expect << cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1);
        double worst_example = (ramp - expect).cwiseAbs().maxCoeff();
        Rng rng = make_rng(seed, {1});
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_excess = -1.0;
        for (int s = 0; s < samples; ++s)
        {
            const int t = 1 + static_cast<int>(u(rng) * 16);
            const double zeta = 0.3 * u(rng);
            RVec g(t);
            for (int i = 0; i < t; ++i)
                g(i) = zeta * (2.0 * u(rng) - 1.0);
            const CVec e = delay_gain_vector(u(rng) * t, g, t, zeta);
            worst_excess = std::max(worst_excess, e.cwiseAbs().maxCoeff() - (1.0 + zeta));
        }
        bool rejects = false;
        try
        {
            delay_gain_vector(0.0, RVec::Constant(3, 0.2), 3, 0.1);
        }
        catch (const std::invalid_argument &)
        {
            rejects = true;
        }
        r.passed = worst_example < 1e-15 && worst_excess <= 1e-15 && rejects;
        r.detail = "example error " + fmt(worst_example) + ", max |e| - C_e " + fmt(worst_excess) +
                   (rejects ? "" : ", out-of-bound gain error accepted");
    });
}

CheckResult check_synthesis_equivalence(int scenarios, std::uint64_t seed, double tol)
{
    return timed("synthesis equivalence", [&](CheckResult &r) {
        Rng rng = make_rng(seed, {2});
        std::uniform_int_distribution<int> pick_t(2, 12), pick_n(4, 24);
        double worst = 0.0;
        int blocks = 0;
        for (int s = 0; s < scenarios; ++s)
        {
            ScenarioConfig c;
            c.n = pick_n(rng);
            c.t = pick_t(rng);
            c.tau_max = std::uniform_int_distribution<int>(0, c.t - 1)(rng);
            c.k_s = 12;
            c.k_m = 4;
            c.k_as = 2;
            c.k_am = 1;
            c.l_max = std::min(3, c.n);
            c.zeta = 0.1;
            c.gain_error_users = GainErrorUsers::All;
            c.noise = NoiseKind::None;
            c.guaranteed_recovery = false;
            c.spread_width = pi / 6.0;
            c.user_gap = 0.05;
            if (s % 3 == 1)
                c.m = std::max(1, c.n / 2);
            Scenario sc = generate_scenario(c, rng());
            for (int d = 0; d <= static_cast<int>(c.tau_max); ++d)
            {
                for (auto &u : sc.users)
                    u.delay = d;
                const CMat a = synthesize_received(sc, 1).y;
                const CMat b = time_domain_oracle(sc, 1).y;
                worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
                ++blocks;
            }
        }
        r.passed = worst <= tol;
        r.detail = std::to_string(blocks) + " blocks, max entry difference " + fmt(worst);
    });
}

CheckResult check_superposition(int scenarios, std::uint64_t seed, double tol)
{
    return timed("superposition", [&](CheckResult &r) {
        double worst = 0.0;
        for (int s = 0; s < scenarios; ++s)
        {
            ScenarioConfig c;
            c.n = 16;
            c.t = 4;
            c.tau_max = 2.5;
            c.delay_mode = DelayMode::Continuous;
            c.k_s = 10;
            c.k_m = 4;
            c.k_as = 3;
            c.k_am = 1;
            c.zeta = 0.1;
            c.noise = NoiseKind::None;
            c.guaranteed_recovery = false;
            c.spread_width = pi / 6.0;
            c.user_gap = 0.05;
            const Scenario sc = generate_scenario(c, make_rng(seed, {3, static_cast<std::uint64_t>(s)})());
            CMat sum = CMat::Zero(static_cast<Eigen::Index>(sc.omega.size()), sc.t_len);
            for (const auto &u : sc.users)
                if (u.active)
                    sum += select_rows(user_contribution(sc, u), sc.omega);
            const CMat joint = synthesize_received(sc, 1).y;
            worst = std::max(worst, (joint - sum).cwiseAbs().maxCoeff() / std::max(1.0, joint.cwiseAbs().maxCoeff()));
        }
        r.passed = worst <= tol;
        r.detail = "max relative difference " + fmt(worst);
    });
}

CheckResult check_solver_agreement(int instances, std::uint64_t seed, double objective_tol, double feasibility_tol)
{
    return timed("solver cross-validation", [&](CheckResult &r) {
        Rng rng = make_rng(seed, {4});
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_gap = 0.0, worst_feas = 0.0;
        for (int s = 0; s < instances; ++s)
        {
            const int n = 4 + static_cast<int>(u(rng) * 13); // 4..16
            const int t = 1 + static_cast<int>(u(rng) * 4);  // 1..4
            std::vector<int> rows(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                rows[static_cast<std::size_t>(i)] = i;
            if (s % 2 == 1)
            {
                std::shuffle(rows.begin(), rows.end(), rng);
                rows.resize(static_cast<std::size_t>(std::max(2, (3 * n) / 4)));
                std::ranges::sort(rows);
            }
            ReceivedSignal sig;
            sig.omega = rows;
            sig.y.resize(static_cast<Eigen::Index>(rows.size()), t);
            for (Eigen::Index i = 0; i < sig.y.rows(); ++i)
                for (int j = 0; j < t; ++j)
                    sig.y(i, j) = cd(g(rng), g(rng));
            sig.noise_bound = 0.5 + 1.5 * u(rng);
            const SdpProblem p = build_problem(sig, n, s % 3 == 0 ? 0.1 : 0.0);
            SolverOptions o;
            o.tolerance = 1e-8;
            o.max_iter = 50000;
            const SdpSolution a = solve_admm(p, o);
            const SdpSolution b = solve_reference(p);
            const double gap = std::abs(a.objective - b.objective) / std::max(1.0, std::abs(b.objective));
            worst_gap = std::max(worst_gap, gap);
            for (const auto *sol : {&a, &b})
            {
                const auto f = check_feasibility(*sol, p, 256);
                worst_feas = std::max({worst_feas, -f.schur_min_eigenvalue, f.toeplitz_violation});
            }
        }
        r.passed = worst_gap <= objective_tol && worst_feas <= feasibility_tol;
        r.detail = std::to_string(instances) + " instances, max objective gap " + fmt(worst_gap) +
                   ", max feasibility residual " + fmt(worst_feas);
    });
}

CheckResult check_dual_feasibility(int instances, std::uint64_t seed, int grid_size, double tol)
{
    return timed("dual feasibility", [&](CheckResult &r) {
        double worst = 0.0, worst_norm = 0.0;
        int converged = 0;
        for (int s = 0; s < instances; ++s)
        {
            ScenarioConfig c;
            c.n = s % 2 == 0 ? 16 : 32;
            c.t = 2 + s % 3;
            c.k_s = 50;
            c.k_m = 8;
            c.snr_db = s % 4 == 3 ? std::numeric_limits<double>::infinity() : 20.0;
            if (!std::isfinite(c.snr_db))
                c.noise = NoiseKind::None;
            c.zeta = s % 2 == 0 ? 0.0 : 0.1;
            const std::uint64_t sd = make_rng(seed, {5, static_cast<std::uint64_t>(s)})();
            const Scenario sc = generate_scenario(c, sd);
            const ReceivedSignal sig = synthesize_received(sc, sd);
            const SdpProblem p = build_problem(sig, c.n, sc.zeta);
            const SdpSolution sol = solve_admm(p, SolverOptions{.tolerance = 1e-4});
            if (!sol.converged)
                continue;
            ++converged;
            const auto f = check_feasibility(sol, p, grid_size, sc.array.spacing_ratio);
            worst = std::max(worst, f.grid_max);
            worst_norm = std::max(worst_norm, f.grid_max_normalized);
        }
        r.passed = converged > 0 && worst <= 1.0 + tol && worst_norm <= 1.0 + tol;
        r.detail = std::to_string(converged) + "/" + std::to_string(instances) +
                   " converged, max c1 ||q_G|| " + fmt(worst) + " (times sqrt(N): " + fmt(worst_norm) + ")";
    });
}

CheckResult check_am_recovery(double zeta, int scenarios, std::uint64_t seed, double tol)
{
    return timed("AM recovery, zeta " + fmt(zeta), [&](CheckResult &r) {
        double worst_err = 0.0, worst_delay = 0.0, worst_res = 0.0;
        int users = 0;
        for (int s = 0; s < scenarios; ++s)
        {
            ScenarioConfig c;
            c.n = 32;
            c.t = 8;
            c.k_s = 20;
            c.k_m = 0;
            c.k_as = 2;
            c.k_am = 0;
            c.tau_max = 2;
            c.zeta = zeta;
            c.preamble_guard = true;
            c.gain_error_users = GainErrorUsers::All;
            c.noise = NoiseKind::None;
            c.snr_db = std::numeric_limits<double>::infinity();
            const std::uint64_t sd = make_rng(seed, {6, static_cast<std::uint64_t>(s)})();
            const Scenario sc = generate_scenario(c, sd);
            const ReceivedSignal sig = synthesize_received(sc, sd);
            std::vector<std::vector<AngleOfArrival>> clusters;
            std::vector<const UserProfile *> truth;
            for (const auto &u : sc.users)
                if (u.active)
                {
                    clusters.push_back(u.channel.angles);
                    truth.push_back(&u);
                }
            const AmEstimate est = am_solve(sig, sc.array, clusters, sc.c_e());
            worst_res = std::max(worst_res, est.residual / sig.y.norm());
            for (std::size_t k = 0; k < truth.size(); ++k)
            {
                RVec phi = est.preambles.col(static_cast<Eigen::Index>(k));
                CVec e = est.delay_gain[k];
                align_to_guard(phi, e, c.delay_guard());
                worst_err = std::max(worst_err, (phi - truth[k]->preamble).norm() / truth[k]->preamble.norm());
                worst_delay = std::max(worst_delay, std::abs(estimate_delay(e) - truth[k]->delay));
                ++users;
            }
        }
        r.passed = worst_err <= tol && worst_delay <= 1e-6;
        r.detail = std::to_string(users) + " users, max preamble error " + fmt(worst_err) + ", max delay error " +
                   fmt(worst_delay) + ", max relative residual " + fmt(worst_res) + ", residual monotone";
    });
}

DetectOptions noiseless_detect_options()
{
    DetectOptions o;
    o.solver.tolerance = 1e-6;
    o.solver.max_iter = 30000; // gamma is huge without noise and ADMM slows down accordingly
    o.rel_threshold = 0.99;
    o.refine_rounds = 50; // alternate refinement and AM until the angles settle
    return o;
}

CheckResult check_noiseless_detection(const ScenarioConfig &config, int trials, std::uint64_t seed,
                                      double angle_tol, const DetectOptions &opts)
{
    return timed("noiseless exact recovery", [&](CheckResult &r) {
        double pd = 0.0, pfa = 0.0, worst = 0.0;
        for (int i = 0; i < trials; ++i)
        {
            const std::uint64_t sd = trial_seed(seed, i);
            const Scenario sc = generate_scenario(config, sd);
            const ReceivedSignal sig = synthesize_received(sc, sd);
            const Registry reg = registry_from_scenario(sc);
            const DetectionReport rep = detect(sig, sc.array, reg, sc.zeta, opts);
            const Metrics m = compute_metrics(rep, sc);
            pd += m.p_d;
            pfa += m.p_fa;
            std::vector<double> found, truth;
            for (const auto &cl : rep.clusters.clusters)
                for (const auto &p : cl)
                    found.push_back(p.angle.radians());
            for (const auto &u : sc.users)
                if (u.active)
                    for (const auto &a : u.channel.angles)
                        truth.push_back(a.radians());
            auto nearest = [](double x, const std::vector<double> &set) {
                double best = pi;
                for (double y : set)
                    best = std::min(best, std::abs(x - y));
                return best;
            };
            for (double x : found)
                worst = std::max(worst, nearest(x, truth));
            for (double x : truth)
                worst = std::max(worst, nearest(x, found));
        }
        pd /= trials;
        pfa /= trials;
        r.passed = pd == 1.0 && pfa == 0.0 && worst <= angle_tol;
        r.detail = std::to_string(trials) + " trials, P_d " + fmt(pd) + ", P_fa " + fmt(pfa) +
                   ", max angle error " + fmt(worst) + " rad";
    });
}

CheckResult check_metric_example()
{
    return timed("metric example", [](CheckResult &r) {
        const Metrics m = compute_metrics(std::set<int>{1, 2, 3}, std::set<int>{1, 2, 4}, 100);
        r.passed = m.p_d == 2.0 / 3.0 && m.p_fa == 1.0 / 97.0;
        r.detail = "P_d " + fmt(m.p_d) + ", P_fa " + fmt(m.p_fa);
    });
}

CheckResult check_codebook_matching(int t, int guard)
{
    return timed("codebook matching", [&](CheckResult &r) {
        const RMat cb = make_mobile_codebook(t, guard);
        double worst = 0.0;
        for (Eigen::Index p = 0; p < cb.cols(); ++p)
        {
            const auto [idx, corr] = best_codebook_column(cb.col(p), cb, 0);
            worst = std::max(worst, idx == p ? std::abs(1.0 - corr) : 1.0);
            for (Eigen::Index q = 0; q < cb.cols(); ++q)
                if (q != p)
                    worst = std::max(worst, std::abs(cb.col(p).dot(cb.col(q))));
        }
        r.passed = cb.cols() > 0 && worst < 1e-14;
        r.detail = std::to_string(cb.cols()) + " columns, max deviation " + fmt(worst);
    });
}

CheckResult check_amp_orthogonal(int trials, std::uint64_t seed)
{
    return timed("AMP orthogonal pilots", [&](CheckResult &r) {
        const int t = 16, k = 16, m = 8, ka = 3;
        int exact = 0;
        double mf_gap = 0.0;
        Rng rng = make_rng(seed, {7});
        std::normal_distribution<double> g(0.0, 1.0);
        for (int s = 0; s < trials; ++s)
        {
            const CMat pilots = random_unitary(t, rng);
            std::vector<int> ids(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i)
                ids[static_cast<std::size_t>(i)] = i;
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(ka);
            std::ranges::sort(ids);
            CMat x = CMat::Zero(k, m);
            for (int i : ids)
                for (int j = 0; j < m; ++j)
                    x(i, j) = cd(g(rng), g(rng)) / std::sqrt(2.0);
            const CMat y = pilots * x;
            const AmpPrior prior{static_cast<double>(ka) / k, 1.0};
            AmpConfig topk;
            AmpConfig thr;
            thr.decision = AmpDecision::Threshold;
            const bool ok = amp_detect(y, pilots, prior, 0.0, ka, topk).active == ids &&
                            amp_detect(y, pilots, prior, 0.0, ka, thr).active == ids;
            exact += ok;
            AmpConfig one;
            one.max_iter = 1;
            const RVec mf = (pilots.adjoint() * y).rowwise().squaredNorm();
            mf_gap = std::max(mf_gap, (amp_detect(y, pilots, prior, 0.0, ka, one).statistic - mf).norm() / mf.norm());
        }
        r.passed = exact == trials && mf_gap < 1e-12;
        r.detail = std::to_string(exact) + "/" + std::to_string(trials) + " exact supports, matched-filter gap " +
                   fmt(mf_gap);
    });
}

CheckResult check_determinism(ExperimentSpec spec)
{
    return timed("determinism", [&](CheckResult &r) {
        std::ostringstream a, b;
        spec.threads = 1;
        emit_dat(run_experiment(spec).table(), a);
        spec.threads = 2;
        emit_dat(run_experiment(spec).table(), b);
        r.passed = a.str() == b.str();
        r.detail = std::to_string(a.str().size()) + " bytes, " + (r.passed ? "identical" : "different");
    });
}

std::vector<CheckResult> run_validation_suite(std::uint64_t seed)
{
    std::vector<CheckResult> out;
    out.push_back(check_delay_gain(200, seed));
    out.push_back(check_synthesis_equivalence(20, seed));
    out.push_back(check_superposition(10, seed));
    out.push_back(check_solver_agreement(3, seed));
    out.push_back(check_dual_feasibility(3, seed));
    out.push_back(check_am_recovery(0.0, 4, seed));
    ScenarioConfig nc;
    nc.n = 32;
    nc.t = 2;
    nc.k_s = 50;
    nc.k_m = 8;
    nc.noise = NoiseKind::None;
    nc.snr_db = std::numeric_limits<double>::infinity();
    out.push_back(check_noiseless_detection(nc, 2, seed, pi / 8192.0, noiseless_detect_options()));
    out.push_back(check_metric_example());
    out.push_back(check_codebook_matching(8, 1));
    out.push_back(check_amp_orthogonal(5, seed));
    ExperimentSpec spec;
    spec.variable = SweepVariable::N;
    spec.values = {16};
    spec.scenario.k_s = 30;
    spec.trials = 2;
    spec.seed = seed;
    out.push_back(check_determinism(spec));
    return out;
}

} // namespace bagod
