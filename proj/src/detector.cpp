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

#include "bagod/detector.hpp"

#include <Eigen/QR>

namespace bagod
{

std::vector<AngleOfArrival> los_by_gain(const ClusterResult &clusters, const AmEstimate &am)
{
    std::vector<AngleOfArrival> out;
    for (std::size_t k = 0; k < clusters.clusters.size(); ++k)
    {
        const auto &c = clusters.clusters[k];
        if (k >= am.gains.size() || am.gains[k].size() != static_cast<Eigen::Index>(c.size()))
        {
            out.push_back(clusters.los_angle.at(k));
            continue;
        }
        Eigen::Index best = 0;
        am.gains[k].cwiseAbs().maxCoeff(&best);
        out.push_back(c[static_cast<std::size_t>(best)].angle);
    }
    return out;
}

std::vector<Peak> prune_weak_peaks(const std::vector<Peak> &peaks, const ReceivedSignal &signal,
                                   const ArrayConfig &array, double ratio)
{
    if (peaks.empty() || !(ratio > 0.0))
        return peaks;
    std::vector<AngleOfArrival> angles;
    for (const auto &p : peaks)
        angles.push_back(p.angle);
    const CMat a = select_rows(steering_matrix(array, angles), signal.omega);
    const CMat rows = a.colPivHouseholderQr().solve(signal.y);
    const RVec energy = rows.rowwise().norm();
    const double keep = ratio * energy.maxCoeff();
    std::vector<Peak> out;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        if (energy(static_cast<Eigen::Index>(i)) >= keep)
            out.push_back(peaks[i]);
    return out;
}

DetectionReport detect(const ReceivedSignal &signal, const ArrayConfig &array, const Registry &registry, double zeta,
                       const DetectOptions &opts)
{
    DetectionReport rep;
    const SdpProblem problem = build_problem(signal, array.n_antennas, zeta, {}, opts.eta_floor);
    const SdpSolution sol = solve_admm(problem, opts.solver);
    rep.solver_converged = sol.converged;
    rep.solver_iterations = sol.iterations;
    if (!sol.converged)
        return rep; // counted as a miss by the caller

    const AngularSpectrum spec = eval_dual_polynomial(sol, problem, opts.grid_size, array.spacing_ratio);
    const auto peaks = prune_weak_peaks(find_peaks(spec, opts.rel_threshold), signal, array, opts.prune_ratio);
    const double gap = opts.gap_threshold > 0.0 ? opts.gap_threshold
                                                : default_gap_threshold(opts.spread_width, opts.grid_size);
    rep.clusters = cluster_angles(peaks, gap);
    if (rep.clusters.k_hat == 0)
        return rep;

    rep.am = am_solve(signal, array, rep.clusters, 1.0 + zeta, opts.am);
    if (opts.refine_sweeps > 0)
    {
        std::vector<std::vector<AngleOfArrival>> angles;
        for (std::size_t k = 0; k < rep.clusters.clusters.size(); ++k)
            angles.push_back(rep.clusters.angles(k));
        const double window = opts.refine_window > 0.0 ? opts.refine_window : 1.0 / array.n_antennas;
        for (int round = 0; round < std::max(1, opts.refine_rounds); ++round)
        {
            const auto before = angles;
            angles = refine_angles(signal, array, std::move(angles), rep.am, window, opts.refine_sweeps);
            rep.am = am_solve(signal, array, angles, 1.0 + zeta, opts.am, &rep.am);
            double moved = 0.0;
            for (std::size_t k = 0; k < angles.size(); ++k)
                for (std::size_t l = 0; l < angles[k].size(); ++l)
                    moved = std::max(moved, std::abs(angles[k][l].cosine() - before[k][l].cosine()));
            if (moved < 1e-10)
                break;
        }
        for (std::size_t k = 0; k < angles.size(); ++k)
            for (std::size_t l = 0; l < angles[k].size(); ++l)
                rep.clusters.clusters[k][l].angle = angles[k][l];
    }
    rep.am_converged = rep.am.converged;
    rep.los = los_by_gain(rep.clusters, rep.am);

    const StationaryMatch sm = match_stationary(rep.los, registry, opts.cos_tol > 0.0 ? opts.cos_tol : registry.default_cos_tol(), MatchDomain::Cosine);
    rep.cluster_user = sm.cluster_to_user;
    for (const auto &[c, id] : sm.cluster_to_user)
        rep.est_active_stationary.insert(id);

    rep.mobile = match_mobile(sm.unmatched, rep.los, rep.am, registry, opts.corr_threshold);
    for (const auto &d : rep.mobile)
    {
        if (!d.identified)
        {
            rep.unmatched.push_back(d.cluster);
            continue;
        }
        rep.mobile_slots.insert({d.sector, d.preamble_index});
        rep.est_active_mobile.insert(d.candidates.front());
    }
    rep.est_active = rep.est_active_stationary;
    rep.est_active.insert(rep.est_active_mobile.begin(), rep.est_active_mobile.end());
    return rep;
}

} // namespace bagod
