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

#include "bagod/amp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bagod
{

CMat gaussian_pilots(int t, int k, std::uint64_t seed)
{
    if (t < 1 || k < 1)
        throw std::invalid_argument("gaussian_pilots: sizes must be positive");
    Rng rng = make_rng(seed, {0x70696c6f74ull});
    std::normal_distribution<double> g(0.0, 1.0);
    CMat p(t, k);
    for (int j = 0; j < k; ++j)
    {
        for (int i = 0; i < t; ++i)
            p(i, j) = cd(g(rng), g(rng));
        p.col(j).normalize();
    }
    return p;
}

AmpSignal synthesize_amp_signal(const Scenario &scenario, const CMat &pilots, std::uint64_t seed, bool impaired)
{
    if (pilots.rows() != scenario.t_len || pilots.cols() != scenario.k())
        throw std::invalid_argument("synthesize_amp_signal: pilot matrix must be T x K");
    const int t = scenario.t_len;
    const auto m = static_cast<Eigen::Index>(scenario.omega.size());
    const CMat f = dft_matrix(t);
    AmpSignal out;
    CMat x = CMat::Zero(t, m);
    int n_active = 0;
    for (const auto &u : scenario.users)
    {
        if (!u.active)
            continue;
        const CVec h = select_rows(synthesize_channel(scenario.array, u.channel), scenario.omega);
        CVec p = pilots.col(u.user_id);
        if (impaired)
        {
            const CVec e = delay_gain_vector(u.delay, u.gain_error, t, scenario.zeta);
            p = f.adjoint() * e.asDiagonal() * (f * p);
        }
        x += p * h.transpose();
        out.beta += h.squaredNorm() / static_cast<double>(m);
        ++n_active;
    }
    if (n_active > 0)
        out.beta /= n_active;

    out.y = x;
    const bool noiseless = scenario.noise == NoiseKind::None || !std::isfinite(scenario.snr_db);
    if (noiseless || x.squaredNorm() == 0.0)
        return out;
    const double var = x.squaredNorm() / (static_cast<double>(t * m) * std::pow(10.0, scenario.snr_db / 10.0));
    out.noise_var = var;
    Rng rng = make_rng(seed, {0x616d70ull});
    std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
    for (Eigen::Index j = 0; j < m; ++j)
        for (int i = 0; i < t; ++i)
            out.y(i, j) += cd(g(rng), g(rng));
    return out;
}

AmpResult amp_detect(const CMat &y, const CMat &pilots, const AmpPrior &prior, double noise_var, int k_active,
                     const AmpConfig &config)
{
    const auto t = y.rows();
    const auto m = y.cols();
    const auto k = pilots.cols();
    if (pilots.rows() != t)
        throw std::invalid_argument("amp_detect: pilot rows differ from observation rows");
    if (!(prior.lambda > 0.0 && prior.lambda < 1.0) || !(prior.beta > 0.0))
        throw std::invalid_argument("amp_detect: prior needs 0 < lambda < 1 and beta > 0");
    if (!(config.damping > 0.0 && config.damping <= 1.0))
        throw std::invalid_argument("amp_detect: damping must lie in (0, 1]");

    AmpResult res;
    res.estimates = CMat::Zero(k, m);
    res.residual = y;
    res.activity = RVec::Zero(k);
    res.statistic = RVec::Zero(k);
    const double y_norm = std::max(y.norm(), 1e-300);
    const double tau_floor = std::max(noise_var, 1e-12 * y.squaredNorm() / static_cast<double>(t * m)) + 1e-300;
    const double log_prior = std::log((1.0 - prior.lambda) / prior.lambda);
    const double beta = prior.beta;

    CMat x = res.estimates;
    CMat z = y;
    for (int it = 1; it <= config.max_iter; ++it)
    {
        // per-antenna effective noise level of the decoupled channels
        RVec tau2(m);
        for (Eigen::Index j = 0; j < m; ++j)
            tau2(j) = std::max(z.col(j).squaredNorm() / static_cast<double>(t), tau_floor);
        const CMat r = x + pilots.adjoint() * z;

        // entrywise Bernoulli-Gaussian posterior mean and its derivative
        CMat x_new(k, m);
        RVec d_sum = RVec::Zero(m);
        RVec pi_k = RVec::Zero(k), stat(k);
        for (Eigen::Index j = 0; j < m; ++j)
        {
            const double shrink = beta / (beta + tau2(j));
            const double gap = 1.0 / tau2(j) - 1.0 / (beta + tau2(j));
            const double log_ratio = std::log(tau2(j) / (beta + tau2(j)));
            for (Eigen::Index i = 0; i < k; ++i)
            {
                const double e = std::norm(r(i, j));
                const double llr = log_ratio + e * gap;
                const double p = 1.0 / (1.0 + std::exp(std::clamp(log_prior - llr, -700.0, 700.0)));
                x_new(i, j) = p * shrink * r(i, j);
                d_sum(j) += shrink * (p + p * (1.0 - p) * gap * e);
                pi_k(i) += p / static_cast<double>(m);
            }
        }
        for (Eigen::Index i = 0; i < k; ++i)
            stat(i) = r.row(i).squaredNorm();

        CMat z_new = y - pilots * x_new;
        for (Eigen::Index j = 0; j < m; ++j)
            z_new.col(j) += z.col(j) * (d_sum(j) / static_cast<double>(t));

        const double zn = z_new.norm();
        if (!std::isfinite(zn) || zn > config.divergence_factor * y_norm)
        {
            res.diverged = true;
            break;
        }
        const double change = (x_new - x).norm();
        x = config.damping * x_new + (1.0 - config.damping) * x;
        z = config.damping * z_new + (1.0 - config.damping) * z;
        res.activity = pi_k;
        res.statistic = stat;
        res.iterations = it;
        res.residual_history.push_back(zn);
        if (change <= config.tol * std::max(x.norm(), 1e-300))
        {
            res.converged = true;
            break;
        }
    }
    res.estimates = x;
    res.residual = z;

    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    if (config.decision == AmpDecision::TopK)
    {
        const auto take = static_cast<std::size_t>(std::clamp<Eigen::Index>(k_active, 0, k));
        std::ranges::stable_sort(order, [&](int a, int b) { return res.statistic(a) > res.statistic(b); });
        order.resize(take);
        res.active = order;
    }
    else
    {
        for (int i : order)
            if (res.activity(i) >= config.activity_threshold)
                res.active.push_back(i);
    }
    std::ranges::sort(res.active);
    return res;
}

} // namespace bagod
