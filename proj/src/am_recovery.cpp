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

#include "bagod/am_recovery.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bagod
{

AmModel::AmModel(const ArrayConfig &array, std::span<const int> omega, int t_len,
                 const std::vector<std::vector<AngleOfArrival>> &clusters)
    : dft_(dft_matrix(t_len)), t_(t_len)
{
    for (const auto &c : clusters)
    {
        if (c.empty())
            throw std::invalid_argument("AmModel: empty cluster");
        steer_.push_back(select_rows(steering_matrix(array, c), omega));
    }
}

CVec AmModel::row(const RVec &phi, const CVec &e) const
{
    return (dft_ * phi.cast<cd>()).conjugate().cwiseProduct(e);
}

CMat AmModel::contribution(int k, const AmEstimate &est) const
{
    const auto kk = static_cast<std::size_t>(k);
    const CVec h = steering(k) * est.gains[kk];
    return h * row(est.preambles.col(k), est.delay_gain[kk]).transpose();
}

CMat AmModel::prediction(const AmEstimate &est) const
{
    CMat p = CMat::Zero(steer_.empty() ? 0 : steer_.front().rows(), t_);
    for (int k = 0; k < users(); ++k)
        p += contribution(k, est);
    return p;
}

double AmModel::residual(const CMat &y, const AmEstimate &est) const
{
    return (y - prediction(est)).norm();
}

void update_gains(const AmModel &model, const CMat &y, AmEstimate &est, double ridge)
{
    const auto m = y.rows();
    const auto t = y.cols();
    Eigen::Index cols = 0;
    for (int k = 0; k < model.users(); ++k)
        cols += model.steering(k).cols();

    CMat g(m * t, cols);
    Eigen::Index c = 0;
    for (int k = 0; k < model.users(); ++k)
    {
        const CVec r = model.row(est.preambles.col(k), est.delay_gain[static_cast<std::size_t>(k)]);
        const CMat &a = model.steering(k);
        for (Eigen::Index l = 0; l < a.cols(); ++l, ++c)
        {
            const CMat atom = a.col(l) * r.transpose();
            g.col(c) = Eigen::Map<const CVec>(atom.data(), m * t);
        }
    }
    const Eigen::Map<const CVec> rhs(y.data(), m * t);

    Eigen::ColPivHouseholderQR<CMat> qr(g);
    CVec x;
    if (qr.rank() == cols)
    {
        x = qr.solve(rhs);
    }
    else
    {
        est.ridge_used = true;
        const CMat normal = g.adjoint() * g + ridge * CMat::Identity(cols, cols);
        x = normal.ldlt().solve(g.adjoint() * rhs);
    }

    c = 0;
    for (int k = 0; k < model.users(); ++k)
    {
        const auto len = model.steering(k).cols();
        est.gains[static_cast<std::size_t>(k)] = x.segment(c, len);
        c += len;
    }
}

void update_preamble(const AmModel &model, const CMat &y, AmEstimate &est, int max_halvings)
{
    const int t = model.t_len();
    const CMat pred = model.prediction(est);
    for (int k = 0; k < model.users(); ++k)
    {
        const auto kk = static_cast<std::size_t>(k);
        const CVec h = model.steering(k) * est.gains[kk];
        const double hh = h.squaredNorm();
        if (!(hh > 0.0))
        {
            est.stalled = true;
            continue;
        }
        // residual seen by user k, reduced to one scalar per bin
        const CMat target = y - pred + model.contribution(k, est);
        const CVec rho = (h.adjoint() * target).transpose() / hh;

        // coefficients of the real unknowns: (C phi)[t] = e[t] conj(F(t, n)) phi[n]
        const CMat coef = est.delay_gain[kk].asDiagonal() * model.dft().conjugate();
        const RMat normal = (coef.adjoint() * coef).real();
        const RVec rhs = (coef.adjoint() * rho).real();
        const RVec ls = (normal + 1e-14 * normal.trace() * RMat::Identity(t, t)).ldlt().solve(rhs);

        const RVec prev = est.preambles.col(k);
        auto cost = [&](const RVec &phi) { return (rho - coef * phi.cast<cd>()).squaredNorm(); };
        RVec cand = ls.cwiseMax(0.0);
        if (!(cand.norm() > 1e-12 * ls.norm()))
        {
            est.stalled = true;
            continue;
        }
        const double base = cost(prev);
        int halvings = 0;
        while (cost(cand) > base && halvings < max_halvings)
        {
            cand = 0.5 * (cand + prev);
            ++halvings;
        }
        if (cost(cand) > base)
            continue;

        const double scale = cand.norm();
        est.preambles.col(k) = cand / scale;
        est.gains[kk] *= scale;
    }
}

namespace
{

// Weighted fit of exp(j 2 pi tau t / T) (1 + g_t) to per-bin targets, 1 - zeta <= 1 + g_t <= 1 + zeta.
struct RampFit
{
    const CVec &target;
    const RVec &weight;
    double lo, hi;

    double gain(int i, double tau) const
    {
        const auto t = static_cast<double>(target.size());
        const cd w = std::polar(1.0, 2.0 * pi * tau * i / t);
        return std::clamp((target(i) * std::conj(w)).real(), lo, hi);
    }
    CVec eval(double tau) const
    {
        const auto t = static_cast<double>(target.size());
        CVec e(target.size());
        for (Eigen::Index i = 0; i < target.size(); ++i)
            e(i) = std::polar(gain(static_cast<int>(i), tau), 2.0 * pi * tau * static_cast<double>(i) / t);
        return e;
    }
    double cost(const CVec &e) const { return (weight.array() * (target - e).array().abs2()).sum(); }
    double cost(double tau) const { return cost(eval(tau)); }
};

CVec fit_ramp(const RampFit &fit)
{
    const int t = static_cast<int>(fit.target.size());
    const int samples = 64 * t;
    const double step = static_cast<double>(t) / samples;
    double best_tau = 0.0;
    double best = fit.cost(0.0);
    for (int s = 1; s < samples; ++s)
    {
        const double c = fit.cost(s * step);
        if (c < best)
        {
            best = c;
            best_tau = s * step;
        }
    }
    // golden section inside the winning cell
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_tau - step, b = best_tau + step;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = fit.cost(x1), f2 = fit.cost(x2);
    for (int it = 0; it < 60; ++it)
    {
        if (f1 < f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = fit.cost(x1);
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = fit.cost(x2);
        }
    }
    const double tau = f1 < f2 ? x1 : x2;
    if (std::min(f1, f2) < best)
        best_tau = tau;
    double wrapped = std::fmod(best_tau, static_cast<double>(t));
    if (wrapped < 0.0)
        wrapped += t;
    return fit.eval(wrapped);
}

} // namespace

void update_delay_gain(const AmModel &model, const CMat &y, AmEstimate &est, double c_e, bool structured)
{
    const int t = model.t_len();
    CMat pred = model.prediction(est);
    for (int k = 0; k < model.users(); ++k)
    {
        const auto kk = static_cast<std::size_t>(k);
        const CVec h = model.steering(k) * est.gains[kk];
        const double hh = h.squaredNorm();
        const CMat own = model.contribution(k, est);
        const CMat target = y - pred + own;
        const CVec phi_f = model.dft() * est.preambles.col(k).cast<cd>();
        CVec &e = est.delay_gain[kk];

        // per-bin unconstrained solutions and their weights in the residual
        CVec ls = e;
        RVec weight = RVec::Zero(t);
        const double bin_floor = 1e-12 * phi_f.norm();
        for (int i = 0; i < t; ++i)
        {
            const cd beta = std::conj(phi_f(i));
            if (!(hh > 0.0) || std::abs(beta) <= bin_floor) // no information in this bin, keep e(i)
                continue;
            ls(i) = (h.adjoint() * target.col(i))(0) / (hh * beta);
            weight(i) = hh * std::norm(beta);
        }

        if (structured)
        {
            const RampFit fit{ls, weight, std::max(0.0, 2.0 - c_e), c_e};
            const CVec cand = fit_ramp(fit);
            if (fit.cost(cand) <= fit.cost(e))
                e = cand;
        }
        else
        {
            for (int i = 0; i < t; ++i)
            {
                if (weight(i) == 0.0)
                    continue;
                cd val = ls(i);
                const double mag = std::abs(val);
                if (mag > c_e)
                    val *= c_e / mag;
                e(i) = val;
            }
        }
        pred += model.contribution(k, est) - own;
    }
}

void canonicalize(AmEstimate &est)
{
    for (std::size_t k = 0; k < est.delay_gain.size(); ++k)
    {
        auto &e = est.delay_gain[k];
        if (e.size() == 0 || std::abs(e(0)) == 0.0)
            continue;
        const cd rot = std::polar(1.0, -std::arg(e(0)));
        e *= rot;
        est.gains[k] /= rot;
    }
}

AmEstimate initial_estimate(const AmModel &model, const CMat &y, double ridge)
{
    const int t = model.t_len();
    AmEstimate est;
    est.preambles = RMat::Constant(t, model.users(), 1.0 / std::sqrt(static_cast<double>(t)));
    for (int k = 0; k < model.users(); ++k)
    {
        est.delay_gain.push_back(CVec::Ones(t));
        est.gains.push_back(CVec::Zero(model.steering(k).cols()));
    }
    update_gains(model, y, est, ridge);
    return est;
}

AmEstimate am_solve(const ReceivedSignal &signal, const ArrayConfig &array,
                    const std::vector<std::vector<AngleOfArrival>> &clusters, double c_e, const AmOptions &opts,
                    const AmEstimate *init)
{
    if (clusters.empty())
        throw std::invalid_argument("am_solve: no clusters");
    if (!(c_e > 0.0))
        throw std::invalid_argument("am_solve: C_e must be positive");
    const int t = static_cast<int>(signal.y.cols());
    const AmModel model(array, signal.omega, t, clusters);
    const CMat &y = signal.y;

    AmEstimate est = init ? *init : initial_estimate(model, y, opts.ridge);
    est.residual_history.clear();
    double prev = model.residual(y, est);
    est.residual_history.push_back(prev);
    const double floor_res = 1e-13 * std::max(1.0, y.norm());

    for (int it = 1; it <= opts.max_iter; ++it)
    {
        update_preamble(model, y, est, opts.max_halvings);
        update_gains(model, y, est, opts.ridge);
        update_delay_gain(model, y, est, c_e, opts.structured_delay);
        const double res = model.residual(y, est);
        est.residual_history.push_back(res);
        est.iterations = it;
        if (res > prev * (1.0 + 1e-12) + floor_res)
            throw std::logic_error("am_solve: residual increased across a full cycle");
        const bool small = res <= floor_res;
        const bool flat = (prev - res) <= opts.tol * std::max(prev, floor_res);
        prev = res;
        if (small || flat)
        {
            est.converged = true;
            break;
        }
    }
    canonicalize(est);
    est.residual = model.residual(y, est);
    return est;
}

AmEstimate am_solve(const ReceivedSignal &signal, const ArrayConfig &array, const ClusterResult &clusters,
                    double c_e, const AmOptions &opts)
{
    std::vector<std::vector<AngleOfArrival>> angles;
    for (std::size_t k = 0; k < clusters.clusters.size(); ++k)
        angles.push_back(clusters.angles(k));
    return am_solve(signal, array, angles, c_e, opts);
}

std::vector<std::vector<AngleOfArrival>> refine_angles(const ReceivedSignal &signal, const ArrayConfig &array,
                                                       std::vector<std::vector<AngleOfArrival>> angles,
                                                       AmEstimate &est, double window, int sweeps)
{
    if (angles.size() != est.gains.size())
        throw std::invalid_argument("refine_angles: cluster count differs from the estimate");
    const CMat &y = signal.y;
    const int t = static_cast<int>(y.cols());
    const double u_lim = std::cos(1e-6);
    auto steer = [&](double u)
    {
        return select_rows(steering_vector(array, AngleOfArrival(std::acos(u))), signal.omega);
    };

    double current = AmModel(array, signal.omega, t, angles).residual(y, est);
    for (int sweep = 0; sweep < sweeps; ++sweep)
    {
        for (std::size_t k = 0; k < angles.size(); ++k)
        {
            for (std::size_t l = 0; l < angles[k].size(); ++l)
            {
                const AmModel model(array, signal.omega, t, angles);
                const CVec r = model.row(est.preambles.col(static_cast<Eigen::Index>(k)), est.delay_gain[k]);
                const double rr = r.squaredNorm();
                if (!(rr > 0.0))
                    continue;
                const cd alpha = est.gains[k](static_cast<Eigen::Index>(l));
                const CMat rest = y - model.prediction(est) + model.steering(static_cast<int>(k)).col(static_cast<Eigen::Index>(l)) * alpha * r.transpose();
                const CVec proj = rest * r.conjugate();
                // maximize |a^H R conj(r)|^2 / ||a||^2, the residual drop with the best scalar gain
                auto score = [&](double u)
                {
                    const CVec a = steer(u);
                    return std::norm(a.dot(proj)) / a.squaredNorm();
                };
                const double u0 = angles[k][l].cosine();
                double lo = std::max(-u_lim, u0 - window), hi = std::min(u_lim, u0 + window);
                const double g = 0.5 * (std::sqrt(5.0) - 1.0);
                double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
                double f1 = score(x1), f2 = score(x2);
                for (int it = 0; it < 40; ++it)
                {
                    if (f1 > f2)
                    {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - g * (hi - lo);
                        f1 = score(x1);
                    }
                    else
                    {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + g * (hi - lo);
                        f2 = score(x2);
                    }
                }
                const double u_best = f1 > f2 ? x1 : x2;
                if (std::max(f1, f2) <= score(u0))
                    continue;
                const CVec a = steer(u_best);
                const auto saved_angle = angles[k][l];
                const cd saved_gain = alpha;
                angles[k][l] = AngleOfArrival(std::acos(u_best));
                est.gains[k](static_cast<Eigen::Index>(l)) = a.dot(proj) / (a.squaredNorm() * rr);
                const double res = AmModel(array, signal.omega, t, angles).residual(y, est);
                if (res < current)
                {
                    current = res;
                }
                else
                {
                    angles[k][l] = saved_angle;
                    est.gains[k](static_cast<Eigen::Index>(l)) = saved_gain;
                }
            }
        }
        // joint gain refit; coupled paths move much faster with it
        AmEstimate trial = est;
        const AmModel model(array, signal.omega, t, angles);
        update_gains(model, y, trial, 1e-10);
        const double res = model.residual(y, trial);
        const double before = current;
        if (res <= current)
        {
            est = std::move(trial);
            current = res;
        }
        if (before - current <= 1e-12 * std::max(before, y.norm()))
            break;
    }
    est.residual = AmModel(array, signal.omega, t, angles).residual(y, est);
    return angles;
}

double estimate_delay(const CVec &e)
{
    const auto t = e.size();
    if (t < 2)
        return 0.0;
    cd acc(0.0, 0.0);
    for (Eigen::Index i = 0; i + 1 < t; ++i)
        acc += e(i + 1) * std::conj(e(i));
    double d = std::arg(acc) * static_cast<double>(t) / (2.0 * pi);
    d = std::fmod(d, static_cast<double>(t));
    if (d < 0.0)
        d += static_cast<double>(t);
    if (d > static_cast<double>(t) - 1e-9)
        d = 0.0;
    return d;
}

int align_to_guard(RVec &phi, CVec &e, int guard)
{
    const auto t = static_cast<int>(phi.size());
    if (guard <= 0 || guard >= t)
        return 0;
    int best = 0;
    double best_energy = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= guard; ++s)
    {
        const RVec back = circular_shift(phi, -s);
        const double energy = back.tail(guard).squaredNorm();
        if (energy < best_energy - 1e-15)
        {
            best_energy = energy;
            best = s;
        }
    }
    phi = circular_shift(phi, -best);
    for (int i = 0; i < t; ++i)
        e(i) *= std::polar(1.0, 2.0 * pi * best * i / t);
    return best;
}

} // namespace bagod
