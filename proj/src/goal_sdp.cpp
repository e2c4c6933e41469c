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

#include "bagod/goal_sdp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bagod
{

void SdpProblem::validate() const
{
    if (n < 1 || t < 1)
        throw std::invalid_argument("SdpProblem: empty dimensions");
    if (y.rows() != m() || y.cols() != t)
        throw std::invalid_argument("SdpProblem: Y has the wrong shape");
    if (!(gamma > 0.0) || !(c1 > 0.0))
        throw std::invalid_argument("SdpProblem: gamma and c1 must be positive");
    for (std::size_t i = 0; i < omega.size(); ++i)
        if (omega[i] < 0 || omega[i] >= n || (i > 0 && omega[i] <= omega[i - 1]))
            throw std::invalid_argument("SdpProblem: omega must be strictly increasing inside [0, N)");
}

ToeplitzConstraintSet::ToeplitzConstraintSet(int order) : n_(order)
{
    if (order < 1)
        throw std::invalid_argument("ToeplitzConstraintSet: order must be positive");
}

RMat ToeplitzConstraintSet::basis(int q) const
{
    if (q <= -n_ || q >= n_)
        throw std::out_of_range("ToeplitzConstraintSet: diagonal index out of range");
    RMat b = RMat::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
        if (j + q >= 0 && j + q < n_)
            b(j + q, j) = 1.0;
    return b;
}

CVec ToeplitzConstraintSet::evaluate(const CMat &q) const
{
    CVec s = CVec::Zero(2 * n_ - 1);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            s(i - j + n_ - 1) += q(i, j);
    return s;
}

double ToeplitzConstraintSet::max_violation(const CMat &q) const
{
    CVec s = evaluate(q);
    s(n_ - 1) -= 1.0;
    return s.cwiseAbs().maxCoeff();
}

CMat ToeplitzConstraintSet::project(const CMat &w) const
{
    CMat q = 0.5 * (w + w.adjoint());
    for (int d = 0; d < n_; ++d)
    {
        const int len = n_ - d;
        cd sum(0.0, 0.0);
        for (int j = 0; j < len; ++j)
            sum += q(j + d, j);
        const cd shift = (sum - (d == 0 ? cd(1.0, 0.0) : cd(0.0, 0.0))) / static_cast<double>(len);
        for (int j = 0; j < len; ++j)
        {
            q(j + d, j) -= shift;
            if (d > 0)
                q(j, j + d) = std::conj(q(j + d, j));
        }
    }
    // the main diagonal of a Hermitian matrix is real
    for (int i = 0; i < n_; ++i)
        q(i, i) = cd(q(i, i).real(), 0.0);
    return q;
}

CMat adjoint_expand(const CMat &v, std::span<const int> omega, int n)
{
    if (v.rows() != static_cast<Eigen::Index>(omega.size()))
        throw std::invalid_argument("adjoint_expand: row count differs from |omega|");
    CMat out = CMat::Zero(n, v.cols());
    for (std::size_t i = 0; i < omega.size(); ++i)
    {
        if (omega[i] < 0 || omega[i] >= n)
            throw std::out_of_range("adjoint_expand: omega index out of range");
        out.row(omega[i]) = v.row(static_cast<Eigen::Index>(i));
    }
    return out;
}

SdpProblem build_problem(const ReceivedSignal &signal, int n, double zeta, std::span<const double> beta,
                         double eta_floor)
{
    if (zeta < 0.0)
        throw std::invalid_argument("build_problem: zeta must be nonnegative");
    double min_beta = 1.0;
    if (!beta.empty())
    {
        min_beta = *std::ranges::min_element(beta);
        if (!(min_beta > 0.0))
            throw std::invalid_argument("build_problem: beta must be positive");
    }
    const double eta = signal.noise_bound > 0.0 ? signal.noise_bound : eta_floor;
    if (!(eta > 0.0))
        throw std::invalid_argument("build_problem: noise bound and floor are both zero");

    SdpProblem p;
    p.y = signal.y;
    p.omega = signal.omega;
    p.n = n;
    p.t = static_cast<int>(signal.y.cols());
    p.gamma = 1.0 / eta;
    // unit-norm preambles: max_k ||phi_k|| = 1
    p.c1 = (1.0 + zeta) / (min_beta * std::sqrt(static_cast<double>(n)));
    p.validate();
    return p;
}

CMat schur_block(const SdpProblem &problem, const CMat &v, const CMat &q)
{
    const int n = problem.n;
    const int t = problem.t;
    const CMat a = problem.c1 * adjoint_expand(v, problem.omega, n);
    CMat b(n + t, n + t);
    b.topLeftCorner(n, n) = q;
    b.topRightCorner(n, t) = a;
    b.bottomLeftCorner(t, n) = a.adjoint();
    b.bottomRightCorner(t, t).setIdentity();
    return b;
}

double sdp_objective(const SdpProblem &problem, const CMat &v)
{
    return (problem.y.conjugate().cwiseProduct(v)).sum().real() - v.squaredNorm() / (2.0 * problem.gamma);
}

CMat project_psd(const CMat &x)
{
    const CMat h = 0.5 * (x + x.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    const RVec &lambda = es.eigenvalues();
    const CMat &u = es.eigenvectors();
    // eigenvalues come sorted ascending; subtract the negative part
    Eigen::Index neg = 0;
    while (neg < lambda.size() && lambda(neg) < 0.0)
        ++neg;
    if (neg == 0)
        return h;
    const CMat un = u.leftCols(neg);
    return h - un * lambda.head(neg).asDiagonal() * un.adjoint();
}

double restore_feasibility(const SdpProblem &problem, CMat &v, CMat &q)
{
    const CMat b = schur_block(problem, v, q);
    Eigen::SelfAdjointEigenSolver<CMat> es(b, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin >= 0.0)
        return 0.0;
    const double floor_eig = std::min(1.0, 1.0 / problem.n);
    // a hair above the exact weight so rounding cannot leave a negative eigenvalue
    const double w = std::min(1.0, -lmin / (-lmin + floor_eig) * (1.0 + 1e-9));
    v *= (1.0 - w);
    q = (1.0 - w) * q + (w / problem.n) * CMat::Identity(problem.n, problem.n);
    return w;
}

SdpSolution solve_admm(const SdpProblem &problem, const SolverOptions &opts)
{
    problem.validate();
    if (!(opts.tolerance > 0.0) || opts.max_iter < 1 || !(opts.rho > 0.0))
        throw std::invalid_argument("solve_admm: invalid solver options");
    if (!(opts.relaxation > 0.0 && opts.relaxation < 2.0))
        throw std::invalid_argument("solve_admm: relaxation must lie in (0, 2)");

    const int n = problem.n;
    const int t = problem.t;
    const int dim = n + t;
    const double c1 = problem.c1;
    const double inv_gamma = 1.0 / problem.gamma;
    const ToeplitzConstraintSet toeplitz(n);
    const double alpha = opts.relaxation;

    CMat v = CMat::Zero(problem.m(), t);
    CMat q = CMat::Identity(n, n) / static_cast<double>(n);
    CMat z = schur_block(problem, v, q);
    CMat u = CMat::Zero(dim, dim);
    double rho = opts.rho;

    SdpSolution sol;
    double r_pri = 0.0;
    double r_dual = 0.0;
    for (int it = 1; it <= opts.max_iter; ++it)
    {
        // (V, Q) block: both updates are closed form
        const CMat w = z - u;
        q = toeplitz.project(w.topLeftCorner(n, n));
        const CMat w12 = 0.5 * (w.topRightCorner(n, t) + w.bottomLeftCorner(t, n).adjoint());
        const CMat b = select_rows(w12, problem.omega);
        v = (problem.y + 2.0 * rho * c1 * b) / (inv_gamma + 2.0 * rho * c1 * c1);

        const CMat l = schur_block(problem, v, q);
        const CMat l_relaxed = alpha * l + (1.0 - alpha) * z;
        const CMat z_old = z;
        z = project_psd(l_relaxed + u);
        u += l_relaxed - z;

        r_pri = (l - z).norm();
        r_dual = rho * (z - z_old).norm();
        const double eps_pri = opts.tolerance * std::max({1.0, l.norm(), z.norm()});
        const double eps_dual = opts.tolerance * std::max(1.0, rho * u.norm());
        sol.iterations = it;
        if (opts.record_history)
            sol.objective_history.push_back(sdp_objective(problem, v));
        if (r_pri <= eps_pri && r_dual <= eps_dual)
        {
            sol.converged = true;
            r_pri /= std::max({1.0, l.norm(), z.norm()});
            r_dual /= std::max(1.0, rho * u.norm());
            break;
        }
        if (opts.adapt_rho && it % 10 == 0)
        {
            const double rp = r_pri / std::max({1.0, l.norm(), z.norm()});
            const double rd = r_dual / std::max(1.0, rho * u.norm());
            if (rp > 10.0 * rd)
            {
                rho *= 2.0;
                u /= 2.0;
            }
            else if (rd > 10.0 * rp)
            {
                rho /= 2.0;
                u *= 2.0;
            }
        }
        if (it == opts.max_iter)
        {
            r_pri /= std::max({1.0, l.norm(), z.norm()});
            r_dual /= std::max(1.0, rho * u.norm());
        }
    }

    restore_feasibility(problem, v, q);
    sol.v = std::move(v);
    sol.q = std::move(q);
    sol.objective = sdp_objective(problem, sol.v);
    sol.primal_residual = r_pri;
    sol.dual_residual = r_dual;
    return sol;
}

FeasibilityReport check_feasibility(const SdpSolution &sol, const SdpProblem &problem, int grid_size,
                                    double spacing_ratio)
{
    FeasibilityReport rep;
    const CMat b = schur_block(problem, sol.v, sol.q);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
    rep.schur_min_eigenvalue = es.eigenvalues()(0);
    rep.toeplitz_violation = ToeplitzConstraintSet(problem.n).max_violation(sol.q);
    const CMat a = adjoint_expand(sol.v, problem.omega, problem.n);
    rep.grid_max = dual_atomic_norm_grid(a, problem.c1, grid_size, spacing_ratio);
    rep.grid_max_normalized = rep.grid_max * std::sqrt(static_cast<double>(problem.n));
    return rep;
}

double dual_atomic_norm_grid(const CMat &x, double c1, int grid_size, double spacing_ratio)
{
    const ArrayConfig cfg{static_cast<int>(x.rows()), spacing_ratio};
    const RVec norms = manifold_response_norms(cfg, x, uniform_theta_grid(grid_size));
    return c1 * norms.maxCoeff();
}

} // namespace bagod
