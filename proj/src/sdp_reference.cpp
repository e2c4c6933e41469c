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

// Reference solver for the goal-oriented SDP: Chambolle-Pock primal-dual iterations.
//
//   minimize_{V,Q}  F(V, Q) + G(K(V, Q))
//   F = -Re<V,Y> + ||V||^2/(2 gamma) + indicator(Q satisfies the diagonal-sum constraints)
//   K(V, Q) = [[Q, c1 P^Adj V], [c1 (P^Adj V)^H, 0]]
//   G(W) = indicator(W + blkdiag(0, I_T) is PSD)
//
// No linear system and no penalty parameter: it shares only the two exact projections with the
// ADMM solver, so agreement of both is a meaningful check.

#include "bagod/goal_sdp.hpp"

#include <cmath>
#include <stdexcept>

namespace bagod
{

namespace
{

CMat apply_k(const SdpProblem &p, const CMat &v, const CMat &q)
{
    const int n = p.n;
    const int t = p.t;
    const CMat a = p.c1 * adjoint_expand(v, p.omega, n);
    CMat out = CMat::Zero(n + t, n + t);
    out.topLeftCorner(n, n) = q;
    out.topRightCorner(n, t) = a;
    out.bottomLeftCorner(t, n) = a.adjoint();
    return out;
}

} // namespace

SdpSolution solve_reference(const SdpProblem &problem, double tolerance, int max_iter)
{
    problem.validate();
    if (problem.n > kReferenceMaxN || problem.t > kReferenceMaxT)
        throw std::length_error("solve_reference: problem exceeds the reference size guard");

    const int n = problem.n;
    const int t = problem.t;
    const int dim = n + t;
    const ToeplitzConstraintSet toeplitz(n);
    const double c1 = problem.c1;
    const double k_norm = std::max(1.0, std::sqrt(2.0) * c1);
    const double tau = 0.95 / k_norm;
    const double sigma = 0.95 / k_norm;
    const double inv_gamma = 1.0 / problem.gamma;

    CMat j = CMat::Zero(dim, dim);
    j.bottomRightCorner(t, t).setIdentity();

    CMat v = CMat::Zero(problem.m(), t);
    CMat q = CMat::Identity(n, n) / static_cast<double>(n);
    CMat v_bar = v;
    CMat q_bar = q;
    CMat y = CMat::Zero(dim, dim);

    SdpSolution sol;
    double res_p = 0.0;
    double res_d = 0.0;
    for (int it = 1; it <= max_iter; ++it)
    {
        // dual step: prox of sigma G^* via Moreau
        const CMat y_in = y + sigma * apply_k(problem, v_bar, q_bar);
        const CMat y_new = y_in - sigma * (project_psd(y_in / sigma + j) - j);

        // primal step
        const CMat kt_q = 0.5 * (y_new.topLeftCorner(n, n) + y_new.topLeftCorner(n, n).adjoint());
        const CMat y12 = 0.5 * (y_new.topRightCorner(n, t) + y_new.bottomLeftCorner(t, n).adjoint());
        const CMat kt_v = 2.0 * c1 * select_rows(y12, problem.omega);
        const CMat q_new = toeplitz.project(q - tau * kt_q);
        const CMat v0 = v - tau * kt_v;
        const CMat v_new = (problem.y + v0 / tau) / (inv_gamma + 1.0 / tau);

        // primal-dual residuals of the fixed-point map
        const CMat dq = q - q_new;
        const CMat dv = v - v_new;
        const CMat dy = y - y_new;
        const CMat kdx = apply_k(problem, dv, dq);
        const CMat dy11 = 0.5 * (dy.topLeftCorner(n, n) + dy.topLeftCorner(n, n).adjoint());
        const CMat dy12 = 0.5 * (dy.topRightCorner(n, t) + dy.bottomLeftCorner(t, n).adjoint());
        res_p = std::sqrt((dq / tau - dy11).squaredNorm() +
                          (dv / tau - 2.0 * c1 * select_rows(dy12, problem.omega)).squaredNorm());
        res_d = (dy / sigma - kdx).norm();

        v_bar = 2.0 * v_new - v;
        q_bar = 2.0 * q_new - q;
        v = v_new;
        q = q_new;
        y = y_new;
        sol.iterations = it;

        const double scale = std::max({1.0, y.norm(), v.norm() / tau});
        if (res_p <= tolerance * scale && res_d <= tolerance * scale)
        {
            sol.converged = true;
            break;
        }
    }

    restore_feasibility(problem, v, q);
    sol.v = std::move(v);
    sol.q = std::move(q);
    sol.objective = sdp_objective(problem, sol.v);
    sol.primal_residual = res_p;
    sol.dual_residual = res_d;
    return sol;
}

} // namespace bagod
