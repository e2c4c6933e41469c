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

#pragma once

#include "bagod/array_channel.hpp"
#include "bagod/scenario.hpp"

#include <span>
#include <vector>

namespace bagod
{

// Goal-oriented SDP
//
//   maximize    Re<V, Y> - ||V||_F^2 / (2 gamma)
//   subject to  [ Q            c1 P^Adj(V) ]
//               [ c1 P^Adj(V)^H    I_T     ]  >= 0,
//               sum of the q-th diagonal of Q = 1{q = 0},  q = -N+1 .. N-1.
//
// The dual polynomial q_G(theta) = P^Adj(V*)^H a(theta) of the optimum peaks at the angles of
// the active users.
struct SdpProblem
{
    CMat y;                 // M x T
    std::vector<int> omega; // 0-based rows of the N-antenna array
    double gamma = 1.0;
    double c1 = 1.0;
    int n = 0;
    int t = 0;

    int m() const noexcept { return static_cast<int>(omega.size()); }
    void validate() const;
};

struct SdpSolution
{
    CMat v; // M x T
    CMat q; // N x N Hermitian
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_history; // filled when SolverOptions::record_history is set
};

struct SolverOptions
{
    double tolerance = 1e-6;
    int max_iter = 5000;
    double rho = 1.0;
    bool adapt_rho = true;
    double relaxation = 1.6; // over-relaxation of the consensus step, 1 disables it
    int grid_size = 4096;    // feasibility checks
    bool record_history = false;
};

// The 2N-1 trace functionals on Q: the sum along each diagonal.
class ToeplitzConstraintSet
{
  public:
    explicit ToeplitzConstraintSet(int order);

    int order() const noexcept { return n_; }

    // Elementary Toeplitz matrix with ones on diagonal `q` (row - col = q).
    RMat basis(int q) const;

    // Diagonal sums indexed by q + N - 1.
    CVec evaluate(const CMat &q) const;

    double max_violation(const CMat &q) const;

    // Frobenius-nearest Hermitian matrix satisfying all constraints.
    CMat project(const CMat &w) const;

  private:
    int n_;
};

struct FeasibilityReport
{
    double schur_min_eigenvalue = 0.0;
    double toeplitz_violation = 0.0;
    double grid_max = 0.0;            // max_theta c1 ||q_G(theta)||
    double grid_max_normalized = 0.0; // max_theta c1 sqrt(N) ||q_G(theta)||, the tight bound

    bool feasible(double tol) const noexcept
    {
        return schur_min_eigenvalue >= -tol && toeplitz_violation <= tol && grid_max <= 1.0 + tol;
    }
};

CMat adjoint_expand(const CMat &v, std::span<const int> omega, int n);

// gamma = 1 / eta, c1 = (1 + zeta) / (min beta * sqrt(N)) for unit-norm preambles. A zero noise bound
// falls back to eta_floor.
SdpProblem build_problem(const ReceivedSignal &signal, int n, double zeta, std::span<const double> beta = {},
                         double eta_floor = 1e-6);

// Block [[Q, c1 A], [c1 A^H, I]] with A = P^Adj(V).
CMat schur_block(const SdpProblem &problem, const CMat &v, const CMat &q);

double sdp_objective(const SdpProblem &problem, const CMat &v);

// Pulls (V, Q) toward the strictly feasible point (0, I/N) just enough to make the Schur block PSD.
// Keeps the Toeplitz constraints intact. Returns the mixing weight used.
double restore_feasibility(const SdpProblem &problem, CMat &v, CMat &q);

// Projection onto the Hermitian PSD cone by clipping negative eigenvalues.
CMat project_psd(const CMat &x);

SdpSolution solve_admm(const SdpProblem &problem, const SolverOptions &opts = {});

// Primal-dual hybrid gradient on the same program; small sizes only, used as a test oracle.
SdpSolution solve_reference(const SdpProblem &problem, double tolerance = 1e-9, int max_iter = 400000);

inline constexpr int kReferenceMaxN = 16;
inline constexpr int kReferenceMaxT = 8;

FeasibilityReport check_feasibility(const SdpSolution &sol, const SdpProblem &problem, int grid_size,
                                    double spacing_ratio = 0.5);

// max over a uniform theta grid of c1 ||X^H a(theta)||, X being N x T.
double dual_atomic_norm_grid(const CMat &x, double c1, int grid_size, double spacing_ratio = 0.5);

} // namespace bagod
