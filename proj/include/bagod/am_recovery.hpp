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

#include "bagod/spectrum.hpp"

#include <vector>

namespace bagod
{

struct AmOptions
{
    double tol = 1e-8;  // relative residual decrease per cycle
    int max_iter = 200; // full cycles
    double ridge = 1e-10;
    int max_halvings = 30;
    // Restrict E_k to a phase ramp times real gains in [2 - c_e, c_e] instead of any diagonal with
    // modulus at most c_e. The unrestricted set lets E_k absorb most of the preamble.
    bool structured_delay = true;
};

// Factors of  Y ~ sum_k sum_l alpha_l^k P_Omega(a(theta_l^k)) phi_k^T F^H E_k.
struct AmEstimate
{
    std::vector<CVec> gains;      // alpha^k, one entry per angle of cluster k
    RMat preambles;               // T x K, nonnegative unit-norm columns
    std::vector<CVec> delay_gain; // diagonal of E_k
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;    // a preamble update projected to zero
    bool ridge_used = false; // rank-deficient gain regression
    std::vector<double> residual_history;

    int users() const noexcept { return static_cast<int>(gains.size()); }
};

// Steering vectors of every cluster restricted to the selected antennas, plus the DFT.
class AmModel
{
  public:
    AmModel(const ArrayConfig &array, std::span<const int> omega, int t_len,
            const std::vector<std::vector<AngleOfArrival>> &clusters);

    int users() const noexcept { return static_cast<int>(steer_.size()); }
    int t_len() const noexcept { return t_; }
    const CMat &steering(int k) const { return steer_.at(static_cast<std::size_t>(k)); }
    const CMat &dft() const noexcept { return dft_; }

    // conj(F phi) .* e
    CVec row(const RVec &phi, const CVec &e) const;
    CMat contribution(int k, const AmEstimate &est) const;
    CMat prediction(const AmEstimate &est) const;
    double residual(const CMat &y, const AmEstimate &est) const;

  private:
    std::vector<CMat> steer_;
    CMat dft_;
    int t_;
};

// Joint least squares over every path gain; falls back to ridge regression when rank deficient.
void update_gains(const AmModel &model, const CMat &y, AmEstimate &est, double ridge);

// Per-user real least squares in the time domain, clipped to the nonnegative orthant and
// renormalized (the scale moves into the gains). A step that would raise the residual is halved
// toward the previous iterate.
void update_preamble(const AmModel &model, const CMat &y, AmEstimate &est, int max_halvings = 30);

// Per-user, per-bin scalar least squares, magnitude clipped to c_e. In structured mode the bins
// are fitted jointly by exp(j 2 pi tau t / T) (1 + g_t), tau found by a periodogram search.
void update_delay_gain(const AmModel &model, const CMat &y, AmEstimate &est, double c_e,
                       bool structured = false);

// Rotates the unit-modulus ambiguity between alpha^k and E_k so that E_k[0] is real positive.
void canonicalize(AmEstimate &est);

AmEstimate initial_estimate(const AmModel &model, const CMat &y, double ridge);

AmEstimate am_solve(const ReceivedSignal &signal, const ArrayConfig &array,
                    const std::vector<std::vector<AngleOfArrival>> &clusters, double c_e,
                    const AmOptions &opts = {}, const AmEstimate *init = nullptr);

AmEstimate am_solve(const ReceivedSignal &signal, const ArrayConfig &array, const ClusterResult &clusters,
                    double c_e, const AmOptions &opts = {});

// Coordinate-wise least-squares refinement of every path angle with the other factors held fixed:
// golden-section search on u = cos(theta) within +-window of the current value, gains re-fitted
// jointly afterwards. A move is kept only when it lowers the residual.
std::vector<std::vector<AngleOfArrival>> refine_angles(const ReceivedSignal &signal, const ArrayConfig &array,
                                                       std::vector<std::vector<AngleOfArrival>> angles,
                                                       AmEstimate &est, double window, int sweeps = 3);

// Delay in samples, in [0, T), from the phase slope of a recovered diagonal.
double estimate_delay(const CVec &e);

// A cyclic shift of phi by s samples is indistinguishable from an extra phase ramp of slope s in E.
// For preambles whose last `guard` samples are zero, picks the shift that empties that tail and
// moves it into E. Returns the shift.
int align_to_guard(RVec &phi, CVec &e, int guard);

} // namespace bagod
