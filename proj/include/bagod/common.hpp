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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace bagod
{
using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline constexpr double pi = std::numbers::pi;

// Derives a generator from a base seed and a stream path (sweep point, trial, ...).
// Distinct paths give statistically independent, reproducible streams.
Rng make_rng(std::uint64_t seed, std::span<const std::uint64_t> stream = {});

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream)
{
    std::vector<std::uint64_t> s(stream);
    return make_rng(seed, std::span<const std::uint64_t>(s));
}

// Unitary DFT matrix of size t: F(k, n) = exp(-j 2 pi k n / t) / sqrt(t).
CMat dft_matrix(int t);

// Circular shift: out[(n + shift) mod len] = in[n].
RVec circular_shift(const RVec &in, int shift);

// Row selection P_Omega.
CMat select_rows(const CMat &x, std::span<const int> omega);

} // namespace bagod
