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

#include "bagod/common.hpp"

#include <stdexcept>

namespace bagod
{

Rng make_rng(std::uint64_t seed, std::span<const std::uint64_t> stream)
{
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * stream.size());
    auto push = [&words](std::uint64_t v)
    {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto s : stream)
        push(s);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

CMat dft_matrix(int t)
{
    if (t < 1)
        throw std::invalid_argument("dft_matrix: size must be positive");
    CMat f(t, t);
    const double norm = 1.0 / std::sqrt(static_cast<double>(t));
    for (int k = 0; k < t; ++k)
        for (int n = 0; n < t; ++n)
        {
            // reduce k*n modulo t before scaling to keep the phase exact for large t
            const long long kn = (static_cast<long long>(k) * n) % t;
            f(k, n) = std::polar(norm, -2.0 * pi * static_cast<double>(kn) / t);
        }
    return f;
}

RVec circular_shift(const RVec &in, int shift)
{
    const auto len = static_cast<int>(in.size());
    RVec out(len);
    if (len == 0)
        return out;
    const int s = ((shift % len) + len) % len;
    for (int n = 0; n < len; ++n)
        out((n + s) % len) = in(n);
    return out;
}

CMat select_rows(const CMat &x, std::span<const int> omega)
{
    CMat out(static_cast<Eigen::Index>(omega.size()), x.cols());
    for (std::size_t i = 0; i < omega.size(); ++i)
    {
        if (omega[i] < 0 || omega[i] >= x.rows())
            throw std::out_of_range("select_rows: index outside matrix rows");
        out.row(static_cast<Eigen::Index>(i)) = x.row(omega[i]);
    }
    return out;
}

} // namespace bagod
