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

#include "bagod/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace bagod
{

namespace
{

constexpr double kEps = 1e-12;

// Lattice of registered LoS angles for the stationary population, uniform in cos(theta) and
// increasing in theta.
double stationary_los(int index, int k_s, double lo, double hi)
{
    const double u_hi = std::cos(lo), u_lo = std::cos(hi);
    return std::acos(u_hi - (index + 0.5) * (u_hi - u_lo) / k_s);
}

RVec random_preamble(int t, int guard, Rng &rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int active_len = std::max(1, t - guard);
    RVec phi = RVec::Zero(t);
    for (int i = 0; i < active_len; ++i)
        phi(i) = unit(rng);
    const double nrm = phi.norm();
    if (nrm == 0.0)
        phi(0) = 1.0;
    else
        phi /= nrm;
    return phi;
}

ReceivedSignal finish_with_noise(const Scenario &scenario, CMat clean, std::uint64_t rng_seed)
{
    ReceivedSignal out;
    out.omega = scenario.omega;
    const auto m = clean.rows();
    const auto t = clean.cols();
    const bool noiseless = scenario.noise == NoiseKind::None || !std::isfinite(scenario.snr_db);
    if (noiseless)
    {
        out.y = std::move(clean);
        return out;
    }

    const double power = clean.squaredNorm();
    const double sigma2 = power / (static_cast<double>(m * t) * std::pow(10.0, scenario.snr_db / 10.0));
    const double sigma = std::sqrt(sigma2);
    Rng rng = make_rng(rng_seed, {0x6e6f697365ull}); // noise stream
    CMat noise(m, t);
    if (scenario.noise == NoiseKind::Gaussian)
    {
        std::normal_distribution<double> g(0.0, sigma / std::sqrt(2.0));
        for (Eigen::Index j = 0; j < t; ++j)
            for (Eigen::Index i = 0; i < m; ++i)
                noise(i, j) = cd(g(rng), g(rng));
    }
    else
    {
        // uniform per component with the same variance sigma^2 / 2
        const double a = sigma * std::sqrt(1.5);
        std::uniform_real_distribution<double> u(-a, a);
        for (Eigen::Index j = 0; j < t; ++j)
            for (Eigen::Index i = 0; i < m; ++i)
                noise(i, j) = cd(u(rng), u(rng));
    }
    out.sigma = sigma;
    out.noise_fro = noise.norm();
    out.noise_bound = scenario.eta_multiplier * out.noise_fro;
    out.y = clean + noise;
    return out;
}

} // namespace

void ScenarioConfig::validate() const
{
    ArrayConfig{n, spacing_ratio}.validate();
    if (t < 1)
        throw std::invalid_argument("scenario: T must be positive");
    if (k_s < 0 || k_m < 0 || k_as < 0 || k_am < 0)
        throw std::invalid_argument("scenario: user counts must be nonnegative");
    if (!(mobile_clearance >= 0.0))
        throw std::invalid_argument("scenario: mobile_clearance must be nonnegative");
    if (k_as > k_s || k_am > k_m)
        throw std::invalid_argument("scenario: more active users than users");
    if (l_max < 1 || l_max > n)
        throw std::invalid_argument("scenario: L_max must lie in [1, N]");
    if (tau_max < 0.0 || tau_max >= t)
        throw std::invalid_argument("scenario: tau_max must lie in [0, T)");
    if (zeta < 0.0)
        throw std::invalid_argument("scenario: zeta must be nonnegative");
    if (!(spread_width > 0.0) || spread_width > pi / 2)
        throw std::invalid_argument("scenario: spread_width must lie in (0, pi/2]");
    if (sectors < 1)
        throw std::invalid_argument("scenario: sectors must be positive");
    if (eta_multiplier < 1.0)
        throw std::invalid_argument("scenario: eta_multiplier must be at least 1");
    if (guaranteed_recovery && resolved_min_cos_separation() <= 1.0 / n)
        throw std::invalid_argument("scenario: guaranteed recovery needs path separation above 1/N");
    const int sel = selected_antennas();
    if (sel < 1 || sel > n)
        throw std::invalid_argument("scenario: M must lie in [1, N]");
    for (std::size_t i = 0; i < omega.size(); ++i)
        if (omega[i] < 0 || omega[i] >= n || (i > 0 && omega[i] <= omega[i - 1]))
            throw std::invalid_argument("scenario: omega must be strictly increasing indices inside the array");
    if (k_m > 0 && t / (delay_guard() + 1) < 1)
        throw std::invalid_argument("scenario: T too short for a shift-resolvable mobile codebook");
}

int Scenario::k_active() const noexcept
{
    return static_cast<int>(std::ranges::count_if(users, [](const UserProfile &u) { return u.active; }));
}

int Scenario::k_active(Mobility m) const noexcept
{
    return static_cast<int>(
        std::ranges::count_if(users, [m](const UserProfile &u) { return u.active && u.mobility == m; }));
}

int Scenario::k_total(Mobility m) const noexcept
{
    return static_cast<int>(std::ranges::count_if(users, [m](const UserProfile &u) { return u.mobility == m; }));
}

std::vector<int> Scenario::active_ids() const
{
    std::vector<int> ids;
    for (const auto &u : users)
        if (u.active)
            ids.push_back(u.user_id);
    return ids;
}

void Scenario::validate() const
{
    array.validate();
    if (omega.empty())
        throw std::invalid_argument("scenario: omega is empty");
    for (std::size_t i = 0; i < omega.size(); ++i)
    {
        if (omega[i] < 0 || omega[i] >= array.n_antennas)
            throw std::invalid_argument("scenario: omega index outside the array");
        if (i > 0 && omega[i] <= omega[i - 1])
            throw std::invalid_argument("scenario: omega must be strictly increasing");
    }
    if (tau_max < 0.0 || tau_max >= t_len)
        throw std::invalid_argument("scenario: tau_max must lie in [0, T)");
    for (const auto &u : users)
    {
        if (u.preamble.size() != t_len || u.gain_error.size() != t_len)
            throw std::invalid_argument("scenario: preamble or gain error has the wrong length");
        if ((u.preamble.array() < 0.0).any() || std::abs(u.preamble.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("scenario: preamble must be nonnegative with unit norm");
        if (u.gain_error.size() > 0 && u.gain_error.cwiseAbs().maxCoeff() > zeta + kEps)
            throw std::invalid_argument("scenario: gain error exceeds zeta");
        if (u.delay < 0.0 || u.delay > tau_max + kEps)
            throw std::invalid_argument("scenario: delay outside [0, tau_max]");
    }
}

RMat make_mobile_codebook(int t, int guard)
{
    const int stride = guard + 1;
    const int p = t / stride;
    if (p < 1)
        throw std::invalid_argument("make_mobile_codebook: T too short for the delay guard");
    RMat cb = RMat::Zero(t, p);
    for (int i = 0; i < p; ++i)
        cb(i * stride, i) = 1.0;
    return cb;
}

double stationary_cos_tolerance(const std::vector<double> &los)
{
    const double cap = pi / 180.0;
    std::vector<double> u;
    for (double th : los)
        u.push_back(std::cos(th));
    std::ranges::sort(u);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < u.size(); ++i)
        gap = std::min(gap, u[i] - u[i - 1]);
    return std::min(cap, 0.25 * gap);
}

int sector_of(double theta, int sectors, bool *on_boundary)
{
    const double width = pi / sectors;
    const double pos = theta / width;
    const double nearest = std::round(pos);
    const bool boundary = std::abs(pos - nearest) < 1e-12 && nearest > 0 && nearest < sectors;
    if (on_boundary)
        *on_boundary = boundary;
    int s = boundary ? static_cast<int>(nearest) - 1 : static_cast<int>(std::floor(pos));
    return std::clamp(s, 0, sectors - 1);
}

Scenario generate_scenario(const ScenarioConfig &config, std::uint64_t seed)
{
    config.validate();
    Rng rng = make_rng(seed, {0x7363656eull});
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Scenario sc;
    sc.array = ArrayConfig{config.n, config.spacing_ratio};
    sc.t_len = config.t;
    sc.tau_max = config.tau_max;
    sc.zeta = config.zeta;
    sc.snr_db = config.snr_db;
    sc.noise = config.noise;
    sc.eta_multiplier = config.eta_multiplier;
    sc.sectors = config.sectors;

    if (!config.omega.empty())
    {
        sc.omega = config.omega;
    }
    else
    {
        std::vector<int> all(config.n);
        std::iota(all.begin(), all.end(), 0);
        const int m = config.selected_antennas();
        if (m < config.n)
        {
            std::shuffle(all.begin(), all.end(), rng);
            all.resize(m);
            std::ranges::sort(all);
        }
        sc.omega = std::move(all);
    }

    const int guard = config.delay_guard();
    if (config.k_m > 0)
        sc.mobile_codebook = make_mobile_codebook(config.t, guard);
    const int n_codes = static_cast<int>(sc.mobile_codebook.cols());

    ChannelModel model;
    model.spread_width = config.spread_width;
    model.max_paths = config.l_max;
    model.random_path_count = config.random_path_count;
    model.min_cos_separation = config.guaranteed_recovery ? config.resolved_min_cos_separation() : 0.0;
    model.los_magnitude = config.los_magnitude;

    const double los_lo = model.edge_margin + 0.5 * config.spread_width;
    const double los_hi = pi - model.edge_margin - 0.5 * config.spread_width;
    if (los_hi <= los_lo)
        throw std::invalid_argument("scenario: spread_width leaves no room for users");

    // populations
    sc.users.resize(static_cast<std::size_t>(config.k_s + config.k_m));
    for (int i = 0; i < config.k_s + config.k_m; ++i)
    {
        auto &u = sc.users[static_cast<std::size_t>(i)];
        u.user_id = i;
        u.gain_error = RVec::Zero(config.t);
        if (i < config.k_s)
        {
            u.mobility = Mobility::Stationary;
            const double los = stationary_los(i, config.k_s, los_lo, los_hi);
            u.channel.angles = {AngleOfArrival(los)};
            u.channel.gains = {cd(1.0, 0.0)};
            u.channel.spread = {los, los};
            u.preamble = random_preamble(config.t, config.preamble_guard ? guard : 0, rng);
        }
        else
        {
            const int slot = (i - config.k_s) % (config.sectors * n_codes);
            u.mobility = Mobility::Mobile;
            u.sector = slot / n_codes;
            u.preamble_index = slot % n_codes;
            u.preamble = sc.mobile_codebook.col(u.preamble_index);
        }
    }

    // active set with separated spreads and collision-free mobile slots
    const double min_gap = config.resolved_user_gap();
    std::vector<double> registered; // cos of stationary LoS, increasing
    for (int i = config.k_s - 1; i >= 0; --i)
        registered.push_back(std::cos(sc.users[static_cast<std::size_t>(i)].channel.angles[0].radians()));
    const double spacing = config.k_s > 0 ? (std::cos(los_lo) - std::cos(los_hi)) / config.k_s : 2.0;
    std::vector<double> registered_theta;
    for (int i = 0; i < config.k_s; ++i)
        registered_theta.push_back(sc.users[static_cast<std::size_t>(i)].channel.angles[0].radians());
    const double clearance = config.mobile_clearance > 0.0
                                 ? config.mobile_clearance
                                 : std::min(2.0 * stationary_cos_tolerance(registered_theta), 0.45 * spacing);
    auto clear_of_stationary = [&](double theta)
    {
        const double u = std::cos(theta);
        const auto it = std::ranges::lower_bound(registered, u);
        if (it != registered.end() && *it - u < clearance)
            return false;
        return it == registered.begin() || u - *std::prev(it) >= clearance;
    };
    auto mobile_los = [&](int sector)
    {
        const double width = pi / config.sectors;
        const double lo = std::max(los_lo, sector * width);
        const double hi = std::min(los_hi, (sector + 1) * width);
        if (hi <= lo)
            return std::numeric_limits<double>::quiet_NaN();
        for (int tries = 0; tries < 1000; ++tries)
        {
            const double theta = lo + (hi - lo) * unit(rng);
            const bool clear_of_boundary = std::abs(std::cos(theta) - std::cos(sector * width)) >= clearance &&
                                           std::abs(std::cos(theta) - std::cos((sector + 1) * width)) >= clearance;
            if (clear_of_stationary(theta) && clear_of_boundary)
                return theta;
        }
        return std::numeric_limits<double>::quiet_NaN();
    };

    std::vector<int> stationary_ids(static_cast<std::size_t>(config.k_s));
    std::iota(stationary_ids.begin(), stationary_ids.end(), 0);
    std::vector<int> mobile_ids(static_cast<std::size_t>(config.k_m));
    std::iota(mobile_ids.begin(), mobile_ids.end(), config.k_s);

    bool placed = false;
    std::vector<std::pair<int, double>> chosen; // (user id, LoS)
    std::vector<UserChannel> channels;
    for (int attempt = 0; attempt < 5000 && !placed; ++attempt)
    {
        // greedy pass over a random order: keep every candidate that respects the LoS gap
        chosen.clear();
        auto fits = [&](double los) {
            return std::ranges::all_of(chosen, [&](const auto &c) { return std::abs(c.second - los) >= min_gap; });
        };
        std::shuffle(stationary_ids.begin(), stationary_ids.end(), rng);
        for (std::size_t i = 0; i < stationary_ids.size() && std::cmp_less(chosen.size(), config.k_as); ++i)
        {
            const int id = stationary_ids[i];
            const double los = sc.users[static_cast<std::size_t>(id)].channel.angles[0].radians();
            if (fits(los))
                chosen.emplace_back(id, los);
        }
        bool ok = std::cmp_equal(chosen.size(), config.k_as);
        std::shuffle(mobile_ids.begin(), mobile_ids.end(), rng);
        std::vector<std::pair<int, int>> slots;
        int picked = 0;
        for (std::size_t i = 0; ok && i < mobile_ids.size() && picked < config.k_am; ++i)
        {
            const auto &u = sc.users[static_cast<std::size_t>(mobile_ids[i])];
            const std::pair<int, int> slot{u.sector, u.preamble_index};
            if (std::ranges::find(slots, slot) != slots.end())
                continue;
            const double los = mobile_los(u.sector);
            if (std::isnan(los) || !fits(los))
                continue;
            slots.push_back(slot);
            chosen.emplace_back(mobile_ids[i], los);
            ++picked;
        }
        ok = ok && picked == config.k_am;
        if (!ok)
            continue;
        channels.clear();
        for (const auto &[id, los] : chosen)
            channels.push_back(generate_channel(sc.array, model, los, rng));
        for (std::size_t a = 0; ok && a < channels.size(); ++a)
            for (std::size_t b = a + 1; ok && b < channels.size(); ++b)
                for (const auto &x : channels[a].angles)
                    for (const auto &y : channels[b].angles)
                        ok = ok && std::abs(x.radians() - y.radians()) >= min_gap;
        placed = ok;
    }
    if (!placed)
        throw std::runtime_error("scenario: could not place active users with the requested angular gaps");

    std::uniform_int_distribution<int> int_delay(0, static_cast<int>(std::floor(config.tau_max + kEps)));
    std::uniform_real_distribution<double> cont_delay(0.0, config.tau_max);
    std::uniform_real_distribution<double> gain_err(-config.zeta, config.zeta);
    for (std::size_t c = 0; c < chosen.size(); ++c)
    {
        auto &u = sc.users[static_cast<std::size_t>(chosen[c].first)];
        u.active = true;
        u.channel = channels[c];
        u.delay = config.delay_mode == DelayMode::Integer ? static_cast<double>(int_delay(rng)) : cont_delay(rng);
        const bool with_error = config.gain_error_users == GainErrorUsers::All ||
                                (config.gain_error_users == GainErrorUsers::MobileOnly && u.mobility == Mobility::Mobile);
        if (with_error && config.zeta > 0.0)
            for (int i = 0; i < config.t; ++i)
                u.gain_error(i) = gain_err(rng);
    }
    return sc;
}

CVec delay_gain_vector(double delay, const RVec &gain_error, int t_len, double zeta)
{
    if (gain_error.size() != t_len)
        throw std::invalid_argument("delay_gain_vector: gain error length differs from T");
    if (t_len > 0 && gain_error.cwiseAbs().maxCoeff() > zeta + kEps)
        throw std::invalid_argument("delay_gain_vector: gain error exceeds zeta");
    CVec e(t_len);
    for (int i = 0; i < t_len; ++i)
        e(i) = std::polar(1.0 + gain_error(i), 2.0 * pi * delay * i / t_len);
    return e;
}

CMat user_contribution(const Scenario &scenario, const UserProfile &user)
{
    const CVec h = synthesize_channel(scenario.array, user.channel);
    const CVec phi_f = dft_matrix(scenario.t_len) * user.preamble.cast<cd>();
    const CVec e = delay_gain_vector(user.delay, user.gain_error, scenario.t_len, scenario.zeta);
    const CVec row = phi_f.conjugate().cwiseProduct(e);
    return h * row.transpose();
}

CMat clean_signal(const Scenario &scenario)
{
    CMat full = CMat::Zero(scenario.array.n_antennas, scenario.t_len);
    for (const auto &u : scenario.users)
        if (u.active)
            full += user_contribution(scenario, u);
    return select_rows(full, scenario.omega);
}

ReceivedSignal synthesize_received(const Scenario &scenario, std::uint64_t rng_seed, const SynthesisOptions &opts)
{
    if (opts.strict && scenario.k_active() == 0)
        throw std::invalid_argument("synthesize_received: no active users in strict mode");
    return finish_with_noise(scenario, clean_signal(scenario), rng_seed);
}

ReceivedSignal time_domain_oracle(const Scenario &scenario, std::uint64_t rng_seed)
{
    const int t = scenario.t_len;
    const CMat f = dft_matrix(t);
    CMat full = CMat::Zero(scenario.array.n_antennas, t);
    for (const auto &u : scenario.users)
    {
        if (!u.active)
            continue;
        const double rounded = std::round(u.delay);
        if (std::abs(u.delay - rounded) > kEps)
            throw std::invalid_argument("time_domain_oracle: delays must be integers");
        const int d = static_cast<int>(rounded);
        const int guard = std::max(static_cast<int>(std::ceil(scenario.tau_max - kEps)), d);

        // cyclic prefix of `guard` samples, then the preamble
        RVec burst(t + guard);
        for (int i = 0; i < guard; ++i)
            burst(i) = u.preamble(t - guard + i);
        burst.tail(t) = u.preamble;

        // delayed and zero-padded inside a window of the same length
        RVec window = RVec::Zero(t + guard);
        for (int n = d; n < t + guard; ++n)
            window(n) = burst(n - d);

        const CVec spectrum = f * window.tail(t).cast<cd>();
        CVec row(t);
        for (int i = 0; i < t; ++i)
            row(i) = std::conj(spectrum(i)) * (1.0 + u.gain_error(i));
        full += synthesize_channel(scenario.array, u.channel) * row.transpose();
    }
    return finish_with_noise(scenario, select_rows(full, scenario.omega), rng_seed);
}

double compute_snr(const CMat &signal_part, double sigma)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("compute_snr: sigma must be positive");
    const double p = signal_part.squaredNorm();
    if (p == 0.0)
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(p / (static_cast<double>(signal_part.size()) * sigma * sigma));
}

} // namespace bagod
