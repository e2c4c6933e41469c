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

#include "bagod/experiment.hpp"

#include "config_detail.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#ifndef BAGOD_VERSION
#define BAGOD_VERSION "0.0.0"
#endif

namespace bagod
{

using detail::json;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool integral_variable(SweepVariable v)
{
    return v != SweepVariable::SNR;
}

json metrics_json(const Metrics &m)
{
    return json{{"p_d", m.p_d},       {"p_fa", m.p_fa},     {"p_d_s", m.p_d_s},
                {"p_fa_s", m.p_fa_s}, {"p_d_m", m.p_d_m},   {"p_fa_m", m.p_fa_m},
                {"no_active", m.no_active}, {"no_inactive", m.no_inactive}};
}

Metrics full_miss()
{
    return Metrics{}; // nothing detected, nothing falsely declared
}

Metrics nan_metrics()
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return Metrics{nan, nan, nan, nan, nan, nan};
}

// Sum then divide, in record order, so the result does not depend on scheduling.
Metrics average(const std::vector<const Metrics *> &ms)
{
    if (ms.empty())
        return nan_metrics();
    Metrics s;
    for (const Metrics *m : ms)
    {
        s.p_d += m->p_d;
        s.p_fa += m->p_fa;
        s.p_d_s += m->p_d_s;
        s.p_fa_s += m->p_fa_s;
        s.p_d_m += m->p_d_m;
        s.p_fa_m += m->p_fa_m;
        s.no_active = s.no_active || m->no_active;
        s.no_inactive = s.no_inactive || m->no_inactive;
    }
    const auto n = static_cast<double>(ms.size());
    s.p_d /= n;
    s.p_fa /= n;
    s.p_d_s /= n;
    s.p_fa_s /= n;
    s.p_d_m /= n;
    s.p_fa_m /= n;
    return s;
}

void read_detect(const json &obj, DetectOptions &d)
{
    detail::check_keys(obj,
                       {"solver_tolerance", "solver_max_iter", "rho", "relaxation", "grid_size", "rel_threshold",
                        "spread_width", "gap_threshold", "cos_tol", "corr_threshold", "prune_ratio", "refine_sweeps",
                        "refine_rounds", "refine_window", "eta_floor", "am_tol", "am_max_iter", "structured_delay"},
                       "detector");
    auto num = [&](const char *k, double &dst) {
        if (obj.contains(k))
            dst = obj.at(k).get<double>();
    };
    auto integer = [&](const char *k, int &dst) {
        if (obj.contains(k))
            dst = obj.at(k).get<int>();
    };
    num("solver_tolerance", d.solver.tolerance);
    integer("solver_max_iter", d.solver.max_iter);
    num("rho", d.solver.rho);
    num("relaxation", d.solver.relaxation);
    integer("grid_size", d.grid_size);
    num("rel_threshold", d.rel_threshold);
    num("spread_width", d.spread_width);
    num("gap_threshold", d.gap_threshold);
    num("cos_tol", d.cos_tol);
    num("corr_threshold", d.corr_threshold);
    num("prune_ratio", d.prune_ratio);
    integer("refine_sweeps", d.refine_sweeps);
    integer("refine_rounds", d.refine_rounds);
    num("refine_window", d.refine_window);
    num("eta_floor", d.eta_floor);
    num("am_tol", d.am.tol);
    integer("am_max_iter", d.am.max_iter);
    if (obj.contains("structured_delay"))
        d.am.structured_delay = obj.at("structured_delay").get<bool>();
}

json write_detect(const DetectOptions &d)
{
    return json{{"solver_tolerance", d.solver.tolerance},
                {"solver_max_iter", d.solver.max_iter},
                {"rho", d.solver.rho},
                {"relaxation", d.solver.relaxation},
                {"grid_size", d.grid_size},
                {"rel_threshold", d.rel_threshold},
                {"spread_width", d.spread_width},
                {"gap_threshold", d.gap_threshold},
                {"cos_tol", d.cos_tol},
                {"corr_threshold", d.corr_threshold},
                {"prune_ratio", d.prune_ratio},
                {"refine_sweeps", d.refine_sweeps},
                {"refine_rounds", d.refine_rounds},
                {"refine_window", d.refine_window},
                {"eta_floor", d.eta_floor},
                {"am_tol", d.am.tol},
                {"am_max_iter", d.am.max_iter},
                {"structured_delay", d.am.structured_delay}};
}

void read_amp(const json &obj, AmpConfig &a, bool &impaired)
{
    detail::check_keys(obj,
                       {"max_iter", "damping", "tol", "activity_threshold", "decision", "impaired",
                        "divergence_factor"},
                       "amp");
    if (obj.contains("max_iter"))
        a.max_iter = obj.at("max_iter").get<int>();
    if (obj.contains("damping"))
        a.damping = obj.at("damping").get<double>();
    if (obj.contains("tol"))
        a.tol = obj.at("tol").get<double>();
    if (obj.contains("activity_threshold"))
        a.activity_threshold = obj.at("activity_threshold").get<double>();
    if (obj.contains("divergence_factor"))
        a.divergence_factor = obj.at("divergence_factor").get<double>();
    if (obj.contains("impaired"))
        impaired = obj.at("impaired").get<bool>();
    if (obj.contains("decision"))
    {
        const auto s = obj.at("decision").get<std::string>();
        if (s == "top_k")
            a.decision = AmpDecision::TopK;
        else if (s == "threshold")
            a.decision = AmpDecision::Threshold;
        else
            throw ConfigError("amp: 'decision' must be \"top_k\" or \"threshold\"");
    }
}

json write_amp(const AmpConfig &a, bool impaired)
{
    return json{{"max_iter", a.max_iter},
                {"damping", a.damping},
                {"tol", a.tol},
                {"activity_threshold", a.activity_threshold},
                {"decision", a.decision == AmpDecision::TopK ? "top_k" : "threshold"},
                {"impaired", impaired},
                {"divergence_factor", a.divergence_factor}};
}

std::string format_value(double x)
{
    if (std::isnan(x))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

std::string to_string(SweepVariable v)
{
    switch (v)
    {
    case SweepVariable::KaM: return "K_aM";
    case SweepVariable::KaS: return "K_aS";
    case SweepVariable::KM: return "K_M";
    case SweepVariable::KS: return "K_S";
    case SweepVariable::T: return "T";
    case SweepVariable::N: return "N";
    case SweepVariable::SNR: return "SNR";
    }
    return "?";
}

SweepVariable parse_sweep_variable(const std::string &name)
{
    for (auto v : {SweepVariable::KaM, SweepVariable::KaS, SweepVariable::KM, SweepVariable::KS, SweepVariable::T,
                   SweepVariable::N, SweepVariable::SNR})
        if (to_string(v) == name)
            return v;
    throw ConfigError("unknown sweep variable '" + name + "' (K_aM, K_aS, K_M, K_S, T, N, SNR)");
}

ScenarioConfig ExperimentSpec::point(std::size_t index) const
{
    if (index >= values.size())
        throw std::out_of_range("ExperimentSpec::point: index out of range");
    ScenarioConfig c = scenario;
    const double x = values[index];
    const int xi = static_cast<int>(std::lround(x));
    switch (variable)
    {
    case SweepVariable::KaM: c.k_am = xi; break;
    case SweepVariable::KaS: c.k_as = xi; break;
    case SweepVariable::KM: c.k_m = xi; break;
    case SweepVariable::KS: c.k_s = xi; break;
    case SweepVariable::T: c.t = xi; break;
    case SweepVariable::N: c.n = xi; break;
    case SweepVariable::SNR: c.snr_db = x; break;
    }
    return c;
}

void ExperimentSpec::validate() const
{
    if (trials < 1)
        throw ConfigError("experiment: trials must be at least 1");
    if (values.empty())
        throw ConfigError("experiment: the sweep needs at least one value");
    if (!run_bagod && !run_amp)
        throw ConfigError("experiment: no method selected");
    if (threads < 0)
        throw ConfigError("experiment: threads must be nonnegative");
    if (variable == SweepVariable::N && !scenario.omega.empty())
        throw ConfigError("experiment: an explicit omega cannot be combined with an N sweep");
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        const double x = values[i];
        if (integral_variable(variable) && (!std::isfinite(x) || x != std::floor(x)))
            throw ConfigError("experiment: " + to_string(variable) + " values must be integers");
        try
        {
            point(i).validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError("experiment: sweep value " + format_value(x) + ": " + e.what());
        }
    }
}

ExperimentSpec parse_experiment_spec(const std::string &json_text)
{
    const json j = detail::parse_text(json_text, "experiment spec");
    detail::check_keys(j,
                       {"sweep", "scenario", "trials", "seed", "methods", "output", "threads", "exclude_failures",
                        "detector", "amp"},
                       "experiment");
    ExperimentSpec spec;
    try
    {
        if (!j.contains("sweep"))
            throw ConfigError("experiment: 'sweep' is required");
        const json &sw = j.at("sweep");
        detail::check_keys(sw, {"variable", "values"}, "sweep");
        spec.variable = parse_sweep_variable(sw.at("variable").get<std::string>());
        for (const auto &v : sw.at("values"))
            spec.values.push_back(detail::read_extended_double(v, "values"));
        if (j.contains("scenario"))
            detail::read_scenario(j.at("scenario"), spec.scenario);
        spec.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : spec.scenario.seed;
        if (j.contains("trials"))
            spec.trials = j.at("trials").get<int>();
        if (j.contains("threads"))
            spec.threads = j.at("threads").get<int>();
        if (j.contains("output"))
            spec.output = j.at("output").get<std::string>();
        if (j.contains("exclude_failures"))
            spec.exclude_failures = j.at("exclude_failures").get<bool>();
        if (j.contains("methods"))
        {
            spec.run_bagod = spec.run_amp = false;
            for (const auto &m : j.at("methods"))
            {
                const auto s = m.get<std::string>();
                if (s == "bagod")
                    spec.run_bagod = true;
                else if (s == "amp")
                    spec.run_amp = true;
                else
                    throw ConfigError("experiment: unknown method '" + s + "'");
            }
        }
        spec.detect.spread_width = spec.scenario.spread_width;
        if (j.contains("detector"))
            read_detect(j.at("detector"), spec.detect);
        if (j.contains("amp"))
            read_amp(j.at("amp"), spec.amp, spec.amp_impaired);
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("experiment: ") + e.what());
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::string &path)
{
    return parse_experiment_spec(detail::read_file(path));
}

std::string experiment_spec_to_json(const ExperimentSpec &spec)
{
    json values = json::array();
    for (double v : spec.values)
        values.push_back(detail::write_extended_double(v));
    json methods = json::array();
    if (spec.run_bagod)
        methods.push_back("bagod");
    if (spec.run_amp)
        methods.push_back("amp");
    json j{{"sweep", {{"variable", to_string(spec.variable)}, {"values", values}}},
           {"scenario", detail::write_scenario(spec.scenario)},
           {"trials", spec.trials},
           {"seed", spec.seed},
           {"methods", methods},
           {"output", spec.output},
           {"threads", spec.threads},
           {"exclude_failures", spec.exclude_failures},
           {"detector", write_detect(spec.detect)},
           {"amp", write_amp(spec.amp, spec.amp_impaired)}};
    return j.dump(2);
}

std::uint64_t trial_seed(std::uint64_t seed, int index)
{
    Rng rng = make_rng(seed, {0x747269616cull, static_cast<std::uint64_t>(index)});
    return rng();
}

TrialRecord run_trial(const ExperimentSpec &spec, std::size_t point, int index)
{
    TrialRecord rec;
    rec.point = point;
    rec.index = index;
    rec.seed = trial_seed(spec.seed, index);
    const auto t0 = Clock::now();
    try
    {
        const ScenarioConfig cfg = spec.point(point);
        const Scenario sc = generate_scenario(cfg, rec.seed);
        if (spec.run_bagod)
        {
            const ReceivedSignal signal = synthesize_received(sc, rec.seed);
            const Registry registry = registry_from_scenario(sc);
            const DetectionReport report = detect(signal, sc.array, registry, sc.zeta, spec.detect);
            rec.solver_converged = report.solver_converged;
            rec.solver_iterations = report.solver_iterations;
            rec.am_converged = report.am_converged;
            rec.bagod = compute_metrics(report, sc);
        }
        if (spec.run_amp)
        {
            const CMat pilots = gaussian_pilots(sc.t_len, sc.k(), rec.seed);
            const AmpSignal as = synthesize_amp_signal(sc, pilots, rec.seed, spec.amp_impaired);
            const int ka = sc.k_active();
            const double k = static_cast<double>(sc.k());
            // genie prior: true activity rate and mean channel power
            AmpPrior prior;
            prior.lambda = std::clamp(static_cast<double>(std::max(ka, 1)) / k, 1e-9, 1.0 - 1e-9);
            prior.beta = as.beta > 0.0 ? as.beta : 1.0;
            const AmpResult res = amp_detect(as.y, pilots, prior, as.noise_var, ka, spec.amp);
            rec.amp_diverged = res.diverged;
            rec.amp_iterations = res.iterations;
            const auto ids = sc.active_ids();
            rec.amp = compute_metrics(std::set<int>(ids.begin(), ids.end()),
                                      std::set<int>(res.active.begin(), res.active.end()), sc.k());
        }
    }
    catch (const std::exception &e)
    {
        rec.failure = e.what();
        if (!spec.exclude_failures)
        {
            if (spec.run_bagod && !rec.bagod)
                rec.bagod = full_miss();
            if (spec.run_amp && !rec.amp)
                rec.amp = full_miss();
        }
        else
        {
            rec.bagod.reset();
            rec.amp.reset();
        }
    }
    rec.wall_seconds = seconds_since(t0);
    return rec;
}

ExperimentResult run_experiment(const ExperimentSpec &spec, const ProgressFn &progress)
{
    spec.validate();
    const auto t0 = Clock::now();
    ExperimentResult result;
    result.spec = spec;
    const std::size_t n_points = spec.values.size();
    const auto n_trials = static_cast<std::size_t>(spec.trials);
    const std::size_t total = n_points * n_trials;
    result.records.resize(total);

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t n_threads = spec.threads > 0 ? static_cast<std::size_t>(spec.threads) : hw;
    n_threads = std::clamp<std::size_t>(n_threads, 1, total);
    result.threads_used = static_cast<int>(n_threads);

    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex mu;
    std::exception_ptr fatal;
    auto worker = [&] {
        for (;;)
        {
            const std::size_t job = next.fetch_add(1);
            if (job >= total)
                return;
            try
            {
                result.records[job] = run_trial(spec, job / n_trials, static_cast<int>(job % n_trials));
            }
            catch (...)
            {
                std::lock_guard lock(mu);
                if (!fatal)
                    fatal = std::current_exception();
                next.store(total);
                return;
            }
            std::lock_guard lock(mu);
            ++done;
            if (progress)
                progress(done, total);
        }
    };
    if (n_threads == 1)
        worker();
    else
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
    }
    if (fatal)
        std::rethrow_exception(fatal);

    for (std::size_t p = 0; p < n_points; ++p)
    {
        PointSummary s;
        s.value = spec.values[p];
        s.trials = spec.trials;
        std::vector<const Metrics *> b, a;
        for (std::size_t i = 0; i < n_trials; ++i)
        {
            const TrialRecord &r = result.records[p * n_trials + i];
            if (!r.failure.empty())
                ++s.failures;
            if (!r.solver_converged)
                ++s.solver_nonconverged;
            if (r.amp_diverged)
                ++s.amp_diverged;
            if (r.bagod)
                b.push_back(&*r.bagod);
            if (r.amp)
                a.push_back(&*r.amp);
            if (r.bagod || r.amp)
                ++s.included;
            s.wall_seconds += r.wall_seconds;
        }
        s.bagod = spec.run_bagod ? average(b) : nan_metrics();
        s.amp = spec.run_amp ? average(a) : nan_metrics();
        if (p > 0 && spec.variable == SweepVariable::SNR && s.value > result.points.back().value)
        {
            const auto &prev = result.points.back();
            s.pd_drop_flag = (spec.run_bagod && s.bagod.p_d < prev.bagod.p_d) ||
                             (spec.run_amp && s.amp.p_d < prev.amp.p_d);
        }
        result.points.push_back(s);
    }
    result.wall_seconds = seconds_since(t0);
    return result;
}

std::vector<std::vector<double>> ExperimentResult::table() const
{
    std::vector<std::vector<double>> rows;
    for (const auto &p : points)
        rows.push_back({p.value, p.amp.p_d, p.amp.p_fa, p.bagod.p_d, p.bagod.p_fa, p.bagod.p_d_s, p.bagod.p_fa_s,
                        p.bagod.p_d_m, p.bagod.p_fa_m});
    return rows;
}

void emit_dat(const std::vector<std::vector<double>> &table, std::ostream &os)
{
    if (table.empty())
        throw std::invalid_argument("emit_dat: empty table");
    os << "t y1 y2 y3 y4 y5 y6 y7 y8\n";
    for (const auto &row : table)
    {
        if (row.size() != 9)
            throw std::invalid_argument("emit_dat: rows need 9 columns");
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? " " : "") << format_value(row[i]);
        os << '\n';
    }
    if (!os)
        throw std::ios_base::failure("emit_dat: write failed");
}

void emit_dat(const std::vector<std::vector<double>> &table, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::ios_base::failure("emit_dat: cannot open '" + path + "'");
    emit_dat(table, out);
    out.close();
    if (!out)
        throw std::ios_base::failure("emit_dat: write to '" + path + "' failed");
}

std::string experiment_metadata(const ExperimentResult &result)
{
    json points = json::array();
    for (const auto &p : result.points)
        points.push_back({{"value", p.value},
                          {"trials", p.trials},
                          {"included", p.included},
                          {"failures", p.failures},
                          {"solver_nonconverged", p.solver_nonconverged},
                          {"amp_diverged", p.amp_diverged},
                          {"pd_drop_flag", p.pd_drop_flag},
                          {"bagod", metrics_json(p.bagod)},
                          {"amp", metrics_json(p.amp)},
                          {"wall_seconds", p.wall_seconds}});
    json records = json::array();
    for (const auto &r : result.records)
    {
        json jr{{"point", r.point},
                {"index", r.index},
                {"seed", r.seed},
                {"solver_converged", r.solver_converged},
                {"solver_iterations", r.solver_iterations},
                {"am_converged", r.am_converged},
                {"amp_diverged", r.amp_diverged},
                {"amp_iterations", r.amp_iterations},
                {"wall_seconds", r.wall_seconds}};
        if (r.bagod)
            jr["bagod"] = metrics_json(*r.bagod);
        if (r.amp)
            jr["amp"] = metrics_json(*r.amp);
        if (!r.failure.empty())
            jr["failure"] = r.failure;
        records.push_back(std::move(jr));
    }
    json j{{"version", version_string()},
           {"columns", {"t", "P_d-AMP", "P_fa-AMP", "P_d-BaGOD", "P_fa-BaGOD", "P_d,S-BaGOD", "P_fa,S-BaGOD",
                        "P_d,M-BaGOD", "P_fa,M-BaGOD"}},
           {"spec", json::parse(experiment_spec_to_json(result.spec))},
           {"threads_used", result.threads_used},
           {"wall_seconds", result.wall_seconds},
           {"points", points},
           {"records", records}};
    return j.dump(2);
}

DualPolyResult dual_polynomial(const ScenarioConfig &config, std::uint64_t seed, const DetectOptions &opts)
{
    const auto t0 = Clock::now();
    DualPolyResult out;
    out.config = config;
    out.seed = seed;
    const Scenario sc = generate_scenario(config, seed);
    const ReceivedSignal signal = synthesize_received(sc, seed);
    const SdpProblem problem = build_problem(signal, sc.array.n_antennas, sc.zeta, {}, opts.eta_floor);
    out.solution = solve_admm(problem, opts.solver);
    out.spectrum = eval_dual_polynomial(out.solution, problem, opts.grid_size, sc.array.spacing_ratio);
    out.peaks = find_peaks(out.spectrum, opts.rel_threshold);
    for (const auto &u : sc.users)
    {
        if (!u.active)
            continue;
        std::vector<double> angles;
        for (const auto &a : u.channel.angles)
            angles.push_back(a.radians());
        out.true_angles.emplace_back(u.user_id, std::move(angles));
    }
    out.wall_seconds = seconds_since(t0);
    return out;
}

void emit_dual_poly(const DualPolyResult &result, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::ios_base::failure("emit_dual_poly: cannot open '" + path + "'");
    write_spectrum(out, result.spectrum, true);
    out.close();
    if (!out)
        throw std::ios_base::failure("emit_dual_poly: write to '" + path + "' failed");
}

std::string dual_poly_metadata(const DualPolyResult &result)
{
    json users = json::array();
    for (const auto &[id, angles] : result.true_angles)
        users.push_back({{"user_id", id}, {"angles", angles}});
    json peaks = json::array();
    for (const auto &p : result.peaks)
        peaks.push_back({{"theta", p.angle.radians()}, {"value", p.value}});
    const auto &s = result.solution;
    json j{{"version", version_string()},
           {"scenario", detail::write_scenario(result.config)},
           {"seed", result.seed},
           {"grid_size", result.spectrum.grid.size()},
           {"c1", result.spectrum.c1},
           {"active_users", users},
           {"peaks", peaks},
           {"solver",
            {{"objective", s.objective},
             {"iterations", s.iterations},
             {"converged", s.converged},
             {"primal_residual", s.primal_residual},
             {"dual_residual", s.dual_residual}}},
           {"wall_seconds", result.wall_seconds}};
    return j.dump(2);
}

std::string version_string()
{
    return BAGOD_VERSION;
}

} // namespace bagod
