#include "sdamh/simulate.hpp"

#include "sdamh/models.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace sdamh {

namespace {

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 6> kScenarioNames{{
    {ScenarioKind::FastSine, "fast-sine"},
    {ScenarioKind::Step, "step"},
    {ScenarioKind::Ramp, "ramp"},
    {ScenarioKind::AR1, "ar1"},
    {ScenarioKind::ScoreDriven, "score-driven"},
    {ScenarioKind::Constant, "constant"},
}};

}  // namespace

std::string_view to_string(ScenarioKind k) {
    for (const auto& [kind, name] : kScenarioNames)
        if (kind == k) return name;
    return "?";
}

ScenarioKind parse_scenario(std::string_view name) {
    for (const auto& [kind, n] : kScenarioNames)
        if (n == name) return kind;
    fail(ErrorCategory::validation, "unknown scenario kind '" + std::string(name) + "'");
}

double scenario_value(ScenarioKind kind, std::size_t t) {
    const double tt = static_cast<double>(t);
    switch (kind) {
        case ScenarioKind::FastSine:
            return 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * tt / 200.0);
        case ScenarioKind::Step:
            return t > 500 ? 1.0 : 0.0;
        case ScenarioKind::Ramp:
            // sawtooth (t mod 200) / 200
            return static_cast<double>(t % 200) / 200.0;
        default:
            fail(ErrorCategory::validation, "scenario '" + std::string(to_string(kind)) + "' has no closed form");
    }
}

ScenarioPath scenario_path(ScenarioKind kind, std::size_t T, const Ar1Scenario& ar1) {
    if (T < 1) fail(ErrorCategory::validation, "scenario length must be at least 1");
    ScenarioPath path;
    path.kind = kind;
    path.ar1 = ar1;
    switch (kind) {
        case ScenarioKind::FastSine:
        case ScenarioKind::Step:
        case ScenarioKind::Ramp:
            path.values.resize(T);
            for (std::size_t t = 0; t < T; ++t) path.values[t] = scenario_value(kind, t);
            break;
        case ScenarioKind::AR1: {
            if (!(std::abs(ar1.phi) < 1.0)) fail(ErrorCategory::validation, "AR(1) scenario needs |phi| < 1");
            std::mt19937_64 rng(ar1.seed);
            std::normal_distribution<double> normal(0.0, 1.0);
            path.values.resize(T);
            path.values[0] = ar1.c / (1.0 - ar1.phi);
            for (std::size_t t = 1; t < T; ++t)
                path.values[t] = ar1.c + ar1.phi * path.values[t - 1] + ar1.noise_sd * normal(rng);
            break;
        }
        case ScenarioKind::ScoreDriven:
        case ScenarioKind::Constant:
            break;
    }
    return path;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ShockStream ShockStream::generate(std::uint64_t seed, std::size_t n) {
    ShockStream s;
    s.seed = seed;
    s.gaussians.resize(n);
    s.uniforms.resize(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        s.gaussians[i] = normal(rng);
        s.uniforms[i] = unif(rng);
    }
    return s;
}

ShockStream antithetic_pair(const ShockStream& shocks) {
    if (shocks.antithetic) fail(ErrorCategory::validation, "shock stream is already an antithetic mirror");
    ShockStream out = shocks;
    for (auto& g : out.gaussians) g = -g;
    for (auto& u : out.uniforms) u = 1.0 - u;
    out.antithetic = true;
    return out;
}

Simulation simulate(const StaticParams& params, const ScenarioPath& scenario, std::size_t T,
                    const ShockStream& shocks, const SimulateOptions& options) {
    params.validate();
    const auto& spec = options.spec;
    spec.validate();
    if (is_linear(params.variant))
        fail(ErrorCategory::variant, "linear variants have no proper sign distribution and cannot be simulated");
    if (params.k() != spec.features(params.variant))
        fail(ErrorCategory::validation, "parameter lag layout does not match the aggregation spec");
    if (T < 1) fail(ErrorCategory::validation, "simulation length must be at least 1");
    if (shocks.gaussians.size() < T || shocks.uniforms.size() < T)
        fail(ErrorCategory::validation, "shock stream shorter than the simulation");
    const bool path_driven = scenario.kind == ScenarioKind::FastSine || scenario.kind == ScenarioKind::Step ||
                             scenario.kind == ScenarioKind::Ramp || scenario.kind == ScenarioKind::AR1;
    if (path_driven && scenario.values.size() < T) fail(ErrorCategory::validation, "scenario path shorter than T");
    if (scenario.kind == ScenarioKind::ScoreDriven && !is_score_driven(params.variant))
        fail(ErrorCategory::variant, "score-driven scenario needs a score-driven variant");

    const auto L2 = static_cast<std::size_t>(spec.L2);
    std::vector<double> r(L2 + T), x(L2 + T);
    if (options.warmup) {
        const auto& w = *options.warmup;
        if (w.size() < L2) fail(ErrorCategory::insufficient_history, "warm-up series shorter than L2");
        for (std::size_t i = 0; i < L2; ++i) {
            r[i] = w.returns()[w.size() - L2 + i];
            x[i] = w.signs()[w.size() - L2 + i];
        }
    } else {
        for (std::size_t i = 0; i < L2; ++i) {
            r[i] = 0.0;
            x[i] = i % 2 == 0 ? 1.0 : -1.0;
        }
    }

    const int k = params.k();
    std::vector<double> fr(static_cast<std::size_t>(k)), fx(static_cast<std::size_t>(k));
    const double sigma = std::sqrt(params.sigma2);
    Simulation sim;
    sim.b0_path.resize(T);
    double b0 = params.b0;
    for (std::size_t i = 0; i < T; ++i) {
        const std::size_t t = L2 + i;
        if (path_driven) b0 = scenario.values[i];
        lag_features(r, x, spec, params.variant, t, fr.data(), fx.data());
        const double state = state_mean(params, fr.data(), fx.data());
        const double pi = inv_logit(sign_mean(params, fr.data(), fx.data()));
        const double xt = shocks.uniforms[i] < pi ? 1.0 : -1.0;
        const double mu1 = state + b0 * xt;
        const double rt = mu1 + sigma * shocks.gaussians[i];
        r[t] = rt;
        x[t] = xt;
        sim.b0_path[i] = b0;
        if (scenario.kind == ScenarioKind::ScoreDriven) b0 = next_impact(params, b0, xt * (rt - mu1));
    }

    const std::size_t start = options.include_warmup ? 0 : L2;
    sim.warmup = options.include_warmup ? L2 : 0;
    sim.series.reserve(L2 + T - start);
    for (std::size_t t = start; t < L2 + T; ++t) {
        TradeEvent e;
        e.index = static_cast<std::int64_t>(t - start + 1);
        e.ret = r[t];
        e.sign = x[t] > 0.0 ? 1 : -1;
        sim.series.push_back(e);
    }
    return sim;
}

Simulation simulate(const StaticParams& params, const ScenarioPath& scenario, std::size_t T, std::uint64_t seed,
                    const SimulateOptions& options) {
    return simulate(params, scenario, T, ShockStream::generate(seed, T), options);
}

}  // namespace sdamh
