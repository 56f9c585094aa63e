#pragma once

#include "sdamh/core.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sdamh {

enum class ScenarioKind { FastSine, Step, Ramp, AR1, ScoreDriven, Constant };

std::string_view to_string(ScenarioKind k);
ScenarioKind parse_scenario(std::string_view name);

struct Ar1Scenario {
    double c = 0.05;
    double phi = 0.9;
    double noise_sd = 0.05;
    std::uint64_t seed = 7;
};

/// Impact path driving a simulation. For FastSine/Step/Ramp/AR1,
/// values[t] is the impact of simulated observation t (0-based), i.e. the
/// scenario formula evaluated at t. ScoreDriven and Constant carry no values:
/// the impact comes from the variant's own recursion or stays at params.b0.
struct ScenarioPath {
    ScenarioKind kind = ScenarioKind::Constant;
    std::vector<double> values;
    Ar1Scenario ar1;
};

/// Deterministic scenario formula at argument t (not defined for AR1).
double scenario_value(ScenarioKind kind, std::size_t t);

ScenarioPath scenario_path(ScenarioKind kind, std::size_t T, const Ar1Scenario& ar1 = {});

/// Pre-drawn shocks for one simulated path: standard normals for the return
/// innovation and uniforms in [0,1) for the trade-sign draw.
struct ShockStream {
    std::uint64_t seed = 0;
    std::vector<double> gaussians;
    std::vector<double> uniforms;
    bool antithetic = false;

    static ShockStream generate(std::uint64_t seed, std::size_t n);
};

/// Mirrored stream: negated normals, reflected uniforms.
ShockStream antithetic_pair(const ShockStream& shocks);

/// Independent seed for sub-stream `index` of a master seed (splitmix64).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

struct SimulateOptions {
    AggregationSpec spec{};
    /// Keep the L2 pre-sample trades at the front of the output series.
    bool include_warmup = false;
    /// Optional pre-sample; its last L2 trades are used. Defaults to r = 0
    /// with alternating signs.
    const TickSeries* warmup = nullptr;
};

struct Simulation {
    TickSeries series;
    std::vector<double> b0_path;  // impact at each simulated observation
    std::size_t warmup = 0;       // leading pre-sample trades present in `series`
};

/// Simulates T observations. The trade sign is drawn first (buy when
/// uniform < pi), then the return around the conditional mean.
Simulation simulate(const StaticParams& params, const ScenarioPath& scenario, std::size_t T,
                    const ShockStream& shocks, const SimulateOptions& options = {});

/// Convenience: shocks drawn from `seed`.
Simulation simulate(const StaticParams& params, const ScenarioPath& scenario, std::size_t T, std::uint64_t seed,
                    const SimulateOptions& options = {});

}  // namespace sdamh
