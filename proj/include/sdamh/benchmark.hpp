#pragma once

#include "sdamh/core.hpp"
#include "sdamh/simulate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdamh::bench {

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;  // sample standard deviation
    double dq = 0.0;   // 95% quantile minus 5% quantile
    std::size_t n = 0;
};

Summary summarize(std::vector<double> values);

/// Simulation-study parameter sets. The first is the SDAMH-INT recovery
/// design; the permanent-impact design uses the reduced real-data estimates.
StaticParams recovery_params();
StaticParams impact_params();

/// Replication standard deviations printed next to the recovery design,
/// keyed by parameter name.
std::optional<double> recovery_reference_std(const std::string& name);

struct RecoveryRow {
    std::string name;
    double truth = 0.0;
    Summary est;
    std::optional<double> reference_std;
    double tolerance = 0.0;  // allowed |mean - truth|
    bool pass = false;
};

struct RecoveryStudy {
    std::vector<RecoveryRow> rows;
    std::size_t failed_fits = 0;
    bool pass = false;
};

/// Simulate-and-refit at the recovery design. Fits start at the truth.
/// Rows whose printed values are inconsistent (mu2, a100bar) are judged
/// against 5 of their own replication standard deviations.
RecoveryStudy recovery_study(int S, std::size_t T, std::uint64_t seed = 101);

struct FilterRow {
    ScenarioKind scenario = ScenarioKind::FastSine;
    std::size_t T = 0;
    Summary mae_star;
    Summary alpha;
    std::size_t failed_fits = 0;
};

struct FilterStudyOptions {
    std::vector<ScenarioKind> scenarios{ScenarioKind::FastSine, ScenarioKind::Step, ScenarioKind::Ramp,
                                        ScenarioKind::AR1};
    std::vector<std::size_t> sizes{1000, 10000};
    int S = 100;
    double sigma2 = 1e-5;
    double ar1_noise_sd = 0.025;
    std::uint64_t seed = 17;
};

/// SDAMH-INT filtering of impact paths that follow other dynamics. Every
/// replication refits the static parameters, starting from the recovery
/// design with alpha at its profile-likelihood maximum, and compares the
/// filtered path with the true one.
std::vector<FilterRow> filter_study(const FilterStudyOptions& opts);

/// Reference MAE* values at T = 1,000 and T = 10,000.
std::optional<double> filter_reference(ScenarioKind k, std::size_t T);

struct InitStudy {
    double truth = 5e-3;
    Summary est;
};

/// Forward-backward estimates of the initial impact on SDAMH-INT series
/// simulated at the recovery design (innovation variance `sigma2`). The
/// static parameters are held at their true values.
InitStudy init_study(int S, std::size_t T, double sigma2 = 1e-7, std::uint64_t seed = 29);

struct ImpactStudy {
    Summary model;       // mean of the windowed model estimates per replication
    Summary regression;  // block regression slope per replication
    std::size_t failed_fits = 0;
};

ImpactStudy impact_study(int S, std::size_t T, int M = 101, std::uint64_t seed = 99);

struct Verdict {
    bool pass = false;
    std::string detail;
};

Verdict judge(const RecoveryStudy& s);
/// MAE* within 50% of the reference at T = 10,000, and smaller than at
/// T = 1,000, for every scenario present in `rows`.
Verdict judge(const std::vector<FilterRow>& rows);
Verdict judge(const InitStudy& s);
Verdict judge(const ImpactStudy& s);

}  // namespace sdamh::bench
