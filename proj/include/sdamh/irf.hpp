#pragma once

#include "sdamh/core.hpp"
#include "sdamh/estimate.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdamh {

/// Closed-form response of the linear variants to a trade-sign shock.
struct LinearIrf {
    std::vector<double> irf;   // h = 0..H
    std::vector<double> cirf;  // running sums of irf
    double spectral_radius = 0.0;
    bool stationary = true;
    std::string warning;
};

/// Raw-lag return/sign coefficients of a variant (aggregated lags unrolled
/// over L2 raw lags). Row 0 holds lag 1.
struct RawLags {
    std::vector<double> a, b, c, d;
};
RawLags unroll_lags(const StaticParams& params, const AggregationSpec& spec = {});

/// Companion matrix of the reduced-form VAR in (r_t, x_t) for H/AH.
Eigen::MatrixXd companion_matrix(const StaticParams& params, const AggregationSpec& spec = {});

LinearIrf irf_linear(const StaticParams& params, int H, double delta_x = 1.0, const AggregationSpec& spec = {});

enum class CirfMode {
    common,       // shocked and unshocked futures share shocks
    independent,  // separate shock streams per branch
};

struct CirfOptions {
    int H = 20;
    int S = 1000;
    double delta_x = 1.0;
    bool antithetic = true;
    CirfMode mode = CirfMode::common;
    std::uint64_t seed = 1;
    AggregationSpec spec{};
};

struct CirfResult {
    std::size_t t = 0;
    std::vector<int> horizons;
    std::vector<double> irf;
    std::vector<double> cirf;
    std::vector<double> mc_std;  // standard error of cirf[h]
    double lrcirf = 0.0;
    double lrcirf_std = 0.0;
    double delta_x = 1.0;
    int n_sim = 0;
    bool antithetic = false;
};

/// Monte Carlo CIRF conditional on the information at trade t (0-based,
/// t >= L2). The impact at t comes from `filter_state` for score-driven
/// variants and from params.b0 otherwise. For H/AH the sign equation is the
/// Gaussian one and the shock is added to the drawn sign; for the other
/// variants the shocked branch sets x_t = delta_x.
CirfResult cirf_monte_carlo(const TickSeries& series, const StaticParams& params, const FilterState* filter_state,
                            std::size_t t, const CirfOptions& options = {});

struct LrcirfPath {
    std::vector<std::size_t> t;
    std::vector<double> lrcirf;
    std::vector<double> mc_std;
};

/// LRCIRF at every `thin`-th effective trade starting at L2.
LrcirfPath lrcirf_series(const TickSeries& series, const StaticParams& params, const FilterState* filter_state,
                         const CirfOptions& options = {}, std::size_t thin = 1);

struct ExpFit {
    double c = 0.0;
    double kappa = 0.0;
    double phi = 0.0;
    double rss = 0.0;
    bool identified = true;
};

/// Least-squares fit of cirf[h] = c + kappa exp(-phi h), phi > 0.
ExpFit fit_exponential(const std::vector<double>& cirf);

}  // namespace sdamh
