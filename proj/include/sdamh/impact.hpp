#pragma once

#include "sdamh/core.hpp"
#include "sdamh/estimate.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sdamh {

/// Window of M trades ending just before trade t (0-based): j = t-M .. t-1.
struct ImpactWindow {
    int M = 101;
    std::size_t t = 0;

    void validate() const;
};

enum class OmegaMode {
    blocks,   // lagged window means over non-overlapping M-trade blocks
    shifted,  // lagged window means shifted by one trade per lag
};

struct OmegaWeights {
    double w1 = 1.0;
    double wL1 = 1.0;
    double wL2 = 1.0;
    std::vector<double> xbar;  // xbar[i] is the window mean i lags back, i = 0..L2
};

enum class ImpactSource { empirical, model, regression };

struct ImpactEstimate {
    std::size_t t = 0;
    double beta_sign = 0.0;
    std::optional<double> beta_dollar;
    std::optional<double> band_lo;
    std::optional<double> band_hi;
    ImpactSource source = ImpactSource::empirical;
    double b0_bar = 0.0;     // model: plain window average of the impact
    double b0_flow = 0.0;    // model: order-flow-weighted window average
    double std_error = 0.0;  // regression only
    std::size_t n_bins = 0;  // regression only
};

std::string_view to_string(ImpactSource s);

/// Sum of returns over sum of signs in the window.
ImpactEstimate beta_sign_empirical(const TickSeries& series, const ImpactWindow& window);

OmegaWeights omega_weights(const TickSeries& series, const ImpactWindow& window, const AggregationSpec& spec = {},
                           OmegaMode mode = OmegaMode::blocks);

/// Model-implied permanent impact per unit sign. Score-driven variants
/// average the filtered impact over the window; static variants use b0.
/// With `flow_weighted` the order-flow-weighted average replaces the plain
/// one. When `bands` is given, its lower/upper impact paths are averaged
/// the same way and mapped through the same formula.
ImpactEstimate beta_sign_model(const StaticParams& params, const FilterState* filter_state,
                               const TickSeries& series, const ImpactWindow& window,
                               const AggregationSpec& spec = {}, OmegaMode mode = OmegaMode::blocks,
                               bool flow_weighted = false, const BandEstimate* bands = nullptr);

/// Scales a per-sign estimate into price per share: (qbar / vbar) beta_sign.
ImpactEstimate beta_dollar(const ImpactEstimate& est, double qbar, double vbar);

/// Exponentially weighted mean with the given half-life (in observations);
/// the last value carries the largest weight.
double ewma_mean(std::span<const double> values, double half_life);

struct BinSpec {
    enum class Kind { trades, seconds } kind = Kind::trades;
    double size = 101.0;
};

/// Slope of binned return sums on binned sign sums (with intercept).
ImpactEstimate beta_regression(const TickSeries& series, const BinSpec& bins = {});

/// Expected implementation shortfall -Q^2 (beta/2 (1 - 1/N) + k/T_exec);
/// `large_n` drops the 1/N term.
double expected_shortfall(double Q, double T_exec, double N, double beta, double k, bool large_n = false);

struct ImpactSeries {
    std::vector<ImpactEstimate> rows;
    std::size_t skipped = 0;  // balanced windows
};

/// Model estimates on consecutive non-overlapping M-trade windows, starting
/// at the first window with enough history.
ImpactSeries impact_series(const StaticParams& params, const FilterState* filter_state, const TickSeries& series,
                           int M, const AggregationSpec& spec = {}, OmegaMode mode = OmegaMode::blocks,
                           const BandEstimate* bands = nullptr);

}  // namespace sdamh
