#pragma once

#include "sdamh/core.hpp"
#include "sdamh/estimate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sdamh {

struct JbResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::size_t n = 0;
};

JbResult jarque_bera(std::span<const double> sample);

/// Normal quantile residuals of +-1 outcomes with buy probabilities pi.
/// The randomized form draws u uniformly inside the probability interval of
/// the observed outcome; the mid form uses the interval midpoint.
std::vector<double> quantile_residuals(std::span<const double> signs, std::span<const double> pi,
                                       std::uint64_t seed = 12345, bool randomized = true);

struct LmResult {
    int lags = 0;
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Engle's test: n R^2 of squared residuals on `lags` of their own lags.
LmResult arch_lm(std::span<const double> residuals, int lags);

inline const std::vector<int> kDefaultLmLags{1, 2, 3, 4, 5, 7, 10, 15, 20, 50};

struct LmSuite {
    std::vector<int> lags;
    std::vector<double> p_values;
    int pass_count = 0;  // non-rejections at `level`
    double level = 0.05;
};

LmSuite arch_lm_suite(std::span<const double> residuals, const std::vector<int>& lags = kDefaultLmLags,
                      double level = 0.05);

/// Sums over consecutive blocks of `block` observations (incomplete tail dropped).
std::vector<double> block_sums(std::span<const double> values, std::size_t block);

/// Sums over physical-time bins of width `seconds`.
std::vector<double> time_bin_sums(std::span<const double> values, std::span<const double> timestamps,
                                  double seconds);

struct DiagnosticsReport {
    Variant variant = Variant::AMH;
    double jb_return_p = 1.0;
    double jb_trade_p = 1.0;
    LmSuite lm;
    double jb_return_block_p = 1.0;  // residuals summed over `block` trades
    LmSuite lm_block;
    std::optional<double> jb_return_time_p;  // residuals summed over time bins
    std::size_t block = 100;
    bool trade_residuals_randomized = true;
};

/// Return residuals standardized by sigma.
std::vector<double> return_residuals(const FilterState& fs, const TickSeries& series, const StaticParams& params,
                                     const AggregationSpec& spec = {});

/// Trade residuals: quantile residuals for the logistic variants, standardized
/// Gaussian residuals for H/AH.
std::vector<double> trade_residuals(const FilterState& fs, const TickSeries& series, const StaticParams& params,
                                    std::uint64_t seed = 12345, bool randomized = true,
                                    const AggregationSpec& spec = {});

DiagnosticsReport diagnose(const TickSeries& series, const StaticParams& params, const FilterState& fs,
                           std::uint64_t seed = 12345, std::size_t block = 100,
                           std::optional<double> time_bin_seconds = std::nullopt,
                           const AggregationSpec& spec = {});

enum class BicConvention {
    single,        // K log T - log L
    conventional,  // K log T - 2 log L
};

struct ModelScore {
    double bic = 0.0;
    double osl = 0.0;
    int K = 0;
    std::size_t T = 0;
    BicConvention convention = BicConvention::single;
};

double bic(int K, std::size_t T, double loglik, BicConvention convention = BicConvention::single);

/// Number of estimated parameters of a variant.
int parameter_count(Variant v, const AggregationSpec& spec = {});

/// Log-likelihood of `day` under `prev_params`, filtering online from `b0_init`.
double osl(const TickSeries& day, const StaticParams& prev_params, double b0_init, const AggregationSpec& spec = {});

struct FilterBenchmark {
    double mae = 0.0;
    std::optional<double> mae_star;
};

FilterBenchmark mae_star(std::span<const double> filtered, std::span<const double> truth);

struct RegressionResult {
    std::vector<std::string> names;  // "const" first
    std::vector<double> gammas;
    std::vector<double> std_errors;
    std::vector<double> p_values;
    double r2 = 0.0;
    /// Share of Var(y) carried by each non-constant regressor
    /// (gamma_i Cov(x_i, y) / Var(y)), followed by the error share 1 - R^2.
    std::vector<double> var_shares;
    std::size_t n = 0;
};

RegressionResult linear_regression(std::span<const double> y, const std::vector<std::span<const double>>& xs,
                                   const std::vector<std::string>& names);

struct StateRegressions {
    std::optional<RegressionResult> lrcirf_on_impact_state;  // gamma1 (impact), gamma2 (|state|)
    std::optional<RegressionResult> impact_on_state;         // gamma3
    RegressionResult lrcirf_on_state;                        // constant-impact form
};

/// The impact-dependent regressions are skipped when the impact path is constant.
StateRegressions state_regressions(std::span<const double> lrcirf, std::span<const double> b0,
                                   std::span<const double> state);

}  // namespace sdamh
