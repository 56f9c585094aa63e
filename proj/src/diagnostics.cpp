#include "sdamh/diagnostics.hpp"

#include "sdamh/ols.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <map>
#include <random>

namespace sdamh {

JbResult jarque_bera(std::span<const double> s) {
    if (s.size() < 20) fail(ErrorCategory::insufficient_history, "Jarque-Bera needs at least 20 observations");
    const double n = static_cast<double>(s.size());
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : s) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 1e-300) || !std::isfinite(m2)) fail(ErrorCategory::numerical, "sample has zero variance");
    JbResult r;
    r.n = s.size();
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    r.statistic = n / 6.0 * (r.skewness * r.skewness + r.excess_kurtosis * r.excess_kurtosis / 4.0);
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(2.0), r.statistic));
    return r;
}

std::vector<double> quantile_residuals(std::span<const double> signs, std::span<const double> pi, std::uint64_t seed,
                                       bool randomized) {
    if (signs.size() != pi.size()) fail(ErrorCategory::validation, "signs and probabilities differ in length");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const boost::math::normal_distribution<double> normal;
    std::vector<double> out(signs.size());
    for (std::size_t i = 0; i < signs.size(); ++i) {
        const double p = pi[i];
        if (!(p > 0.0 && p < 1.0)) fail(ErrorCategory::domain, "buy probability must lie strictly inside (0, 1)");
        // outcome -1 occupies [0, 1 - p), outcome +1 occupies [1 - p, 1)
        const double lo = signs[i] > 0.0 ? 1.0 - p : 0.0;
        const double hi = signs[i] > 0.0 ? 1.0 : 1.0 - p;
        const double w = randomized ? unit(rng) : 0.5;
        const double u = std::clamp(lo + w * (hi - lo), 1e-300, 1.0 - 1e-16);
        out[i] = boost::math::quantile(normal, u);
    }
    return out;
}

LmResult arch_lm(std::span<const double> e, int lags) {
    if (lags < 1) fail(ErrorCategory::validation, "LM test needs at least one lag");
    const auto p = static_cast<std::size_t>(lags);
    if (e.size() <= p + 10)
        fail(ErrorCategory::insufficient_history, "LM test with " + std::to_string(lags) + " lags needs more than " +
                                                      std::to_string(p + 10) + " residuals");
    const auto n = static_cast<Eigen::Index>(e.size() - p);
    Eigen::MatrixXd X(n, lags + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t t = static_cast<std::size_t>(i) + p;
        y[i] = e[t] * e[t];
        X(i, 0) = 1.0;
        for (std::size_t j = 1; j <= p; ++j) X(i, static_cast<Eigen::Index>(j)) = e[t - j] * e[t - j];
    }
    const auto fit = ols(X, y);
    LmResult r;
    r.lags = lags;
    r.statistic = static_cast<double>(n) * fit.r2;
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(lags), r.statistic));
    return r;
}

LmSuite arch_lm_suite(std::span<const double> e, const std::vector<int>& lags, double level) {
    LmSuite s;
    s.lags = lags;
    s.level = level;
    for (int l : lags) {
        const double p = arch_lm(e, l).p_value;
        s.p_values.push_back(p);
        if (p >= level) ++s.pass_count;
    }
    return s;
}

std::vector<double> block_sums(std::span<const double> v, std::size_t block) {
    if (block < 1) fail(ErrorCategory::validation, "block size must be positive");
    std::vector<double> out;
    for (std::size_t s = 0; s + block <= v.size(); s += block) {
        double acc = 0.0;
        for (std::size_t j = s; j < s + block; ++j) acc += v[j];
        out.push_back(acc);
    }
    return out;
}

std::vector<double> time_bin_sums(std::span<const double> v, std::span<const double> ts, double seconds) {
    if (v.size() != ts.size()) fail(ErrorCategory::validation, "values and timestamps differ in length");
    if (!(seconds > 0.0)) fail(ErrorCategory::validation, "time bin width must be positive");
    std::map<long long, double> acc;
    for (std::size_t i = 0; i < v.size(); ++i) acc[static_cast<long long>(std::floor(ts[i] / seconds))] += v[i];
    std::vector<double> out;
    out.reserve(acc.size());
    for (const auto& [k, s] : acc) out.push_back(s);
    return out;
}

std::vector<double> return_residuals(const FilterState& fs, const TickSeries& series, const StaticParams& params,
                                     const AggregationSpec& spec) {
    const auto L2 = static_cast<std::size_t>(spec.L2);
    if (series.size() != L2 + fs.mu1.size()) fail(ErrorCategory::validation, "filter state does not match the series");
    const double sd = std::sqrt(params.sigma2);
    std::vector<double> out(fs.mu1.size());
    const auto r = series.returns();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (r[L2 + i] - fs.mu1[i]) / sd;
    return out;
}

std::vector<double> trade_residuals(const FilterState& fs, const TickSeries& series, const StaticParams& params,
                                    std::uint64_t seed, bool randomized, const AggregationSpec& spec) {
    const auto L2 = static_cast<std::size_t>(spec.L2);
    if (series.size() != L2 + fs.mu2.size()) fail(ErrorCategory::validation, "filter state does not match the series");
    const auto x = series.signs().subspan(L2);
    if (is_linear(params.variant)) {
        const double sd = std::sqrt(params.sigma2_x);
        std::vector<double> out(fs.mu2.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x[i] - fs.mu2[i]) / sd;
        return out;
    }
    return quantile_residuals(x, fs.pi, seed, randomized);
}

DiagnosticsReport diagnose(const TickSeries& series, const StaticParams& params, const FilterState& fs,
                           std::uint64_t seed, std::size_t block, std::optional<double> time_bin_seconds,
                           const AggregationSpec& spec) {
    DiagnosticsReport rep;
    rep.variant = params.variant;
    rep.block = block;
    const auto er = return_residuals(fs, series, params, spec);
    const auto ex = trade_residuals(fs, series, params, seed, true, spec);
    rep.trade_residuals_randomized = !is_linear(params.variant);
    rep.jb_return_p = jarque_bera(er).p_value;
    rep.jb_trade_p = jarque_bera(ex).p_value;
    rep.lm = arch_lm_suite(er);
    const auto agg = block_sums(er, block);
    rep.jb_return_block_p = jarque_bera(agg).p_value;
    std::vector<int> lags;
    for (int l : kDefaultLmLags)
        if (2 * static_cast<std::size_t>(l) + 10 < agg.size()) lags.push_back(l);
    rep.lm_block = arch_lm_suite(agg, lags);
    if (time_bin_seconds) {
        std::vector<double> ts;
        for (std::size_t i = static_cast<std::size_t>(spec.L2); i < series.size(); ++i) {
            if (!series[i].timestamp) fail(ErrorCategory::validation, "time-bin diagnostics need trade timestamps");
            ts.push_back(*series[i].timestamp);
        }
        rep.jb_return_time_p = jarque_bera(time_bin_sums(er, ts, *time_bin_seconds)).p_value;
    }
    return rep;
}

double bic(int K, std::size_t T, double loglik, BicConvention convention) {
    if (K < 1 || T < 1) fail(ErrorCategory::validation, "BIC needs positive K and T");
    const double penalty = static_cast<double>(K) * std::log(static_cast<double>(T));
    return convention == BicConvention::single ? penalty - loglik : penalty - 2.0 * loglik;
}

int parameter_count(Variant v, const AggregationSpec& spec) {
    return static_cast<int>(ParamLayout(v, spec.features(v)).size());
}

double osl(const TickSeries& day, const StaticParams& prev_params, double b0_init, const AggregationSpec& spec) {
    return filter(day, prev_params, b0_init, spec).loglik.total;
}

FilterBenchmark mae_star(std::span<const double> filtered, std::span<const double> truth) {
    if (filtered.size() != truth.size()) fail(ErrorCategory::validation, "paths differ in length");
    if (truth.empty()) fail(ErrorCategory::validation, "empty paths");
    double mae = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        mae += std::abs(filtered[i] - truth[i]);
        mean += truth[i];
    }
    const double n = static_cast<double>(truth.size());
    FilterBenchmark out;
    out.mae = mae / n;
    mean /= n;
    if (mean != 0.0) out.mae_star = out.mae / std::abs(mean);
    return out;
}

RegressionResult linear_regression(std::span<const double> y, const std::vector<std::span<const double>>& xs,
                                   const std::vector<std::string>& names) {
    if (names.size() != xs.size()) fail(ErrorCategory::validation, "one name per regressor is required");
    for (const auto& x : xs)
        if (x.size() != y.size()) fail(ErrorCategory::validation, "regressors differ in length from the response");
    const auto n = static_cast<Eigen::Index>(y.size());
    const auto K = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd X(n, K + 1);
    X.col(0).setOnes();
    for (Eigen::Index j = 0; j < K; ++j)
        X.col(j + 1) = Eigen::Map<const Eigen::VectorXd>(xs[static_cast<std::size_t>(j)].data(), n);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    const auto fit = ols(X, yv);
    RegressionResult r;
    r.n = y.size();
    r.names.push_back("const");
    r.names.insert(r.names.end(), names.begin(), names.end());
    for (Eigen::Index j = 0; j <= K; ++j) {
        r.gammas.push_back(fit.coef[j]);
        r.std_errors.push_back(fit.std_err[j]);
        r.p_values.push_back(fit.p_value[j]);
    }
    r.r2 = fit.r2;
    const Eigen::VectorXd yc = yv.array() - yv.mean();
    const double var_y = yc.squaredNorm();
    double explained = 0.0;
    for (Eigen::Index j = 1; j <= K; ++j) {
        const Eigen::VectorXd xc = X.col(j).array() - X.col(j).mean();
        const double share = var_y > 0.0 ? fit.coef[j] * xc.dot(yc) / var_y : 0.0;
        r.var_shares.push_back(share);
        explained += share;
    }
    r.var_shares.push_back(1.0 - explained);
    return r;
}

StateRegressions state_regressions(std::span<const double> lrcirf, std::span<const double> b0,
                                   std::span<const double> state) {
    if (lrcirf.size() != b0.size() || lrcirf.size() != state.size())
        fail(ErrorCategory::validation, "regression inputs differ in length");
    if (lrcirf.size() < 100) fail(ErrorCategory::insufficient_history, "state regressions need at least 100 points");
    std::vector<double> abs_state(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) abs_state[i] = std::abs(state[i]);
    StateRegressions out;
    const auto [lo, hi] = std::minmax_element(b0.begin(), b0.end());
    if (*hi > *lo) {
        out.lrcirf_on_impact_state = linear_regression(lrcirf, {b0, abs_state}, {"b0", "abs_state"});
        out.impact_on_state = linear_regression(b0, {abs_state}, {"abs_state"});
    }
    out.lrcirf_on_state = linear_regression(lrcirf, {abs_state}, {"abs_state"});
    return out;
}

}  // namespace sdamh
