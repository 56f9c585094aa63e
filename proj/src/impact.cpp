#include "sdamh/impact.hpp"

#include "sdamh/ols.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <map>
#include <string>

namespace sdamh {

void ImpactWindow::validate() const {
    if (M < 1) fail(ErrorCategory::validation, "impact window needs M >= 1");
    if (M % 2 == 0) fail(ErrorCategory::validation, "impact window length M must be odd");
}

std::string_view to_string(ImpactSource s) {
    switch (s) {
        case ImpactSource::empirical:
            return "empirical";
        case ImpactSource::model:
            return "model";
        case ImpactSource::regression:
            return "regression";
    }
    return "?";
}

namespace {

double window_sign_mean(std::span<const double> x, std::size_t end, std::size_t M) {
    double s = 0.0;
    for (std::size_t j = end - M; j < end; ++j) s += x[j];
    return s / static_cast<double>(M);
}

std::size_t omega_history(const ImpactWindow& w, const AggregationSpec& spec, OmegaMode mode) {
    const auto M = static_cast<std::size_t>(w.M);
    const std::size_t step = mode == OmegaMode::blocks ? M : 1;
    return M + static_cast<std::size_t>(spec.L2) * step;
}

}  // namespace

ImpactEstimate beta_sign_empirical(const TickSeries& series, const ImpactWindow& w) {
    w.validate();
    const auto M = static_cast<std::size_t>(w.M);
    if (w.t < M || w.t > series.size())
        fail(ErrorCategory::insufficient_history, "impact window does not fit in the series");
    const auto r = series.returns();
    const auto x = series.signs();
    double sr = 0.0, sx = 0.0;
    for (std::size_t j = w.t - M; j < w.t; ++j) {
        sr += r[j];
        sx += x[j];
    }
    if (sx == 0.0) fail(ErrorCategory::balanced_window, "window ending at trade " + std::to_string(w.t) + " is balanced");
    ImpactEstimate e;
    e.t = w.t;
    e.beta_sign = sr / sx;
    e.source = ImpactSource::empirical;
    return e;
}

OmegaWeights omega_weights(const TickSeries& series, const ImpactWindow& w, const AggregationSpec& spec,
                           OmegaMode mode) {
    w.validate();
    spec.validate();
    const auto M = static_cast<std::size_t>(w.M);
    const std::size_t step = mode == OmegaMode::blocks ? M : 1;
    if (w.t > series.size() || w.t < omega_history(w, spec, mode))
        fail(ErrorCategory::insufficient_history,
             "omega weights at trade " + std::to_string(w.t) + " need " +
                 std::to_string(omega_history(w, spec, mode)) + " trades of history");
    const auto x = series.signs();
    OmegaWeights out;
    const auto L2 = static_cast<std::size_t>(spec.L2);
    out.xbar.resize(L2 + 1);
    for (std::size_t i = 0; i <= L2; ++i) out.xbar[i] = window_sign_mean(x, w.t - i * step, M);
    const double x0 = out.xbar[0];
    if (x0 == 0.0) fail(ErrorCategory::balanced_window, "window ending at trade " + std::to_string(w.t) + " is balanced");
    out.w1 = out.xbar[1] / x0;
    double s = 0.0;
    for (std::size_t i = 2; i <= static_cast<std::size_t>(spec.L1); ++i) s += out.xbar[i];
    out.wL1 = s / static_cast<double>(spec.L1 - 1) / x0;
    s = 0.0;
    for (std::size_t i = static_cast<std::size_t>(spec.L1) + 1; i <= L2; ++i) s += out.xbar[i];
    out.wL2 = s / static_cast<double>(spec.L2 - spec.L1 - 1) / x0;
    return out;
}

ImpactEstimate beta_sign_model(const StaticParams& params, const FilterState* fs, const TickSeries& series,
                               const ImpactWindow& w, const AggregationSpec& spec, OmegaMode mode,
                               bool flow_weighted, const BandEstimate* bands) {
    params.validate();
    if (!is_aggregated(params.variant) || is_linear(params.variant))
        fail(ErrorCategory::variant, "the permanent-impact formula needs AMH or a score-driven variant");
    const double den = 1.0 - params.a[0] - params.a[1] - params.a[2];
    if (std::abs(den) < 1e-8)
        fail(ErrorCategory::domain, "return persistence a1 + a10bar + a100bar is too close to 1");
    const OmegaWeights om = omega_weights(series, w, spec, mode);
    const auto M = static_cast<std::size_t>(w.M);
    const auto L2 = static_cast<std::size_t>(spec.L2);
    const auto x = series.signs();

    ImpactEstimate e;
    e.t = w.t;
    e.source = ImpactSource::model;
    const double lagged = params.b[0] * om.w1 + params.b[1] * om.wL1 + params.b[2] * om.wL2;
    auto average = [&](const std::vector<double>& path, bool flow) {
        double s = 0.0;
        for (std::size_t j = w.t - M; j < w.t; ++j) s += flow ? path[j - L2] * x[j] : path[j - L2];
        s /= static_cast<double>(M);
        return flow ? s / om.xbar[0] : s;
    };
    if (is_score_driven(params.variant)) {
        if (fs == nullptr) fail(ErrorCategory::validation, "score-driven impact needs a filtered impact path");
        if (w.t < M + L2 || w.t - L2 > fs->b0_path.size())
            fail(ErrorCategory::insufficient_history, "filtered impact path does not cover the window");
        e.b0_bar = average(fs->b0_path, false);
        e.b0_flow = average(fs->b0_path, true);
        if (bands != nullptr) {
            if (bands->lower.size() != fs->b0_path.size() || bands->upper.size() != fs->b0_path.size())
                fail(ErrorCategory::validation, "bands do not match the filtered path");
            const double lo = average(bands->lower, flow_weighted);
            const double hi = average(bands->upper, flow_weighted);
            e.band_lo = (std::min(lo, hi) + lagged) / den;
            e.band_hi = (std::max(lo, hi) + lagged) / den;
            if (den < 0.0) std::swap(*e.band_lo, *e.band_hi);
        }
    } else {
        e.b0_bar = params.b0;
        e.b0_flow = params.b0;
    }
    e.beta_sign = ((flow_weighted ? e.b0_flow : e.b0_bar) + lagged) / den;
    return e;
}

ImpactEstimate beta_dollar(const ImpactEstimate& est, double qbar, double vbar) {
    if (!(qbar > 0.0) || !(vbar > 0.0))
        fail(ErrorCategory::validation, "average price and volume must be positive");
    ImpactEstimate out = est;
    out.beta_dollar = qbar / vbar * est.beta_sign;
    return out;
}

double ewma_mean(std::span<const double> values, double half_life) {
    if (values.empty()) fail(ErrorCategory::validation, "EWMA of an empty sequence");
    if (!(half_life > 0.0)) fail(ErrorCategory::validation, "EWMA half-life must be positive");
    const double lambda = std::exp2(-1.0 / half_life);
    double num = 0.0, den = 0.0, w = 1.0;
    for (std::size_t i = values.size(); i-- > 0;) {
        num += w * values[i];
        den += w;
        w *= lambda;
    }
    return num / den;
}

ImpactEstimate beta_regression(const TickSeries& series, const BinSpec& bins) {
    if (!(bins.size > 0.0)) fail(ErrorCategory::validation, "bin size must be positive");
    std::vector<double> R, X;
    const auto r = series.returns();
    const auto x = series.signs();
    if (bins.kind == BinSpec::Kind::trades) {
        const auto M = static_cast<std::size_t>(bins.size);
        if (M < 1 || static_cast<double>(M) != bins.size)
            fail(ErrorCategory::validation, "trade-count bins need a positive integer size");
        for (std::size_t s = 0; s + M <= series.size(); s += M) {
            double sr = 0.0, sx = 0.0;
            for (std::size_t j = s; j < s + M; ++j) {
                sr += r[j];
                sx += x[j];
            }
            R.push_back(sr);
            X.push_back(sx);
        }
    } else {
        std::map<long long, std::pair<double, double>> acc;
        for (std::size_t j = 0; j < series.size(); ++j) {
            const auto& ts = series[j].timestamp;
            if (!ts) fail(ErrorCategory::validation, "time bins need trade timestamps");
            auto& cell = acc[static_cast<long long>(std::floor(*ts / bins.size))];
            cell.first += r[j];
            cell.second += x[j];
        }
        for (const auto& [key, cell] : acc) {
            R.push_back(cell.first);
            X.push_back(cell.second);
        }
    }
    if (R.size() < 10)
        fail(ErrorCategory::insufficient_history, "regression needs at least 10 bins, got " + std::to_string(R.size()));
    const auto n = static_cast<Eigen::Index>(R.size());
    const Eigen::Map<const Eigen::VectorXd> xv(X.data(), n);
    const double xm = xv.mean();
    if ((xv.array() - xm).square().sum() == 0.0)
        fail(ErrorCategory::numerical, "binned order flow has zero variance");
    Eigen::MatrixXd D(n, 2);
    D.col(0).setOnes();
    D.col(1) = xv;
    const auto fit = ols(D, Eigen::Map<const Eigen::VectorXd>(R.data(), n));
    ImpactEstimate e;
    e.source = ImpactSource::regression;
    e.t = series.size();
    e.beta_sign = fit.coef[1];
    e.std_error = fit.std_err[1];
    e.n_bins = R.size();
    const boost::math::students_t tdist(static_cast<double>(n - 2));
    const double q = boost::math::quantile(tdist, 0.975);
    e.band_lo = e.beta_sign - q * e.std_error;
    e.band_hi = e.beta_sign + q * e.std_error;
    return e;
}

double expected_shortfall(double Q, double T_exec, double N, double beta, double k, bool large_n) {
    if (Q < 0.0 || !(T_exec > 0.0) || N < 1.0 || k < 0.0)
        fail(ErrorCategory::validation, "shortfall needs Q >= 0, T_exec > 0, N >= 1 and k >= 0");
    const double slices = large_n ? 1.0 : 1.0 - 1.0 / N;
    return -Q * Q * (beta / 2.0 * slices + k / T_exec);
}

ImpactSeries impact_series(const StaticParams& params, const FilterState* fs, const TickSeries& series, int M,
                           const AggregationSpec& spec, OmegaMode mode, const BandEstimate* bands) {
    ImpactWindow w{M, 0};
    w.validate();
    std::size_t start = omega_history(w, spec, mode);
    if (is_score_driven(params.variant)) start = std::max(start, static_cast<std::size_t>(M + spec.L2));
    ImpactSeries out;
    for (std::size_t t = start; t <= series.size(); t += static_cast<std::size_t>(M)) {
        w.t = t;
        try {
            out.rows.push_back(beta_sign_model(params, fs, series, w, spec, mode, false, bands));
        } catch (const Error& err) {
            if (err.category() != ErrorCategory::balanced_window) throw;
            ++out.skipped;
        }
    }
    return out;
}

}  // namespace sdamh
