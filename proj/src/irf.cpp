#include "sdamh/irf.hpp"

#include "sdamh/models.hpp"
#include "sdamh/optimize.hpp"
#include "sdamh/simulate.hpp"

#include <boost/math/distributions/normal.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdamh {

RawLags unroll_lags(const StaticParams& p, const AggregationSpec& spec) {
    spec.validate();
    RawLags out;
    if (!is_aggregated(p.variant)) {
        out.a = p.a;
        out.b = p.b;
        out.c = p.c;
        out.d = p.d;
        return out;
    }
    const auto L2 = static_cast<std::size_t>(spec.L2);
    const double w1 = 1.0 / static_cast<double>(spec.L1 - 1);
    const double w2 = 1.0 / static_cast<double>(spec.L2 - spec.L1 - 1);
    auto unroll = [&](const std::vector<double>& v) {
        std::vector<double> raw(L2);
        raw[0] = v[0];
        for (std::size_t lag = 2; lag <= L2; ++lag)
            raw[lag - 1] = lag <= static_cast<std::size_t>(spec.L1) ? v[1] * w1 : v[2] * w2;
        return raw;
    };
    out.a = unroll(p.a);
    out.b = unroll(p.b);
    out.c = unroll(p.c);
    out.d = unroll(p.d);
    return out;
}

Eigen::MatrixXd companion_matrix(const StaticParams& p, const AggregationSpec& spec) {
    if (!is_linear(p.variant))
        fail(ErrorCategory::variant, "the closed-form IRF is available for the linear variants H and AH only");
    const RawLags raw = unroll_lags(p, spec);
    const auto P = static_cast<Eigen::Index>(raw.a.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * P, 2 * P);
    for (Eigen::Index i = 0; i < P; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        // reduced form: substitute the sign equation into the return equation
        A(0, 2 * i) = raw.a[ui] + p.b0 * raw.c[ui];
        A(0, 2 * i + 1) = raw.b[ui] + p.b0 * raw.d[ui];
        A(1, 2 * i) = raw.c[ui];
        A(1, 2 * i + 1) = raw.d[ui];
    }
    for (Eigen::Index i = 2; i < 2 * P; ++i) A(i, i - 2) = 1.0;
    return A;
}

LinearIrf irf_linear(const StaticParams& p, int H, double delta_x, const AggregationSpec& spec) {
    if (H < 0) fail(ErrorCategory::validation, "horizon must be non-negative");
    const Eigen::MatrixXd A = companion_matrix(p, spec);
    LinearIrf out;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    out.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
    out.stationary = out.spectral_radius < 1.0;
    if (!out.stationary)
        out.warning = "companion spectral radius " + std::to_string(out.spectral_radius) +
                      " is not below 1; the responses do not die out";
    Eigen::VectorXd y = Eigen::VectorXd::Zero(A.rows());
    y[0] = p.b0 * delta_x;
    y[1] = delta_x;
    double cum = 0.0;
    for (int h = 0; h <= H; ++h) {
        if (h > 0) y = A * y;
        cum += y[0];
        out.irf.push_back(y[0]);
        out.cirf.push_back(cum);
    }
    return out;
}

namespace {

struct FutureContext {
    const StaticParams* params;
    const AggregationSpec* spec;
    std::vector<double> hist_r;  // the L2 trades before t
    std::vector<double> hist_x;
    double b0_t = 0.0;
    int H = 20;
    double sigma = 1.0;
    double sigma_x = 1.0;
};

double clamp_unit(double u) { return std::clamp(u, 1e-16, 1.0 - 1e-16); }

// Simulates r_t .. r_{t+H}; `shock` is the forced sign (or additive shock
// for the linear variants), NaN for the unshocked branch.
void run_future(const FutureContext& ctx, const ShockStream& s, double shock, std::vector<double>& r,
                std::vector<double>& x, std::vector<double>& out) {
    const auto& p = *ctx.params;
    const std::size_t L2 = ctx.hist_r.size();
    std::copy(ctx.hist_r.begin(), ctx.hist_r.end(), r.begin());
    std::copy(ctx.hist_x.begin(), ctx.hist_x.end(), x.begin());
    double fr[128], fx[128];
    double b0 = ctx.b0_t;
    const bool linear = is_linear(p.variant);
    static const boost::math::normal_distribution<double> std_normal;
    for (int h = 0; h <= ctx.H; ++h) {
        const std::size_t pos = L2 + static_cast<std::size_t>(h);
        lag_features(std::span<const double>(r.data(), pos + 1), std::span<const double>(x.data(), pos + 1),
                     *ctx.spec, p.variant, pos, fr, fx);
        const double state = state_mean(p, fr, fx);
        const double mu2 = sign_mean(p, fr, fx);
        const auto uh = static_cast<std::size_t>(h);
        double xt;
        if (linear) {
            xt = mu2 + ctx.sigma_x * boost::math::quantile(std_normal, clamp_unit(s.uniforms[uh]));
            if (h == 0 && !std::isnan(shock)) xt += shock;
        } else if (h == 0 && !std::isnan(shock)) {
            xt = shock;
        } else {
            xt = s.uniforms[uh] < inv_logit(mu2) ? 1.0 : -1.0;
        }
        const double mu1 = state + b0 * xt;
        const double rt = mu1 + ctx.sigma * s.gaussians[uh];
        r[pos] = rt;
        x[pos] = xt;
        out[uh] = rt;
        b0 = next_impact(p, b0, xt * (rt - mu1));
    }
}

}  // namespace

CirfResult cirf_monte_carlo(const TickSeries& series, const StaticParams& params, const FilterState* filter_state,
                            std::size_t t, const CirfOptions& o) {
    params.validate();
    o.spec.validate();
    if (params.k() != o.spec.features(params.variant))
        fail(ErrorCategory::validation, "parameter lag layout does not match the aggregation spec");
    if (params.k() > 128) fail(ErrorCategory::validation, "too many raw lags");
    if (o.H < 0) fail(ErrorCategory::validation, "horizon must be non-negative");
    if (o.S < 1) fail(ErrorCategory::validation, "need at least one simulated path");
    if (o.antithetic && (o.S < 2 || o.S % 2 != 0))
        fail(ErrorCategory::validation, "antithetic sampling needs an even number of paths (at least 2)");
    if (o.delta_x != 1.0 && o.delta_x != -1.0 && !is_linear(params.variant))
        fail(ErrorCategory::validation, "the trade-sign shock must be +1 or -1");
    const auto L2 = static_cast<std::size_t>(o.spec.L2);
    if (t < L2 || t > series.size())
        fail(ErrorCategory::insufficient_history,
             "CIRF at trade " + std::to_string(t) + " needs " + std::to_string(L2) + " trades of history");

    FutureContext ctx;
    ctx.params = &params;
    ctx.spec = &o.spec;
    ctx.H = o.H;
    ctx.sigma = std::sqrt(params.sigma2);
    ctx.sigma_x = std::sqrt(params.sigma2_x);
    const auto rs = series.returns();
    const auto xs = series.signs();
    ctx.hist_r.assign(rs.begin() + static_cast<std::ptrdiff_t>(t - L2), rs.begin() + static_cast<std::ptrdiff_t>(t));
    ctx.hist_x.assign(xs.begin() + static_cast<std::ptrdiff_t>(t - L2), xs.begin() + static_cast<std::ptrdiff_t>(t));
    ctx.b0_t = params.b0;
    if (is_score_driven(params.variant)) {
        if (filter_state == nullptr) fail(ErrorCategory::validation, "score-driven CIRF needs a filtered impact path");
        const std::size_t i = t - L2;
        if (i < filter_state->b0_path.size())
            ctx.b0_t = filter_state->b0_path[i];
        else if (i == filter_state->b0_path.size())
            ctx.b0_t = filter_state->b0_next;
        else
            fail(ErrorCategory::validation, "filtered impact path does not reach trade " + std::to_string(t));
    }

    const auto n_h = static_cast<std::size_t>(o.H + 1);
    std::vector<double> rbuf(L2 + n_h), xbuf(L2 + n_h);
    std::vector<double> out_s(n_h), out_u(n_h), diff(n_h);
    const int units = o.antithetic ? o.S / 2 : o.S;
    std::vector<double> irf_sum(n_h, 0.0), cum_mean(n_h, 0.0), cum_m2(n_h, 0.0);

    auto one_path = [&](const ShockStream& shocked, const ShockStream& plain, std::vector<double>& d) {
        run_future(ctx, shocked, o.delta_x, rbuf, xbuf, out_s);
        run_future(ctx, plain, std::numeric_limits<double>::quiet_NaN(), rbuf, xbuf, out_u);
        for (std::size_t h = 0; h < n_h; ++h) d[h] = out_s[h] - out_u[h];
    };
    auto streams = [&](std::uint64_t j) {
        if (o.mode == CirfMode::common) {
            auto s = ShockStream::generate(substream_seed(o.seed, j), n_h);
            return std::pair{s, s};
        }
        return std::pair{ShockStream::generate(substream_seed(o.seed, 2 * j), n_h),
                         ShockStream::generate(substream_seed(o.seed, 2 * j + 1), n_h)};
    };

    std::vector<double> d2(n_h);
    for (int u = 0; u < units; ++u) {
        const auto [sa, sb] = streams(static_cast<std::uint64_t>(u));
        one_path(sa, sb, diff);
        if (o.antithetic) {
            one_path(antithetic_pair(sa), antithetic_pair(sb), d2);
            for (std::size_t h = 0; h < n_h; ++h) diff[h] = 0.5 * (diff[h] + d2[h]);
        }
        double cum = 0.0;
        const double n = static_cast<double>(u + 1);
        for (std::size_t h = 0; h < n_h; ++h) {
            irf_sum[h] += diff[h];
            cum += diff[h];
            const double delta = cum - cum_mean[h];
            cum_mean[h] += delta / n;
            cum_m2[h] += delta * (cum - cum_mean[h]);
        }
    }

    CirfResult res;
    res.t = t;
    res.delta_x = o.delta_x;
    res.n_sim = o.S;
    res.antithetic = o.antithetic;
    double cum = 0.0;
    for (std::size_t h = 0; h < n_h; ++h) {
        res.horizons.push_back(static_cast<int>(h));
        const double m = irf_sum[h] / static_cast<double>(units);
        const double prev = cum;
        cum += m;
        res.cirf.push_back(cum);
        res.irf.push_back(h == 0 ? cum : cum - prev);
        const double var = units > 1 ? cum_m2[h] / static_cast<double>(units - 1) : 0.0;
        res.mc_std.push_back(std::sqrt(std::max(var, 0.0) / static_cast<double>(units)));
    }
    res.lrcirf = res.cirf.back();
    res.lrcirf_std = res.mc_std.back();
    return res;
}

LrcirfPath lrcirf_series(const TickSeries& series, const StaticParams& params, const FilterState* filter_state,
                         const CirfOptions& options, std::size_t thin) {
    if (thin < 1) fail(ErrorCategory::validation, "thinning step must be at least 1");
    const auto L2 = static_cast<std::size_t>(options.spec.L2);
    LrcirfPath out;
    CirfOptions o = options;
    for (std::size_t t = L2; t < series.size(); t += thin) {
        o.seed = substream_seed(options.seed, t);
        const auto r = cirf_monte_carlo(series, params, filter_state, t, o);
        out.t.push_back(t);
        out.lrcirf.push_back(r.lrcirf);
        out.mc_std.push_back(r.lrcirf_std);
    }
    return out;
}

namespace {

struct LinearPart {
    double c = 0.0;
    double kappa = 0.0;
    double rss = std::numeric_limits<double>::infinity();
};

LinearPart solve_linear(const std::vector<double>& y, double phi) {
    double s1 = 0, se = 0, see = 0, sy = 0, sey = 0;
    for (std::size_t h = 0; h < y.size(); ++h) {
        const double e = std::exp(-phi * static_cast<double>(h));
        s1 += 1.0;
        se += e;
        see += e * e;
        sy += y[h];
        sey += e * y[h];
    }
    LinearPart out;
    const double det = s1 * see - se * se;
    if (!(std::abs(det) > 1e-14 * s1 * see)) return out;
    out.c = (see * sy - se * sey) / det;
    out.kappa = (s1 * sey - se * sy) / det;
    out.rss = 0.0;
    for (std::size_t h = 0; h < y.size(); ++h) {
        const double res = y[h] - out.c - out.kappa * std::exp(-phi * static_cast<double>(h));
        out.rss += res * res;
    }
    return out;
}

}  // namespace

ExpFit fit_exponential(const std::vector<double>& y) {
    if (y.size() < 4) fail(ErrorCategory::validation, "exponential fit needs at least 4 horizon points");
    for (double v : y)
        if (!std::isfinite(v)) fail(ErrorCategory::domain, "CIRF values must be finite");
    ExpFit fit;
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double scale = std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)));
    if (*hi - *lo <= 1e-12 * scale) {
        fit.c = y.back();
        fit.kappa = 0.0;
        fit.phi = 1.0;
        fit.identified = false;
        return fit;
    }
    // phi enters nonlinearly; c and kappa are profiled out by least squares.
    constexpr double kLo = -7.0, kHi = 4.0, kStep = 0.05;
    double best_lp = 0.0, best = std::numeric_limits<double>::infinity();
    for (double lp = kLo; lp <= kHi + 1e-12; lp += kStep) {
        const double rss = solve_linear(y, std::exp(lp)).rss;
        if (rss < best) {
            best = rss;
            best_lp = lp;
        }
    }
    const double lp = optim::minimize_scalar([&](double v) { return solve_linear(y, std::exp(v)).rss; },
                                             best_lp - kStep, best_lp + kStep, 1e-13);
    fit.phi = std::exp(lp);
    const auto lin = solve_linear(y, fit.phi);
    fit.c = lin.c;
    fit.kappa = lin.kappa;
    fit.rss = lin.rss;
    fit.identified = lp > kLo + kStep && lp < kHi - kStep && std::abs(fit.kappa) > 1e-12 * scale;
    return fit;
}

}  // namespace sdamh
