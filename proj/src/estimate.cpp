#include "sdamh/estimate.hpp"

#include "sdamh/ols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace sdamh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logit(double p) { return std::log(p) - std::log1p(-p); }

void check_range(const ParamRange& r, const char* name) {
    if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
        fail(ErrorCategory::validation, std::string("search range for ") + name + " needs lo < hi");
}

bool inside(const ParamRange& r, double v) { return v > r.lo && v < r.hi; }

// Log-likelihood with the impact held at p.b0; -inf when the clamp budget
// is exceeded.
double constant_path_loglik(const Design& d, const StaticParams& p) {
    double total = 0.0;
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        const auto e = evaluate_obs(p, d.fr_row(i), d.fx_row(i), d.r[i], d.x[i], p.b0);
        total += e.loglik;
        clamped += e.clamped ? 1 : 0;
    }
    if (!std::isfinite(total) || static_cast<double>(clamped) > kMaxClampShare * static_cast<double>(d.n()))
        return kNegInf;
    return total;
}

// Per-coordinate step sizes of roughly one standard error: the step at
// which the second difference of f is of order one.
Eigen::VectorXd curvature_scales(const optim::Objective& f, const Eigen::VectorXd& z) {
    const double f0 = f(z);
    Eigen::VectorXd s(z.size());
    Eigen::VectorXd zp = z;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double h = 1e-4 * std::max(1.0, std::abs(z[i]));
        double scale = h;
        for (int tries = 0; tries < 16; ++tries) {
            zp[i] = z[i] + h;
            const double fp = f(zp);
            zp[i] = z[i] - h;
            const double fm = f(zp);
            zp[i] = z[i];
            const double d2 = fp + fm - 2.0 * f0;
            if (!std::isfinite(d2)) {
                h *= 0.1;
                continue;
            }
            if (std::abs(d2) < 1e-3 && h < 10.0) {
                h *= 10.0;
                continue;
            }
            if (d2 > 1e3 && h > 1e-14) {
                h *= 0.1;
                continue;
            }
            scale = d2 > 0.0 ? h / std::sqrt(d2) : h;
            break;
        }
        s[i] = scale;
    }
    return s;
}

// Hessian of f at z, differenced in coordinates rescaled by s.
Eigen::MatrixXd scaled_hessian(const optim::Objective& f, const Eigen::VectorXd& z, const Eigen::VectorXd& s) {
    const optim::Objective g = [&](const Eigen::VectorXd& u) {
        return f(z + s.cwiseProduct(u));
    };
    return optim::numeric_hessian(g, Eigen::VectorXd::Zero(z.size()), 1e-3, 1e-2);
}

}  // namespace

void InitSearchSpec::validate() const {
    if (n_draws < 1) fail(ErrorCategory::validation, "init search needs at least one draw");
    check_range(mu, "mu");
    check_range(a, "a");
    check_range(b, "b");
    check_range(c, "c");
    check_range(d, "d");
    check_range(sigma, "sigma");
    check_range(alpha, "alpha");
    check_range(omega, "omega");
    check_range(beta, "beta");
    if (sigma.lo < 0.0) fail(ErrorCategory::validation, "sigma range must be non-negative");
    if (alpha.lo < 0.0) fail(ErrorCategory::validation, "alpha range must be non-negative");
}

std::vector<std::string> range_offenders(const InitSearchSpec& spec, const StaticParams& p) {
    const auto names = param_names(p.variant, p.k());
    std::vector<std::string> out;
    std::size_t at = 0;
    auto check = [&](const ParamRange& r, double v) {
        if (!inside(r, v)) out.push_back(names[at]);
        ++at;
    };
    check(spec.mu, p.mu1);
    check(spec.mu, p.mu2);
    for (double v : p.a) check(spec.a, v);
    for (double v : p.b) check(spec.b, v);
    for (double v : p.c) check(spec.c, v);
    for (double v : p.d) check(spec.d, v);
    check(spec.b, p.b0);
    check(spec.sigma, std::sqrt(p.sigma2));
    if (is_linear(p.variant)) check(spec.sigma, std::sqrt(p.sigma2_x));
    if (p.variant == Variant::SdAr) {
        check(spec.omega, p.omega);
        check(spec.beta, p.beta);
    } else if (p.variant == Variant::SdInt) {
        at += 2;
    }
    if (is_score_driven(p.variant)) check(spec.alpha, p.alpha);
    return out;
}

StaticParams init_search(const Design& design, const InitSearchSpec& spec, Variant variant) {
    spec.validate();
    if (design.variant != variant) fail(ErrorCategory::validation, "design was built for a different variant");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](const ParamRange& r) { return r.lo + (r.hi - r.lo) * unit(rng); };

    const auto k = static_cast<std::size_t>(design.k);
    StaticParams cand;
    cand.variant = variant;
    cand.a.resize(k);
    cand.b.resize(k);
    cand.c.resize(k);
    cand.d.resize(k);
    StaticParams best = cand;
    double best_ll = kNegInf;
    for (std::size_t n = 0; n < spec.n_draws; ++n) {
        cand.mu1 = draw(spec.mu);
        cand.mu2 = draw(spec.mu);
        for (auto& v : cand.a) v = draw(spec.a);
        for (auto& v : cand.b) v = draw(spec.b);
        for (auto& v : cand.c) v = draw(spec.c);
        for (auto& v : cand.d) v = draw(spec.d);
        cand.b0 = draw(spec.b);
        const double sd = draw(spec.sigma);
        cand.sigma2 = sd * sd;
        if (is_linear(variant)) {
            const double sx = draw(spec.sigma);
            cand.sigma2_x = sx * sx;
        }
        if (variant == Variant::SdAr) {
            cand.omega = draw(spec.omega);
            cand.beta = draw(spec.beta);
        }
        if (is_score_driven(variant)) cand.alpha = draw(spec.alpha);
        if (!(cand.sigma2 > 0.0) || (is_linear(variant) && !(cand.sigma2_x > 0.0))) continue;
        const double ll = constant_path_loglik(design, cand);
        if (ll > best_ll || n == 0) {
            if (std::isfinite(ll)) {
                best_ll = ll;
                best = cand;
            }
        }
    }
    if (!std::isfinite(best_ll))
        fail(ErrorCategory::numerical, "every init-search candidate produced a non-finite likelihood");
    return best;
}

StaticParams init_search(const TickSeries& series, const InitSearchSpec& spec, Variant variant,
                         const AggregationSpec& agg) {
    return init_search(build_design(series, variant, agg), spec, variant);
}

OnlineFilter::OnlineFilter(StaticParams params, double b0_init, AggregationSpec spec)
    : params_(std::move(params)), spec_(spec), b0_(b0_init) {
    params_.validate();
    spec_.validate();
    if (params_.k() != spec_.features(params_.variant))
        fail(ErrorCategory::validation, "parameter lag layout does not match the aggregation spec");
    state_.b0_init = b0_init;
    state_.b0_next = b0_init;
    state_.loglik.working_gaussian = is_linear(params_.variant);
    fr_.resize(static_cast<std::size_t>(params_.k()));
    fx_.resize(static_cast<std::size_t>(params_.k()));
}

bool OnlineFilter::push(double r, double x) {
    if (!std::isfinite(r)) fail(ErrorCategory::domain, "non-finite return");
    if (x != 1.0 && x != -1.0) fail(ErrorCategory::domain, "trade sign must be +1 or -1");
    r_.push_back(r);
    x_.push_back(x);
    const std::size_t t = r_.size() - 1;
    if (t < static_cast<std::size_t>(spec_.L2)) return false;
    lag_features(r_, x_, spec_, params_.variant, t, fr_.data(), fx_.data());
    const auto e = evaluate_obs(params_, fr_.data(), fx_.data(), r, x, b0_);
    state_.b0_path.push_back(b0_);
    state_.scores.push_back(e.scaled_score);
    state_.state.push_back(e.state);
    state_.mu1.push_back(e.mu1);
    state_.mu2.push_back(e.mu2);
    state_.pi.push_back(e.pi);
    state_.loglik.per_obs.push_back(e.loglik);
    state_.loglik.total += e.loglik;
    state_.loglik.n_obs += 1;
    state_.loglik.clamped += e.clamped ? 1 : 0;
    b0_ = next_impact(params_, b0_, e.scaled_score);
    state_.b0_next = b0_;
    return true;
}

FilterState filter(const TickSeries& series, const StaticParams& params, double b0_init,
                   const AggregationSpec& spec) {
    OnlineFilter f(params, b0_init, spec);
    const auto r = series.returns();
    const auto x = series.signs();
    for (std::size_t i = 0; i < series.size(); ++i) f.push(r[i], x[i]);
    return f.state();
}

double forward_backward_init(const TickSeries& series, const StaticParams& params, double f0,
                             const AggregationSpec& spec) {
    if (params.variant != Variant::SdInt)
        fail(ErrorCategory::variant, "forward-backward initialization is defined for SDAMH-INT");
    params.validate();
    const Design d = build_design(series, params.variant, spec);
    double F = f0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        const auto e = evaluate_obs(params, d.fr_row(i), d.fx_row(i), d.r[i], d.x[i], F);
        F += params.alpha * e.scaled_score;
    }
    double B = F;
    for (std::size_t i = d.n(); i-- > 0;) {
        const auto e = evaluate_obs(params, d.fr_row(i), d.fx_row(i), d.r[i], d.x[i], B);
        B += params.alpha * e.scaled_score;
    }
    return B;
}

ParamLayout::ParamLayout(Variant v, int k_) : variant(v), k(k_) {
    if (k < 1) fail(ErrorCategory::validation, "lag layout needs k >= 1");
    if (is_aggregated(v) && k != 3) fail(ErrorCategory::validation, "aggregated variants carry 3 lags");
}

std::vector<std::string> ParamLayout::names() const {
    auto all = param_names(variant, k);
    if (variant == Variant::SdInt)
        std::erase_if(all, [](const std::string& n) { return n == "omega" || n == "beta"; });
    return all;
}

Eigen::Index ParamLayout::size() const { return static_cast<Eigen::Index>(names().size()); }

Eigen::VectorXd ParamLayout::natural(const StaticParams& p) const {
    if (p.k() != k) fail(ErrorCategory::validation, "parameter lag layout does not match");
    std::vector<double> v{p.mu1, p.mu2};
    for (const auto* fam : {&p.a, &p.b, &p.c, &p.d}) v.insert(v.end(), fam->begin(), fam->end());
    v.push_back(p.b0);
    v.push_back(p.sigma2);
    if (is_linear(variant)) v.push_back(p.sigma2_x);
    if (variant == Variant::SdAr) {
        v.push_back(p.omega);
        v.push_back(p.beta);
    }
    if (is_score_driven(variant)) v.push_back(p.alpha);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

StaticParams ParamLayout::from_natural(const Eigen::VectorXd& v, const StaticParams& tmpl) const {
    if (v.size() != size()) fail(ErrorCategory::validation, "parameter vector has the wrong length");
    StaticParams p = tmpl;
    p.variant = variant;
    Eigen::Index at = 0;
    p.mu1 = v[at++];
    p.mu2 = v[at++];
    for (auto* fam : {&p.a, &p.b, &p.c, &p.d}) {
        fam->resize(static_cast<std::size_t>(k));
        for (auto& c : *fam) c = v[at++];
    }
    p.b0 = v[at++];
    p.sigma2 = v[at++];
    if (is_linear(variant)) p.sigma2_x = v[at++];
    if (variant == Variant::SdAr) {
        p.omega = v[at++];
        p.beta = v[at++];
    } else {
        p.omega = 0.0;
        p.beta = 1.0;
    }
    p.alpha = is_score_driven(variant) ? v[at++] : 0.0;
    return p;
}

Eigen::VectorXd ParamLayout::to_free(const StaticParams& p) const {
    Eigen::VectorXd z = natural(p);
    const Eigen::Index s2 = 2 + 4 * k + 1;
    z[s2] = std::log(p.sigma2);
    Eigen::Index at = s2 + 1;
    if (is_linear(variant)) z[at++] = std::log(p.sigma2_x);
    if (variant == Variant::SdAr) {
        ++at;
        const double q = std::clamp((p.beta + 1.0) / 2.0, 1e-12, 1.0 - 1e-12);
        z[at++] = logit(q);
    }
    if (is_score_driven(variant)) z[at] = logit(std::clamp(p.alpha / kAlphaMax, 1e-12, 1.0 - 1e-12));
    return z;
}

StaticParams ParamLayout::from_free(const Eigen::VectorXd& z, const StaticParams& tmpl) const {
    Eigen::VectorXd v = z;
    const Eigen::Index s2 = 2 + 4 * k + 1;
    v[s2] = std::exp(z[s2]);
    Eigen::Index at = s2 + 1;
    if (is_linear(variant)) {
        v[at] = std::exp(z[at]);
        ++at;
    }
    if (variant == Variant::SdAr) {
        ++at;
        v[at] = 2.0 * inv_logit(z[at]) - 1.0;
        ++at;
    }
    if (is_score_driven(variant)) v[at] = kAlphaMax * inv_logit(z[at]);
    return from_natural(v, tmpl);
}

namespace {

// d natural / d free, per coordinate.
Eigen::VectorXd free_jacobian(const ParamLayout& layout, const Eigen::VectorXd& z) {
    Eigen::VectorXd j = Eigen::VectorXd::Ones(z.size());
    const Eigen::Index s2 = 2 + 4 * layout.k + 1;
    j[s2] = std::exp(z[s2]);
    Eigen::Index at = s2 + 1;
    if (is_linear(layout.variant)) {
        j[at] = std::exp(z[at]);
        ++at;
    }
    if (layout.variant == Variant::SdAr) {
        ++at;
        const double q = inv_logit(z[at]);
        j[at] = 2.0 * q * (1.0 - q);
        ++at;
    }
    if (is_score_driven(layout.variant)) {
        const double q = inv_logit(z[at]);
        j[at] = ParamLayout::kAlphaMax * q * (1.0 - q);
    }
    return j;
}

FitResult fit_ols(const TickSeries& series, const Design& d, const FitOptions& options) {
    const auto n = static_cast<Eigen::Index>(d.n());
    const Eigen::Index k = d.k;
    Eigen::MatrixXd Xs(n, 1 + 2 * k);
    Eigen::VectorXd ys(n), yr(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        Xs(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            Xs(i, 1 + j) = d.fr_row(ui)[j];
            Xs(i, 1 + k + j) = d.fx_row(ui)[j];
        }
        ys[i] = d.x[ui];
        yr[i] = d.r[ui];
    }
    Eigen::MatrixXd Xr(n, 2 + 2 * k);
    Xr << Xs, Eigen::Map<const Eigen::VectorXd>(d.x.data(), n);
    const auto ret = ols(Xr, yr);
    const auto sgn = ols(Xs, ys);

    StaticParams p = StaticParams::zeros(d.variant, options.spec);
    p.mu1 = ret.coef[0];
    p.mu2 = sgn.coef[0];
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        p.a[uj] = ret.coef[1 + j];
        p.b[uj] = ret.coef[1 + k + j];
        p.c[uj] = sgn.coef[1 + j];
        p.d[uj] = sgn.coef[1 + k + j];
    }
    p.b0 = ret.coef[1 + 2 * k];
    p.sigma2 = ret.rss / static_cast<double>(n);
    p.sigma2_x = sgn.rss / static_cast<double>(n);

    FitResult out;
    out.params = p;
    out.filter = filter(series, p, p.b0, options.spec);
    auto& rep = out.report;
    rep.variant = d.variant;
    rep.method = "ols";
    rep.working_likelihood = true;
    rep.converged = true;
    rep.loglik = out.filter.loglik.total;
    rep.start_loglik = rep.loglik;
    rep.n_obs = d.n();
    const ParamLayout layout(d.variant, d.k);
    rep.names = layout.names();
    const Eigen::VectorXd est = layout.natural(p);
    rep.estimates.assign(est.data(), est.data() + est.size());
    const Eigen::Index K = est.size();
    rep.covariance = Eigen::MatrixXd::Zero(K, K);
    // index maps: natural order is mu1, mu2, a, b, c, d, b0, sigma2, sigma2_x
    std::vector<Eigen::Index> ridx{0}, sidx{1};
    for (Eigen::Index j = 0; j < k; ++j) ridx.push_back(2 + j);
    for (Eigen::Index j = 0; j < k; ++j) ridx.push_back(2 + k + j);
    for (Eigen::Index j = 0; j < k; ++j) sidx.push_back(2 + 2 * k + j);
    for (Eigen::Index j = 0; j < k; ++j) sidx.push_back(2 + 3 * k + j);
    ridx.push_back(2 + 4 * k);
    for (std::size_t a = 0; a < ridx.size(); ++a)
        for (std::size_t b = 0; b < ridx.size(); ++b)
            rep.covariance(ridx[a], ridx[b]) = ret.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    for (std::size_t a = 0; a < sidx.size(); ++a)
        for (std::size_t b = 0; b < sidx.size(); ++b)
            rep.covariance(sidx[a], sidx[b]) = sgn.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    const double dn = static_cast<double>(n);
    rep.covariance(2 + 4 * k + 1, 2 + 4 * k + 1) = 2.0 * p.sigma2 * p.sigma2 / dn;
    rep.covariance(2 + 4 * k + 2, 2 + 4 * k + 2) = 2.0 * p.sigma2_x * p.sigma2_x / dn;
    rep.covariance_ok = true;
    for (Eigen::Index i = 0; i < K; ++i) rep.std_errors.push_back(std::sqrt(rep.covariance(i, i)));
    rep.message = "per-equation least squares; sign equation scored under a Gaussian working likelihood";
    return out;
}

}  // namespace

FitResult fit(const TickSeries& series, Variant variant, const InitSearchSpec& search, const FitOptions& options) {
    const auto& spec = options.spec;
    spec.validate();
    if (series.size() < 2 * static_cast<std::size_t>(spec.L2))
        fail(ErrorCategory::insufficient_history, "fit needs at least 2*L2 = " + std::to_string(2 * spec.L2) +
                                                      " trades, got " + std::to_string(series.size()));
    const Design d = build_design(series, variant, spec);
    if (is_linear(variant)) return fit_ols(series, d, options);

    StaticParams start = options.start ? *options.start : init_search(d, search, variant);
    start.variant = variant;
    if (variant == Variant::SdInt) {
        start.omega = 0.0;
        start.beta = 1.0;
    }
    if (!is_score_driven(variant)) start.alpha = 0.0;
    if (start.k() != d.k) fail(ErrorCategory::validation, "starting values have the wrong lag layout");
    start.validate();
    if (variant == Variant::SdInt && options.forward_backward)
        start.b0 = forward_backward_init(series, start, start.b0, spec);

    const ParamLayout layout(variant, d.k);
    const optim::Objective f = [&](const Eigen::VectorXd& z) {
        const double ll = loglik_objective(d, layout.from_free(z, start));
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };
    const Eigen::VectorXd z0 = layout.to_free(start);
    const double f0 = f(z0);
    if (!std::isfinite(f0)) fail(ErrorCategory::numerical, "likelihood is not finite at the starting values");

    Eigen::VectorXd s = curvature_scales(f, z0);
    Eigen::MatrixXd H0;
    {
        const Eigen::MatrixXd Hu = scaled_hessian(f, z0, s);
        Eigen::LLT<Eigen::MatrixXd> llt(Hu);
        if (llt.info() == Eigen::Success && Hu.allFinite()) {
            H0 = s.asDiagonal() * llt.solve(Eigen::MatrixXd::Identity(Hu.rows(), Hu.cols())) * s.asDiagonal();
        } else {
            H0 = s.cwiseProduct(s).asDiagonal();
        }
    }
    const auto res = optim::minimize_bfgs(f, z0, options.optimizer, H0);
    const Eigen::VectorXd zhat = res.f <= f0 ? res.x : z0;

    FitResult out;
    out.params = layout.from_free(zhat, start);
    out.filter = filter(series, out.params, out.params.b0, spec);
    auto& rep = out.report;
    rep.variant = variant;
    rep.method = "mle-bfgs";
    rep.converged = res.converged;
    rep.iterations = res.iterations;
    rep.evaluations = res.evaluations;
    rep.grad_norm = res.grad_norm;
    rep.loglik = out.filter.loglik.total;
    rep.start_loglik = -f0;
    rep.n_obs = d.n();
    rep.names = layout.names();
    const Eigen::VectorXd est = layout.natural(out.params);
    rep.estimates.assign(est.data(), est.data() + est.size());
    rep.message = res.message;
    const Eigen::Index K = est.size();
    rep.std_errors.assign(static_cast<std::size_t>(K), std::numeric_limits<double>::quiet_NaN());
    rep.covariance = Eigen::MatrixXd::Constant(K, K, std::numeric_limits<double>::quiet_NaN());
    if (options.std_errors) {
        s = curvature_scales(f, zhat);
        const Eigen::MatrixXd Hu = scaled_hessian(f, zhat, s);
        Eigen::LLT<Eigen::MatrixXd> llt(Hu);
        if (llt.info() == Eigen::Success && Hu.allFinite()) {
            const Eigen::VectorXd J = free_jacobian(layout, zhat).cwiseProduct(s);
            const Eigen::MatrixXd cov_u = llt.solve(Eigen::MatrixXd::Identity(K, K));
            rep.covariance = J.asDiagonal() * cov_u * J.asDiagonal();
            rep.covariance = 0.5 * (rep.covariance + rep.covariance.transpose());
            rep.covariance_ok = true;
            for (Eigen::Index i = 0; i < K; ++i)
                rep.std_errors[static_cast<std::size_t>(i)] = std::sqrt(rep.covariance(i, i));
        } else {
            rep.message += "; numerical Hessian is not positive definite, standard errors unavailable";
        }
    }
    return out;
}

BandEstimate confidence_bands(const TickSeries& series, const StaticParams& params, const FitReport& report,
                              int n_sim, double level, std::uint64_t seed, const AggregationSpec& spec) {
    if (n_sim < 1) fail(ErrorCategory::validation, "confidence bands need at least one simulation");
    if (!(level > 0.0 && level < 1.0)) fail(ErrorCategory::validation, "band level must lie in (0, 1)");
    const ParamLayout layout(params.variant, params.k());
    const Eigen::VectorXd theta = layout.natural(params);
    const Eigen::Index K = theta.size();
    if (report.covariance.rows() != K || report.covariance.cols() != K || !report.covariance.allFinite())
        fail(ErrorCategory::validation, "fit report carries no usable parameter covariance");

    BandEstimate out;
    out.level = level;
    out.n_sim = n_sim;
    Eigen::MatrixXd root;
    const Eigen::MatrixXd cov = 0.5 * (report.covariance + report.covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double top = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
    if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() >= -1e-10 * top) {
        root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    } else {
        out.diagonal_fallback = true;
        root = cov.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> paths;
    paths.reserve(static_cast<std::size_t>(n_sim));
    for (int s = 0; s < n_sim; ++s) {
        Eigen::VectorXd e(K);
        for (Eigen::Index i = 0; i < K; ++i) e[i] = normal(rng);
        StaticParams p = layout.from_natural(theta + root * e, params);
        // The impact filter does not involve the variances; keep them valid.
        if (!(p.sigma2 > 0.0)) p.sigma2 = params.sigma2;
        if (!(p.sigma2_x > 0.0)) p.sigma2_x = params.sigma2_x;
        paths.push_back(filter(series, p, p.b0, spec).b0_path);
    }
    const std::size_t n = paths.front().size();
    out.lower.resize(n);
    out.upper.resize(n);
    std::vector<double> col(static_cast<std::size_t>(n_sim));
    const double ql = (1.0 - level) / 2.0;
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(col.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, col.size() - 1);
        return col[lo] + (pos - static_cast<double>(lo)) * (col[hi] - col[lo]);
    };
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t s = 0; s < col.size(); ++s) col[s] = paths[s][t];
        std::sort(col.begin(), col.end());
        out.lower[t] = quantile(ql);
        out.upper[t] = quantile(1.0 - ql);
    }
    return out;
}

}  // namespace sdamh
