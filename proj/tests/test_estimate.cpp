#include "helpers.hpp"

#include "sdamh/estimate.hpp"
#include "sdamh/ols.hpp"

#include <doctest.h>

#include <cmath>

using namespace sdamh;

TEST_SUITE("estimate") {

TEST_CASE("search box defaults and offenders") {
    InitSearchSpec spec;
    CHECK(spec.n_draws == 100000);
    CHECK_NOTHROW(spec.validate());
    CHECK(range_offenders(spec, bench::recovery_params()).empty());
    StaticParams p = bench::recovery_params();
    p.a[0] = 0.5;
    p.c[2] = 0.2;
    const auto off = range_offenders(spec, p);
    CHECK(off == std::vector<std::string>{"a1", "c100bar"});
    spec.a = {0.0, -1.0};
    CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("single-draw search returns a point of the box") {
    const StaticParams truth = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(truth, 1000, 3);
    InitSearchSpec spec;
    spec.n_draws = 1;
    const auto a = init_search(sim.series, spec, Variant::AMH);
    const auto b = init_search(sim.series, spec, Variant::AMH);
    CHECK(range_offenders(spec, a).empty());
    CHECK(ParamLayout(Variant::AMH, 3).natural(a) == ParamLayout(Variant::AMH, 3).natural(b));
}

TEST_CASE("search beats the midpoint of the box") {
    const StaticParams truth = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(truth, 10000, 31);
    InitSearchSpec spec;
    spec.n_draws = 10000;
    const auto best = init_search(sim.series, spec, Variant::AMH);
    StaticParams mid = StaticParams::zeros(Variant::AMH);
    auto c = [](ParamRange r) { return 0.5 * (r.lo + r.hi); };
    mid.mu1 = c(spec.mu);
    mid.mu2 = c(spec.mu);
    for (int i = 0; i < 3; ++i) {
        mid.a[i] = c(spec.a);
        mid.b[i] = c(spec.b);
        mid.c[i] = c(spec.c);
        mid.d[i] = c(spec.d);
    }
    mid.b0 = c(spec.b);
    mid.sigma2 = std::pow(c(spec.sigma), 2);
    const auto d = build_design(sim.series, Variant::AMH, {});
    CHECK(loglik_objective(d, best) >= loglik_objective(d, mid));
}

TEST_CASE("filter replay and online equivalence are bitwise") {
    const StaticParams p = bench::recovery_params();
    const auto sim = testing::simulate_design(p, 3000, 8);
    const auto a = filter(sim.series, p, p.b0);
    const auto b = filter(sim.series, p, p.b0);
    CHECK(a.b0_path == b.b0_path);
    CHECK(a.loglik.total == b.loglik.total);
    OnlineFilter online(p, p.b0);
    std::size_t produced = 0;
    for (const auto& e : sim.series.events()) produced += online.push(e.ret, e.sign);
    CHECK(produced == a.b0_path.size());
    CHECK(online.state().b0_path == a.b0_path);
    CHECK(online.state().scores == a.scores);
    CHECK(online.state().loglik.total == a.loglik.total);
    CHECK(online.current_b0() == a.b0_next);
}

TEST_CASE("filtered path follows the recursion exactly") {
    const StaticParams p = bench::recovery_params();
    const auto sim = testing::simulate_design(p, 1500, 2);
    const auto f = filter(sim.series, p, 4e-3);
    CHECK(f.b0_path.front() == 4e-3);
    for (std::size_t i = 0; i + 1 < f.b0_path.size(); ++i)
        CHECK(f.b0_path[i + 1] == f.b0_path[i] + p.alpha * f.scores[i]);
    for (std::size_t i = 0; i < f.b0_path.size(); ++i) {
        const double x = sim.series[100 + i].sign;
        CHECK(f.state[i] + f.b0_path[i] * x == doctest::Approx(f.mu1[i]).epsilon(1e-12));
    }
}

TEST_CASE("zero surprises freeze the filtered impact") {
    StaticParams p = StaticParams::zeros(Variant::SdInt);
    p.alpha = 0.05;
    p.sigma2 = 0.01;
    const double b01 = 3e-3;
    std::vector<double> r;
    std::vector<int> x;
    for (int i = 0; i < 400; ++i) {
        x.push_back(i % 3 == 0 ? -1 : 1);
        r.push_back(b01 * x.back());
    }
    const auto f = filter(testing::make_series(r, x), p, b01);
    for (double v : f.b0_path) CHECK(v == b01);
}

TEST_CASE("integrated filter ignores the sign-equation coefficients") {
    const StaticParams p = bench::recovery_params();
    const auto sim = testing::simulate_design(p, 1500, 15);
    StaticParams q = p;
    q.mu2 = -1.0;
    q.c = {-0.1, -0.2, -0.3};
    q.d = {0.2, 0.2, 0.2};
    CHECK(filter(sim.series, p, p.b0).b0_path == filter(sim.series, q, p.b0).b0_path);
}

TEST_CASE("forward-backward initialization") {
    StaticParams p = bench::recovery_params();
    const auto sim = testing::simulate_design(p, 3000, 19);
    StaticParams frozen = p;
    frozen.alpha = 0.0;
    CHECK(forward_backward_init(sim.series, frozen, 0.0123) == 0.0123);
    const double b = forward_backward_init(sim.series, p, 0.0);
    // replay: the forward terminal from b equals b plus the accumulated surprises
    const auto f = filter(sim.series, p, b);
    double acc = b;
    for (double s : f.scores) acc += p.alpha * s;
    CHECK(f.b0_next == doctest::Approx(acc).epsilon(1e-12));
    CHECK_THROWS_AS(forward_backward_init(sim.series, testing::as_variant(p, Variant::AMH), 0.0), Error);
}

TEST_CASE("forward-backward recovers the initial impact at low noise") {
    const auto s = bench::init_study(10, 10000);
    CHECK(s.est.mean == doctest::Approx(5e-3).epsilon(0.02));
    CHECK(s.est.std < 1e-4);
}

TEST_CASE("OLS residuals are orthogonal to the regressors") {
    StaticParams truth = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(truth, 4000, 41);
    for (const Variant v : {Variant::H, Variant::AH}) {
        const AggregationSpec spec{};
        const auto res = fit(sim.series, v, {}, {});
        CHECK(res.report.method == "ols");
        CHECK(res.report.working_likelihood);
        const auto d = build_design(sim.series, v, spec);
        const int k = d.k;
        const auto& p = res.params;
        std::vector<double> ip_r(static_cast<std::size_t>(2 * k + 2), 0.0), ip_x(static_cast<std::size_t>(2 * k + 1), 0.0);
        double scale_r = 0.0, scale_x = 0.0;
        for (std::size_t i = 0; i < d.n(); ++i) {
            const double er = d.r[i] - state_mean(p, d.fr_row(i), d.fx_row(i)) - p.b0 * d.x[i];
            const double ex = d.x[i] - sign_mean(p, d.fr_row(i), d.fx_row(i));
            std::vector<double> reg{1.0};
            for (int j = 0; j < k; ++j) reg.push_back(d.fr_row(i)[j]);
            for (int j = 0; j < k; ++j) reg.push_back(d.fx_row(i)[j]);
            for (std::size_t j = 0; j < reg.size(); ++j) {
                ip_r[j] += reg[j] * er;
                ip_x[j] += reg[j] * ex;
                scale_r += std::abs(reg[j] * d.r[i]);
                scale_x += std::abs(reg[j] * d.x[i]);
            }
            ip_r.back() += d.x[i] * er;
        }
        for (double v2 : ip_r) CHECK(std::abs(v2) <= 1e-8 * scale_r);
        for (double v2 : ip_x) CHECK(std::abs(v2) <= 1e-8 * scale_x);
    }
}

TEST_CASE("fit does not lose likelihood against its start") {
    const StaticParams truth = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(truth, 3000, 7);
    InitSearchSpec spec;
    spec.n_draws = 500;
    const auto start = init_search(sim.series, spec, Variant::AMH);
    const auto d = build_design(sim.series, Variant::AMH, {});
    FitOptions fo;
    fo.std_errors = false;
    const auto res = fit(sim.series, Variant::AMH, spec, fo);
    CHECK(res.report.loglik >= loglik_objective(d, start));
    CHECK(res.report.loglik >= res.report.start_loglik);
}

TEST_CASE("fit reports standard errors for every free parameter") {
    const StaticParams truth = bench::recovery_params();
    const auto sim = testing::simulate_design(truth, 5000, 77);
    FitOptions fo;
    fo.start = truth;
    const auto res = fit(sim.series, Variant::SdInt, {}, fo);
    CHECK(res.report.names.size() == 17);
    CHECK(res.report.std_errors.size() == 17);
    CHECK(res.report.covariance_ok);
    for (double se : res.report.std_errors) CHECK((std::isfinite(se) && se > 0.0));
    CHECK(std::abs(res.params.alpha - truth.alpha) < 4.0 * res.report.std_errors.back());
}

TEST_CASE("short series are rejected") {
    const auto sim = testing::simulate_design(bench::recovery_params(), 150, 1);
    try {
        fit(sim.series.slice(0, 199), Variant::SdInt, {}, {});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::insufficient_history);
    }
}

TEST_CASE("bands collapse under a zero covariance") {
    const StaticParams p = bench::recovery_params();
    const auto sim = testing::simulate_design(p, 1000, 4);
    FitReport rep;
    rep.variant = p.variant;
    rep.names = ParamLayout(p.variant, 3).names();
    rep.covariance = Eigen::MatrixXd::Zero(17, 17);
    rep.covariance_ok = true;
    const auto bands = confidence_bands(sim.series, p, rep, 50);
    const auto f = filter(sim.series, p, p.b0);
    for (std::size_t i = 0; i < f.b0_path.size(); ++i) {
        CHECK(bands.lower[i] == doctest::Approx(f.b0_path[i]).epsilon(1e-12));
        CHECK(bands.upper[i] == doctest::Approx(f.b0_path[i]).epsilon(1e-12));
    }
}

TEST_CASE("bands cover the filtered path and narrow with more data") {
    const StaticParams p = bench::recovery_params();
    double width_small = 0.0, width_large = 0.0;
    for (const std::size_t T : {1000u, 10000u}) {
        const auto sim = testing::simulate_design(p, T, 23);
        FitOptions fo;
        fo.start = p;
        const auto res = fit(sim.series, p.variant, {}, fo);
        const auto bands = confidence_bands(sim.series, res.params, res.report, 100);
        std::vector<double> w;
        std::size_t outside = 0;
        for (std::size_t i = 0; i < bands.lower.size(); ++i) {
            w.push_back(bands.upper[i] - bands.lower[i]);
            outside += res.filter.b0_path[i] < bands.lower[i] || res.filter.b0_path[i] > bands.upper[i];
        }
        CHECK(static_cast<double>(outside) <= 0.05 * static_cast<double>(w.size()));
        std::nth_element(w.begin(), w.begin() + static_cast<long>(w.size() / 2), w.end());
        (T == 1000 ? width_small : width_large) = w[w.size() / 2];
    }
    CHECK(width_large < width_small);
}

}
