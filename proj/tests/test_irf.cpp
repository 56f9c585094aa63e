#include "helpers.hpp"

#include "sdamh/irf.hpp"

#include <doctest.h>

#include <cmath>

using namespace sdamh;

namespace {

// Direct recursion of a raw-lag linear system after a unit sign shock at h = 0.
std::vector<double> recursive_irf(const StaticParams& p, int H, double delta) {
    const int k = p.k();
    std::vector<double> r(static_cast<std::size_t>(H + 1), 0.0), x(r.size(), 0.0);
    for (int h = 0; h <= H; ++h) {
        double xs = h == 0 ? delta : 0.0;
        double rs = 0.0;
        for (int i = 1; i <= k && i <= h; ++i) {
            xs += h == 0 ? 0.0 : p.c[i - 1] * r[h - i] + p.d[i - 1] * x[h - i];
            rs += p.a[i - 1] * r[h - i] + p.b[i - 1] * x[h - i];
        }
        x[h] = xs;
        r[h] = rs + p.b0 * xs;
    }
    return r;
}

StaticParams toy_h() {
    AggregationSpec spec;
    spec.p = 2;
    StaticParams p = StaticParams::zeros(Variant::H, spec);
    p.a = {-0.3, 0.1};
    p.b = {0.002, 0.001};
    p.c = {-2.0, -0.5};
    p.d = {0.4, 0.2};
    p.b0 = 0.004;
    p.sigma2 = 1e-4;
    p.sigma2_x = 0.8;
    return p;
}

AggregationSpec p2() {
    AggregationSpec spec;
    spec.p = 2;
    return spec;
}

}  // namespace

TEST_SUITE("irf") {

TEST_CASE("zero lag coefficients give a one-period response") {
    StaticParams p = StaticParams::zeros(Variant::AH);
    p.b0 = 0.003;
    const auto res = irf_linear(p, 10);
    CHECK(res.irf[0] == doctest::Approx(0.003).epsilon(1e-14));
    for (int h = 1; h <= 10; ++h) CHECK(std::abs(res.irf[static_cast<std::size_t>(h)]) < 1e-18);
    CHECK(res.cirf.back() == doctest::Approx(0.003).epsilon(1e-14));
}

TEST_CASE("two-lag model matches the direct recursion") {
    const StaticParams p = toy_h();
    const auto res = irf_linear(p, 30, 1.0, p2());
    const auto oracle = recursive_irf(p, 30, 1.0);
    double cum = 0.0;
    for (int h = 0; h <= 30; ++h) {
        const auto i = static_cast<std::size_t>(h);
        CHECK(res.irf[i] == doctest::Approx(oracle[i]).epsilon(1e-10).scale(1e-15));
        cum += oracle[i];
        CHECK(res.cirf[i] == doctest::Approx(cum).epsilon(1e-10));
    }
    CHECK(res.stationary);
    const Eigen::MatrixXd A = companion_matrix(p, p2());
    CHECK(A.rows() == 4);
    CHECK(res.spectral_radius == doctest::Approx(A.eigenvalues().cwiseAbs().maxCoeff()).epsilon(1e-12));
}

TEST_CASE("linear responses are odd and linear in the shock") {
    const StaticParams p = toy_h();
    const auto one = irf_linear(p, 20, 1.0, p2());
    const auto neg = irf_linear(p, 20, -1.0, p2());
    const auto two = irf_linear(p, 20, 2.0, p2());
    for (std::size_t h = 0; h <= 20; ++h) {
        CHECK(neg.cirf[h] == doctest::Approx(-one.cirf[h]).epsilon(1e-12));
        CHECK(two.cirf[h] == doctest::Approx(2.0 * one.cirf[h]).epsilon(1e-12));
    }
}

TEST_CASE("explosive systems are flagged") {
    StaticParams p = toy_h();
    p.d = {1.2, 0.2};
    p.c = {0.0, 0.0};
    const auto res = irf_linear(p, 5, 1.0, p2());
    CHECK_FALSE(res.stationary);
    CHECK_FALSE(res.warning.empty());
}

TEST_CASE("Monte Carlo responses telescope and are symmetric under common shocks") {
    const StaticParams p = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(p, 500, 3);
    CirfOptions o;
    o.S = 200;
    o.H = 15;
    const auto up = cirf_monte_carlo(sim.series, p, nullptr, 300, o);
    CHECK(up.cirf.size() == 16);
    double acc = 0.0;
    for (std::size_t h = 0; h < up.cirf.size(); ++h) {
        acc += up.irf[h];
        CHECK(acc == doctest::Approx(up.cirf[h]).epsilon(1e-12));
        CHECK(up.mc_std[h] >= 0.0);
    }
    CHECK(up.lrcirf == up.cirf.back());
    // the unshocked branch draws x_t, so CIRF(0) is b0 (1 - E[x_t])
    const auto fs = filter(sim.series, p, p.b0);
    const double ex = 2.0 * fs.pi[200] - 1.0;
    CHECK(std::abs(up.cirf[0] - p.b0 * (1.0 - ex)) < 4.0 * up.mc_std[0] + 1e-15);
    const auto again = cirf_monte_carlo(sim.series, p, nullptr, 300, o);
    CHECK(again.cirf == up.cirf);
}

TEST_CASE("integrated variant with zero alpha reproduces the static response") {
    StaticParams sd = bench::recovery_params();
    sd.alpha = 0.0;
    const StaticParams amh = testing::as_variant(sd, Variant::AMH);
    const auto sim = testing::simulate_design(sd, 500, 13);
    const auto fs = filter(sim.series, sd, sd.b0);
    CirfOptions o;
    o.S = 100;
    o.H = 10;
    const auto a = cirf_monte_carlo(sim.series, sd, &fs, 250, o);
    const auto b = cirf_monte_carlo(sim.series, amh, nullptr, 250, o);
    CHECK(a.cirf == b.cirf);
    CHECK(a.mc_std == b.mc_std);
}

TEST_CASE("invalid Monte Carlo requests") {
    const StaticParams p = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(p, 300, 1);
    CirfOptions o;
    o.S = 1;
    CHECK_THROWS_AS(cirf_monte_carlo(sim.series, p, nullptr, 200, o), Error);
    o.S = 10;
    CHECK_THROWS_AS(cirf_monte_carlo(sim.series, p, nullptr, 50, o), Error);
    CHECK_THROWS_AS(cirf_monte_carlo(sim.series, bench::recovery_params(), nullptr, 200, o), Error);
}

TEST_CASE("crude and antithetic estimates agree") {
    const StaticParams p = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(p, 500, 44);
    CirfOptions o;
    o.S = 2000;
    o.H = 20;
    o.antithetic = false;
    const auto crude = cirf_monte_carlo(sim.series, p, nullptr, 400, o);
    o.antithetic = true;
    o.seed = 2;
    const auto anti = cirf_monte_carlo(sim.series, p, nullptr, 400, o);
    const double se = std::hypot(crude.lrcirf_std, anti.lrcirf_std);
    CHECK(std::abs(crude.lrcirf - anti.lrcirf) < 3.0 * se);
}

TEST_CASE("linear Monte Carlo path equals the closed form") {
    StaticParams p = StaticParams::zeros(Variant::AH);
    p.a = {-0.2, -0.05, -0.01};
    p.b = {0.002, 1e-4, 1e-5};
    p.c = {-0.5, -0.3, -0.1};
    p.d = {0.3, 0.1, 0.05};
    p.b0 = 0.004;
    p.sigma2 = 1e-4;
    p.sigma2_x = 0.8;
    SimulateOptions so;
    so.include_warmup = true;
    StaticParams gen = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = simulate(gen, {}, 400, 5, so);
    CirfOptions o;
    o.S = 20;
    o.H = 30;
    const auto closed = irf_linear(p, 30);
    const auto path = lrcirf_series(sim.series, p, nullptr, o, 50);
    CHECK(path.lrcirf.size() == 8);
    for (double v : path.lrcirf) CHECK(v == doctest::Approx(closed.cirf.back()).epsilon(1e-9));
}

TEST_CASE("exponential fit") {
    std::vector<double> y;
    for (int h = 0; h <= 40; ++h) y.push_back(0.004 - 0.002 * std::exp(-0.7 * h));
    const auto f = fit_exponential(y);
    CHECK(f.identified);
    CHECK(f.c == doctest::Approx(0.004).epsilon(1e-6));
    CHECK(f.kappa == doctest::Approx(-0.002).epsilon(1e-6));
    CHECK(f.phi == doctest::Approx(0.7).epsilon(1e-6));
    const auto flat = fit_exponential(std::vector<double>(20, 0.003));
    CHECK_FALSE(flat.identified);
    CHECK(flat.c == doctest::Approx(0.003));
}

}
