#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace sdamh;

TEST_SUITE("core") {

// The long aggregate sums L2 - L1 terms but divides by L2 - L1 - 1.
constexpr double kLongScale = 90.0 / 89.0;

TEST_CASE("aggregates of a constant series") {
    const auto s = testing::make_series(std::vector<double>(150, 0.25), std::vector<int>(150, 1));
    const auto g = aggregate_lags(s, {}, 120);
    CHECK(g.r_lag1 == 0.25);
    CHECK(g.r_L1 == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g.r_L2 == doctest::Approx(0.25 * kLongScale).epsilon(1e-15));
    CHECK(g.x_lag1 == 1.0);
    CHECK(g.x_L1 == doctest::Approx(1.0));
    CHECK(g.x_L2 == doctest::Approx(kLongScale));
}

TEST_CASE("aggregates use the literal divisors") {
    // r_{t-i} = i for i = 1..100
    std::vector<double> r(101, 0.0);
    for (int i = 1; i <= 100; ++i) r[static_cast<std::size_t>(100 - i)] = i;
    const auto s = testing::make_series(r, std::vector<int>(101, 1));
    const auto g = aggregate_lags(s, {}, 100);
    CHECK(g.r_lag1 == 1.0);
    CHECK(g.r_L1 == doctest::Approx(6.0).epsilon(1e-15));
    // 90 terms summing to 4995, divided by L2 - L1 - 1 = 89
    CHECK(g.r_L2 == doctest::Approx(4995.0 / 89.0).epsilon(1e-15));
}

TEST_CASE("aggregation needs L2 trades of history") {
    const auto s = testing::make_series(std::vector<double>(150, 0.0), std::vector<int>(150, 1));
    CHECK_NOTHROW(aggregate_lags(s, {}, 100));
    try {
        aggregate_lags(s, {}, 99);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::insufficient_history);
    }
}

TEST_CASE("aggregation spec bounds") {
    CHECK_NOTHROW(AggregationSpec{}.validate());
    CHECK_THROWS_AS((AggregationSpec{1, 100, 5}.validate()), Error);
    CHECK_THROWS_AS((AggregationSpec{10, 10, 5}.validate()), Error);
}

TEST_CASE("sign aggregates are bounded and returns aggregate linearly") {
    const auto sim = testing::simulate_design(bench::recovery_params(), 600, 3);
    const auto sim2 = testing::simulate_design(bench::recovery_params(), 600, 4);
    const auto r1 = sim.series.returns();
    const auto r2 = sim2.series.returns();
    const auto x = sim.series.signs();
    std::vector<double> mix(r1.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * r1[i] - 3.0 * r2[i];
    for (std::size_t t = 100; t < 700; t += 37) {
        const auto g = aggregate_lags(r1, x, {}, t);
        CHECK(std::abs(g.x_L1) <= 1.0);
        CHECK(std::abs(g.x_L2) <= kLongScale);
        const auto g2 = aggregate_lags(r2, x, {}, t);
        const auto gm = aggregate_lags(mix, x, {}, t);
        CHECK(gm.r_lag1 == doctest::Approx(2.0 * g.r_lag1 - 3.0 * g2.r_lag1).epsilon(1e-12));
        CHECK(gm.r_L1 == doctest::Approx(2.0 * g.r_L1 - 3.0 * g2.r_L1).epsilon(1e-12));
        CHECK(gm.r_L2 == doctest::Approx(2.0 * g.r_L2 - 3.0 * g2.r_L2).epsilon(1e-12));
    }
}

TEST_CASE("conditional means by direct substitution") {
    StaticParams p = StaticParams::zeros(Variant::AMH);
    const LagAggregates g{};
    CHECK(conditional_means(p, 0.0, g, 1.0).pi_t == 0.5);
    p.mu1 = 1e-3;
    const auto m = conditional_means(p, 5e-3, g, 1.0);
    CHECK(m.mu1_t == doctest::Approx(6e-3).epsilon(1e-15));
    CHECK(m.state_t == doctest::Approx(1e-3).epsilon(1e-15));
}

TEST_CASE("conditional means match a term-by-term evaluation at the recovery design") {
    const StaticParams p = bench::recovery_params();
    std::vector<double> r(101);
    std::vector<int> x(101);
    for (int i = 0; i < 101; ++i) {
        r[static_cast<std::size_t>(i)] = 0.01 * std::sin(0.7 * i);
        x[static_cast<std::size_t>(i)] = (i * 7) % 3 == 0 ? -1 : 1;
    }
    const auto s = testing::make_series(r, x);
    const auto g = aggregate_lags(s, {}, 100);
    // independent oracle: straight-line sums over the raw history
    double rs10 = 0, rs100 = 0, xs10 = 0, xs100 = 0;
    for (int i = 2; i <= 10; ++i) rs10 += r[static_cast<std::size_t>(100 - i)], xs10 += x[static_cast<std::size_t>(100 - i)];
    for (int i = 11; i <= 100; ++i) rs100 += r[static_cast<std::size_t>(100 - i)], xs100 += x[static_cast<std::size_t>(100 - i)];
    const double b0t = 4e-3, xt = -1.0;
    const double mu1 = 1e-3 + -0.7 * r[99] + -0.05 * rs10 / 9 + -0.010 * rs100 / 89 + b0t * xt + 3e-3 * x[99] +
                       2e-5 * xs10 / 9 + 1e-6 * xs100 / 89;
    const double mu2 = 0.080 + -3.0 * r[99] + -1.7 * rs10 / 9 + -0.6 * rs100 / 89 + 0.7 * x[99] + 0.03 * xs10 / 9 +
                       0.010 * xs100 / 89;
    const auto m = conditional_means(p, b0t, g, xt);
    CHECK(m.mu1_t == doctest::Approx(mu1).epsilon(1e-13));
    CHECK(m.mu2_t == doctest::Approx(mu2).epsilon(1e-13));
    CHECK(m.pi_t == doctest::Approx(1.0 / (1.0 + std::exp(-mu2))).epsilon(1e-13));
    CHECK(m.state_t + b0t * xt == m.mu1_t);
}

TEST_CASE("inverse logit symmetry, monotonicity and overflow safety") {
    double prev = 0.0;
    for (double z = -800.0; z <= 800.0; z += 13.7) {
        const double v = inv_logit(z);
        CHECK(std::isfinite(v));
        CHECK(v >= prev);
        prev = v;
        CHECK(inv_logit(-z) == doctest::Approx(1.0 - v).epsilon(1e-15));
    }
    CHECK(inv_logit(0.0) == 0.5);
}

TEST_CASE("parameter names follow the coefficient layout") {
    const auto n = param_names(Variant::SdInt, 3);
    CHECK(n.size() == 19);
    CHECK(n.front() == "mu1");
    CHECK(n[2] == "a1");
    CHECK(n[4] == "a100bar");
    CHECK(n.back() == "alpha");
    CHECK(param_names(Variant::H, 5).size() == 2 + 20 + 3);
}

TEST_CASE("static parameter invariants") {
    StaticParams p = StaticParams::zeros(Variant::SdInt);
    CHECK_NOTHROW(p.validate());
    p.beta = 0.9;
    CHECK_THROWS_AS(p.validate(), Error);
    StaticParams q = StaticParams::zeros(Variant::AMH);
    q.alpha = 0.1;
    CHECK_THROWS_AS(q.validate(), Error);
    q.alpha = 0.0;
    q.sigma2 = 0.0;
    CHECK_THROWS_AS(q.validate(), Error);
}

TEST_CASE("trade events reject signs outside {-1, +1}") {
    TradeEvent e;
    e.sign = 0;
    CHECK_THROWS_AS(validate_event(e), Error);
    e.sign = -1;
    CHECK_NOTHROW(validate_event(e));
}

}
