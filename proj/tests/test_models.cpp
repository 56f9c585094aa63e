#include "helpers.hpp"

#include "sdamh/models.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace sdamh;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * M_PI);

}

TEST_SUITE("models") {

TEST_CASE("single-observation likelihood values") {
    StaticParams p = StaticParams::zeros(Variant::AMH);
    p.sigma2 = 1.0;
    const double fr[3] = {0, 0, 0}, fx[3] = {0, 0, 0};
    auto e = evaluate_obs(p, fr, fx, 0.0, 1.0, 0.0);
    CHECK(e.loglik == doctest::Approx(-kHalfLog2Pi + std::log(0.5)).epsilon(1e-15));
    e = evaluate_obs(p, fr, fx, 1.0, 1.0, 0.0);
    CHECK(e.loglik == doctest::Approx(-kHalfLog2Pi - 0.5 + std::log(0.5)).epsilon(1e-15));
}

TEST_CASE("score update by direct substitution") {
    StaticParams p = StaticParams::zeros(Variant::SdInt);
    p.alpha = 0.01;
    CHECK(score_update(3e-3, 1.0, 0.02, 0.02, p) == 3e-3);
    CHECK(score_update(3e-3, 1.0, 0.01, 0.0, p) == doctest::Approx(3e-3 + 1e-4).epsilon(1e-14));
    CHECK(score_update(3e-3, 1.0, 0.01, 0.0, p) > 3e-3);
    CHECK(score_update(3e-3, -1.0, 0.01, 0.0, p) < 3e-3);
    CHECK(score_update(3e-3, 1.0, 0.01, 0.0, p) == score_update(3e-3, -1.0, -0.01, 0.0, p));
    StaticParams ar = StaticParams::zeros(Variant::SdAr);
    ar.alpha = 0.01;
    ar.omega = 1e-4;
    ar.beta = 0.9;
    CHECK(score_update(3e-3, 1.0, 0.01, 0.0, ar) == doctest::Approx(1e-4 + 0.9 * 3e-3 + 1e-4).epsilon(1e-14));
    CHECK_THROWS_AS(score_update(3e-3, 1.0, 0.01, 0.0, StaticParams::zeros(Variant::AMH)), Error);
}

TEST_CASE("scaled score identities") {
    const auto s = score_step(-1.0, 0.3, 0.1, 0.04);
    CHECK(s.scaled_score == doctest::Approx(s.fisher_inv * s.score).epsilon(1e-15));
    CHECK(std::abs(s.scaled_score) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("likelihood total is the sum of per-observation terms") {
    const StaticParams p = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(p, 1000, 8);
    const double b0 = p.b0;
    const auto ll = loglik(sim.series, p, std::span<const double>(&b0, 1));
    CHECK(ll.n_obs == 1000);
    CHECK(ll.per_obs.size() == 1000);
    const double sum = std::accumulate(ll.per_obs.begin(), ll.per_obs.end(), 0.0);
    CHECK(std::abs(ll.total - sum) <= 1e-10 * 1000);
    // additivity over a split of the effective sample
    const auto first = loglik(sim.series.slice(0, 600), p, std::span<const double>(&b0, 1));
    for (std::size_t i = 0; i < first.per_obs.size(); ++i) CHECK(first.per_obs[i] == ll.per_obs[i]);
}

TEST_CASE("the true a1 beats perturbed values on the same realization") {
    const StaticParams p = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(p, 1000, 21);
    const double b0 = p.b0;
    const double base = loglik(sim.series, p, std::span<const double>(&b0, 1)).total;
    for (double delta : {-0.1, 0.1}) {
        StaticParams q = p;
        q.a[0] += delta;
        CHECK(base >= loglik(sim.series, q, std::span<const double>(&b0, 1)).total);
    }
}

TEST_CASE("the Gaussian term is maximized at the mean squared residual") {
    StaticParams p = testing::as_variant(bench::recovery_params(), Variant::AMH);
    const auto sim = testing::simulate_design(p, 400, 5);
    const auto d = build_design(sim.series, p.variant, {});
    double ss = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        const auto e = evaluate_obs(p, d.fr_row(i), d.fx_row(i), d.r[i], d.x[i], p.b0);
        ss += (d.r[i] - e.mu1) * (d.r[i] - e.mu1);
    }
    const double s2 = ss / static_cast<double>(d.n());
    auto total = [&](double v) {
        StaticParams q = p;
        q.sigma2 = v;
        return loglik(d, q, std::span<const double>(&p.b0, 1)).total;
    };
    CHECK(total(s2) > total(s2 * 1.01));
    CHECK(total(s2) > total(s2 * 0.99));
}

TEST_CASE("score-driven objective with alpha = 0 equals the static likelihood") {
    const StaticParams sd = bench::recovery_params();
    StaticParams zero = sd;
    zero.alpha = 0.0;
    const StaticParams amh = testing::as_variant(sd, Variant::AMH);
    const auto sim = testing::simulate_design(sd, 800, 2);
    const auto d = build_design(sim.series, Variant::AMH, {});
    CHECK(loglik_objective(d, zero) == loglik_objective(d, amh));
}

TEST_CASE("extreme log-odds clamp without throwing in the objective") {
    StaticParams p = testing::as_variant(bench::recovery_params(), Variant::AMH);
    p.mu2 = 60.0;
    const auto sim = testing::simulate_design(testing::as_variant(bench::recovery_params(), Variant::AMH), 500, 1);
    const auto d = build_design(sim.series, Variant::AMH, {});
    CHECK(loglik_objective(d, p) == -std::numeric_limits<double>::infinity());
    try {
        loglik(d, p, std::span<const double>(&p.b0, 1));
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::domain);
    }
}

}
