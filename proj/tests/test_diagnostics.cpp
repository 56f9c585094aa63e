#include "helpers.hpp"

#include "sdamh/diagnostics.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace sdamh;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> v(n);
    for (auto& e : v) e = z(rng);
    return v;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("Jarque-Bera statistic and its chi-square(2) tail") {
    std::vector<double> v;
    for (int i = 0; i < 60; ++i) v.push_back(std::pow(0.9, i % 17) + (i % 5 == 0 ? 2.0 : 0.0));
    const auto jb = jarque_bera(v);
    const double n = 60.0;
    CHECK(jb.statistic ==
          doctest::Approx(n / 6.0 * (jb.skewness * jb.skewness + jb.excess_kurtosis * jb.excess_kurtosis / 4.0)));
    // the chi-square(2) survival function is exp(-x/2)
    CHECK(jb.p_value == doctest::Approx(std::exp(-jb.statistic / 2.0)).epsilon(1e-10));
    CHECK(jarque_bera(normals(5000, 1)).p_value > 0.01);
    std::vector<double> skewed = normals(5000, 2);
    for (auto& e : skewed) e = std::exp(e);
    CHECK(jarque_bera(skewed).p_value < 1e-6);
    CHECK_THROWS_AS(jarque_bera(std::vector<double>(10, 1.0)), Error);
}

TEST_CASE("quantile residuals") {
    const std::vector<double> x{1.0, -1.0};
    const std::vector<double> pi{0.5, 0.5};
    const auto mid = quantile_residuals(x, pi, 1, false);
    CHECK(mid[0] == doctest::Approx(0.6744897501960817));
    CHECK(mid[1] == doctest::Approx(-0.6744897501960817));
    // randomized residuals of a correctly specified sign model are standard normal
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<double> xs, ps;
    for (int i = 0; i < 20000; ++i) {
        ps.push_back(u(rng));
        xs.push_back(u(rng) < ps.back() ? 1.0 : -1.0);
    }
    const auto q = quantile_residuals(xs, ps, 3, true);
    const double m = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
    double v = 0.0;
    for (double e : q) v += (e - m) * (e - m);
    v /= static_cast<double>(q.size() - 1);
    CHECK(std::abs(m) < 0.03);
    CHECK(v == doctest::Approx(1.0).epsilon(0.03));
    CHECK_THROWS_AS(quantile_residuals(x, std::vector<double>{1.0, 0.5}), Error);
}

TEST_CASE("ARCH LM rejects conditional heteroskedasticity") {
    const auto z = normals(20000, 4);
    const auto iid = arch_lm_suite(z);
    CHECK(iid.pass_count >= 9);
    std::vector<double> e(z.size());
    double h = 1.0, prev = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        h = 0.2 + 0.7 * prev * prev;
        e[i] = std::sqrt(h) * z[i];
        prev = e[i];
    }
    CHECK(arch_lm(e, 1).p_value < 1e-6);
    CHECK(arch_lm_suite(e).pass_count == 0);
    CHECK_THROWS_AS(arch_lm(std::vector<double>(12, 1.0), 5), Error);
}

TEST_CASE("block and time-bin sums") {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7};
    CHECK(block_sums(v, 3) == std::vector<double>{6, 15});
    const std::vector<double> ts{0.1, 0.5, 1.2, 1.9, 5.0, 5.5, 5.6};
    CHECK(time_bin_sums(v, ts, 1.0) == std::vector<double>{3, 7, 18});
}

TEST_CASE("information criteria") {
    CHECK(bic(16, 1000, -50.0) == doctest::Approx(16 * std::log(1000.0) + 50.0));
    CHECK(bic(16, 1000, -50.0, BicConvention::conventional) == doctest::Approx(16 * std::log(1000.0) + 100.0));
    CHECK(parameter_count(Variant::AMH) == 16);
    CHECK(parameter_count(Variant::SdInt) == 17);
    CHECK(parameter_count(Variant::SdAr) == 19);
    CHECK(parameter_count(Variant::H) == static_cast<int>(ParamLayout(Variant::H, 5).size()));
}

TEST_CASE("out-of-sample likelihood filters the new day") {
    const StaticParams p = bench::recovery_params();
    const auto day = testing::simulate_design(p, 800, 31);
    CHECK(osl(day.series, p, p.b0) == filter(day.series, p, p.b0).loglik.total);
}

TEST_CASE("filter error summaries") {
    const std::vector<double> truth{0.004, 0.006, 0.005};
    CHECK(mae_star(truth, truth).mae == 0.0);
    const std::vector<double> off{0.005, 0.005, 0.005};
    const auto b = mae_star(off, truth);
    CHECK(b.mae == doctest::Approx(2e-3 / 3.0));
    CHECK(*b.mae_star == doctest::Approx(2e-3 / 3.0 / 0.005));
    CHECK_FALSE(mae_star(off, std::vector<double>{0.0, 0.0, 0.0}).mae_star.has_value());
}

TEST_CASE("variance shares sum to one") {
    const auto x1 = normals(2000, 10);
    const auto x2 = normals(2000, 11);
    const auto eps = normals(2000, 12);
    std::vector<double> y(2000);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 + 2.0 * x1[i] - 0.5 * x2[i] + 0.1 * eps[i];
    const auto res = linear_regression(y, {x1, x2}, {"x1", "x2"});
    CHECK(res.names == std::vector<std::string>{"const", "x1", "x2"});
    CHECK(res.gammas[1] == doctest::Approx(2.0).epsilon(0.01));
    CHECK(res.gammas[2] == doctest::Approx(-0.5).epsilon(0.02));
    CHECK(res.var_shares.size() == 3);
    CHECK(std::accumulate(res.var_shares.begin(), res.var_shares.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.var_shares.back() == doctest::Approx(1.0 - res.r2).epsilon(1e-12));
}

TEST_CASE("diagnostics on a well-specified simulation") {
    const StaticParams p = bench::recovery_params();
    const auto sim = testing::simulate_design(p, 5000, 17);
    const auto fs = filter(sim.series, p, p.b0);
    const auto rep = diagnose(sim.series, p, fs);
    CHECK(rep.jb_return_p > 0.001);
    CHECK(rep.jb_trade_p > 0.001);
    CHECK(rep.lm.pass_count >= 8);
    CHECK(rep.trade_residuals_randomized);
    const auto er = return_residuals(fs, sim.series, p);
    CHECK(er.size() == 5000);
}

}
