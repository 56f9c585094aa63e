#include "helpers.hpp"

#include "sdamh/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sdamh;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("sdamh_io_" + name)).string();
}

TickSeries parse(const std::string& text, const IngestSpec& spec = {}) {
    std::istringstream in(text);
    return read_trades_csv(in, spec);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("three-row canonical CSV") {
    const auto s = parse(
        "t,ret,sign,mid,volume,timestamp\n"
        "1,0.001,1,10.01,100,0.5\n"
        "2,-0.0005,-1,,,\n"
        "3,0,1,10.02,50,1.5\n");
    REQUIRE(s.size() == 3);
    CHECK(s[0].ret == 0.001);
    CHECK(s[1].sign == -1);
    CHECK_FALSE(s[1].mid.has_value());
    CHECK(*s[2].volume == 50.0);
    CHECK(*s[2].timestamp == 1.5);
}

TEST_CASE("malformed rows name their line") {
    try {
        parse("t,ret,sign,mid,volume,timestamp\n1,0.001,1,,,\n2,0.002,0,,,\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::io);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("t,ret,side\n1,0.1,1\n"), Error);
    CHECK_THROWS_AS(parse("t,ret,sign,mid,volume,timestamp\n1,abc,1,,,\n"), Error);
    CHECK_THROWS_AS(parse("t,ret,sign,mid,volume,timestamp\n1,0,1,,,2\n2,0,1,,,1\n"), Error);
}

TEST_CASE("quote rule and log returns") {
    IngestSpec spec;
    spec.sign_rule = SignRule::quote_rule;
    const auto s = parse(
        "t,ret,sign,mid,volume,timestamp\n"
        "1,0.001,,10.01,,\n"
        "2,0,0,10.01,,\n"
        "3,-0.001,,10.00,,\n", spec);
    CHECK(s[0].sign == 1);
    CHECK(s[1].sign == 1);
    CHECK(s[2].sign == -1);
    CHECK_THROWS_AS(parse("t,ret,sign,mid,volume,timestamp\n1,0,,10,,\n", spec), Error);
    IngestSpec lr;
    lr.log_returns = true;
    const auto l = parse("t,ret,sign,mid,volume,timestamp\n1,0.01,1,,,\n", lr);
    CHECK(l[0].ret == doctest::Approx(std::expm1(0.01)).epsilon(1e-15));
}

TEST_CASE("write and read back bitwise") {
    const auto sim = testing::simulate_design(bench::recovery_params(), 500, 3);
    const auto path = temp_path("round.csv");
    write_trades_csv(path, sim.series);
    const auto back = read_trades_csv(path);
    CHECK(back == sim.series);
    std::filesystem::remove(path);
}

TEST_CASE("LOBSTER executions become signed trades") {
    const auto msg = temp_path("msg.csv");
    const auto book = temp_path("book.csv");
    {
        std::ofstream m(msg), b(book);
        m << "34200.0,1,11,100,1000000,1\n"    // submission: sets the first mid
          << "34200.5,4,12,50,1000100,-1\n"    // buyer hits a resting sell
          << "34200.5,4,13,30,1000100,-1\n"    // same time and side: merged
          << "34201.0,5,14,20,999900,1\n"      // seller hits a hidden buy
          << "34202.0,3,11,100,1000000,1\n";   // cancellation
        b << "1000100,200,999900,300\n"
          << "1000200,150,999900,300\n"
          << "1000300,120,999900,300\n"
          << "1000300,120,999800,300\n"
          << "1000300,120,999800,200\n";
    }
    const auto s = read_lobster(msg, book);
    REQUIRE(s.size() == 2);
    CHECK(s[0].sign == 1);
    CHECK(*s[0].volume == 80.0);
    CHECK(*s[0].mid == doctest::Approx(100.01));
    CHECK(s[0].ret == doctest::Approx((100.01 - 100.0) / 100.0));
    CHECK(s[1].sign == -1);
    CHECK(s[1].ret == doctest::Approx((100.005 - 100.01) / 100.01));
    CHECK(*s[1].timestamp == 34201.0);
    std::filesystem::remove(msg);
    std::filesystem::remove(book);
}

TEST_CASE("config files") {
    std::istringstream in("# run\nvariant = AMH\n  L2=100  # long window\n\nseed = 7\n");
    const auto cfg = read_config(in);
    CHECK(cfg.at("variant") == "AMH");
    CHECK(cfg.at("L2") == "100");
    CHECK(cfg.at("seed") == "7");
    std::ostringstream out;
    write_config(out, cfg);
    std::istringstream again(out.str());
    CHECK(read_config(again) == cfg);
    std::istringstream bad("novalue\n");
    CHECK_THROWS_AS(read_config(bad), Error);
}

TEST_CASE("parameter JSON round trip") {
    const StaticParams p = bench::recovery_params();
    const auto q = params_from_json(params_to_json(p));
    CHECK(q.variant == p.variant);
    CHECK(q.a == p.a);
    CHECK(q.c == p.c);
    CHECK(q.b0 == p.b0);
    CHECK(q.alpha == p.alpha);
    CHECK(q.sigma2 == p.sigma2);
    CHECK_THROWS_AS(params_from_json("{\"variant\": \"XYZ\", \"params\": {}}"), Error);
}

TEST_CASE("summary statistics") {
    const auto s = testing::make_series({0.01, -0.01, 0.02, 0.0}, {1, -1, 1, 1});
    const auto st = series_stats(s);
    CHECK(st.n == 4);
    CHECK(st.mean == doctest::Approx(0.005));
    CHECK(st.buy_share == doctest::Approx(75.0));
    CHECK_FALSE(st.mean_duration.has_value());
    CHECK(format_stats(st).find("75") != std::string::npos);
}

}
