// Command-line front end: simulate, fit, filter, irf, impact, diagnose, benchmark.

#include "sdamh/benchmark.hpp"
#include "sdamh/diagnostics.hpp"
#include "sdamh/estimate.hpp"
#include "sdamh/impact.hpp"
#include "sdamh/io.hpp"
#include "sdamh/irf.hpp"
#include "sdamh/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sdamh;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitBenchmarkFailed = 9;

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::validation:
            return 2;
        case ErrorCategory::insufficient_history:
            return 3;
        case ErrorCategory::domain:
            return 4;
        case ErrorCategory::variant:
            return 5;
        case ErrorCategory::balanced_window:
            return 6;
        case ErrorCategory::numerical:
            return 7;
        case ErrorCategory::io:
            return 8;
    }
    return kExitUsage;
}

const char* category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::validation:
            return "validation";
        case ErrorCategory::insufficient_history:
            return "insufficient-history";
        case ErrorCategory::domain:
            return "domain";
        case ErrorCategory::variant:
            return "variant";
        case ErrorCategory::balanced_window:
            return "balanced-window";
        case ErrorCategory::numerical:
            return "numerical";
        case ErrorCategory::io:
            return "io";
    }
    return "?";
}

struct KeyDoc {
    const char* key;
    const char* help;
    const char* fallback;
};

// Every RunConfig field, its flag help and its default ("" = unset).
const std::vector<KeyDoc> kKeys{
    {"variant", "model variant: H, AH, MH, AMH, SDAMH-AR, SDAMH-INT", "SDAMH-INT"},
    {"L1", "short aggregation horizon", "10"},
    {"L2", "long aggregation horizon", "100"},
    {"p", "raw lag count for H and MH", "5"},
    {"n_draws", "random-search draws before the optimizer", "100000"},
    {"init_seed", "seed of the random search", "20210604"},
    {"seed", "seed for simulation and Monte Carlo", "1"},
    {"out", "output directory", ""},
    {"input", "trades CSV or LOBSTER message file", ""},
    {"format", "trades-csv or lobster-pair", "trades-csv"},
    {"orderbook", "LOBSTER orderbook file", ""},
    {"sign_rule", "provided or quote-rule", "provided"},
    {"log_returns", "the ret column holds log returns", "false"},
    {"params", "parameter document or fit report (JSON)", ""},
    {"T", "simulated observations", "10000"},
    {"scenario", "impact path: score-driven, constant, fast-sine, step, ramp, ar1", "score-driven"},
    {"ar1_noise_sd", "noise of the AR(1) impact path", "0.05"},
    {"b0_init", "initial impact for filtering: a number, 'params' or 'fb'", "params"},
    {"fb_trades", "leading trades used by the forward-backward initialization", "1000"},
    {"bands", "Monte Carlo draws for impact confidence bands (0 = none)", "0"},
    {"H", "CIRF horizon", "20"},
    {"S", "Monte Carlo paths or replications", "1000"},
    {"antithetic", "antithetic CIRF paths", "true"},
    {"cirf_mode", "common or independent shocks across CIRF branches", "common"},
    {"delta_x", "trade-sign shock", "1"},
    {"thin", "CIRF every thin-th trade", "1"},
    {"t", "single trade index for the CIRF (0-based)", ""},
    {"M", "impact window length (odd)", "101"},
    {"omega_mode", "blocks or shifted window means", "blocks"},
    {"bin", "regression bins: trades or seconds", "trades"},
    {"bin_size", "regression bin size", "101"},
    {"block", "trade block for aggregated residual tests", "100"},
    {"time_bin", "seconds per physical-time residual bin (needs timestamps)", ""},
    {"bic", "BIC convention: single (K log T - log L) or conventional", "single"},
    {"regressions", "add LRCIRF state regressions to the diagnostics", "false"},
    {"suite", "benchmark suites: recovery, filter, init, impact or all", "all"},
    {"scenarios", "benchmark filter scenarios", "fast-sine,step,ramp,ar1"},
    {"sizes", "benchmark sample sizes for the filter suite", "1000,10000"},
};

struct RunConfig {
    Variant variant = Variant::SdInt;
    AggregationSpec spec{};
    InitSearchSpec search{};
    std::uint64_t seed = 1;
    std::string out;
    std::string input;
    IngestSpec ingest{};
    std::string params;
    std::size_t T = 10000;
    ScenarioKind scenario = ScenarioKind::ScoreDriven;
    Ar1Scenario ar1{};
    std::string b0_init = "params";
    std::size_t fb_trades = 1000;
    int bands = 0;
    CirfOptions cirf{};
    std::size_t thin = 1;
    std::optional<std::size_t> t;
    int M = 101;
    OmegaMode omega_mode = OmegaMode::blocks;
    BinSpec bin{};
    std::size_t block = 100;
    std::optional<double> time_bin;
    BicConvention bic = BicConvention::single;
    bool regressions = false;
    std::vector<std::string> suites;
    std::vector<ScenarioKind> scenarios;
    std::vector<std::size_t> sizes;
    std::map<std::string, std::string> resolved;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

class Parser {
public:
    explicit Parser(const std::map<std::string, std::string>& cfg) : cfg_(cfg) {}

    [[nodiscard]] const std::string& raw(const std::string& key) const { return cfg_.at(key); }
    [[nodiscard]] bool has(const std::string& key) const { return !cfg_.at(key).empty(); }

    template <class T>
    T number(const std::string& key, T lo, T hi) {
        const std::string& s = raw(key);
        std::istringstream in(s);
        T v{};
        in >> v;
        if (!in || !in.eof()) {
            errors.push_back(key + ": cannot parse '" + s + "'");
            return lo;
        }
        if (v < lo || v > hi) {
            std::ostringstream msg;
            msg << key << ": " << s << " outside [" << lo << ", " << hi << "]";
            errors.push_back(msg.str());
            return lo;
        }
        return v;
    }

    bool flag(const std::string& key) {
        const std::string& s = raw(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        errors.push_back(key + ": expected true or false, got '" + s + "'");
        return false;
    }

    std::string choice(const std::string& key, const std::vector<std::string>& allowed) {
        const std::string& s = raw(key);
        for (const auto& a : allowed)
            if (a == s) return s;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        errors.push_back(key + ": '" + s + "' is not one of " + list);
        return allowed.front();
    }

    std::vector<std::string> errors;

private:
    const std::map<std::string, std::string>& cfg_;
};

RunConfig resolve(const std::map<std::string, std::string>& cfg) {
    Parser p(cfg);
    RunConfig rc;
    rc.resolved = cfg;
    try {
        rc.variant = parse_variant(p.raw("variant"));
    } catch (const Error& e) {
        p.errors.push_back(std::string("variant: ") + e.what());
    }
    rc.spec.L1 = p.number<int>("L1", 2, 100000);
    rc.spec.L2 = p.number<int>("L2", 3, 100000);
    rc.spec.p = p.number<int>("p", 1, 1000);
    if (p.errors.empty()) {
        try {
            rc.spec.validate();
        } catch (const Error& e) {
            p.errors.push_back(std::string("L1/L2/p: ") + e.what());
        }
    }
    rc.search.n_draws = p.number<std::size_t>("n_draws", 1, 100000000);
    rc.search.seed = p.number<std::uint64_t>("init_seed", 0, UINT64_MAX);
    rc.seed = p.number<std::uint64_t>("seed", 0, UINT64_MAX);
    rc.out = p.raw("out");
    if (rc.out.empty()) {
        const char* env = std::getenv("SDAMH_OUTPUT_DIR");
        rc.out = env != nullptr && *env != '\0' ? env : "sdamh-out";
        rc.resolved["out"] = rc.out;
    }
    rc.input = p.raw("input");
    rc.ingest.format = p.choice("format", {"trades-csv", "lobster-pair"}) == "lobster-pair"
                           ? IngestSpec::Format::lobster_pair
                           : IngestSpec::Format::trades_csv;
    rc.ingest.orderbook_path = p.raw("orderbook");
    rc.ingest.sign_rule =
        p.choice("sign_rule", {"provided", "quote-rule"}) == "quote-rule" ? SignRule::quote_rule : SignRule::provided;
    rc.ingest.log_returns = p.flag("log_returns");
    rc.params = p.raw("params");
    rc.T = p.number<std::size_t>("T", 1, 100000000);
    try {
        rc.scenario = parse_scenario(p.raw("scenario"));
    } catch (const Error& e) {
        p.errors.push_back(std::string("scenario: ") + e.what());
    }
    rc.ar1.noise_sd = p.number<double>("ar1_noise_sd", 0.0, 1e6);
    rc.ar1.seed = rc.seed;
    rc.b0_init = p.raw("b0_init");
    if (rc.b0_init != "params" && rc.b0_init != "fb") p.number<double>("b0_init", -1e300, 1e300);
    rc.fb_trades = p.number<std::size_t>("fb_trades", 2, 1000000000);
    rc.bands = p.number<int>("bands", 0, 1000000);
    rc.cirf.H = p.number<int>("H", 1, 100000);
    rc.cirf.S = p.number<int>("S", 1, 100000000);
    rc.cirf.antithetic = p.flag("antithetic");
    rc.cirf.mode = p.choice("cirf_mode", {"common", "independent"}) == "independent" ? CirfMode::independent
                                                                                    : CirfMode::common;
    rc.cirf.delta_x = p.number<double>("delta_x", -1e6, 1e6);
    rc.cirf.seed = rc.seed;
    rc.thin = p.number<std::size_t>("thin", 1, 100000000);
    if (p.has("t")) rc.t = p.number<std::size_t>("t", 0, 100000000000ULL);
    rc.M = p.number<int>("M", 1, 100000000);
    if (rc.M % 2 == 0) p.errors.push_back("M: impact window length must be odd");
    rc.omega_mode = p.choice("omega_mode", {"blocks", "shifted"}) == "shifted" ? OmegaMode::shifted : OmegaMode::blocks;
    rc.bin.kind = p.choice("bin", {"trades", "seconds"}) == "seconds" ? BinSpec::Kind::seconds : BinSpec::Kind::trades;
    rc.bin.size = p.number<double>("bin_size", 1e-9, 1e12);
    rc.block = p.number<std::size_t>("block", 2, 100000000);
    if (p.has("time_bin")) rc.time_bin = p.number<double>("time_bin", 1e-9, 1e12);
    rc.bic = p.choice("bic", {"single", "conventional"}) == "conventional" ? BicConvention::conventional
                                                                          : BicConvention::single;
    rc.regressions = p.flag("regressions");
    for (const auto& s : split_list(p.raw("suite"))) {
        if (s == "all") {
            rc.suites = {"recovery", "filter", "init", "impact"};
        } else if (s == "recovery" || s == "filter" || s == "init" || s == "impact") {
            rc.suites.push_back(s);
        } else {
            p.errors.push_back("suite: unknown suite '" + s + "'");
        }
    }
    for (const auto& s : split_list(p.raw("scenarios"))) {
        try {
            rc.scenarios.push_back(parse_scenario(s));
        } catch (const Error& e) {
            p.errors.push_back(std::string("scenarios: ") + e.what());
        }
    }
    for (const auto& s : split_list(p.raw("sizes"))) {
        std::istringstream in(s);
        std::size_t v = 0;
        in >> v;
        if (!in || !in.eof() || v == 0)
            p.errors.push_back("sizes: cannot parse '" + s + "'");
        else
            rc.sizes.push_back(v);
    }
    rc.cirf.spec = rc.spec;
    if (!p.errors.empty()) {
        std::string all = "invalid configuration:";
        for (const auto& e : p.errors) all += "\n  " + e;
        fail(ErrorCategory::validation, all);
    }
    return rc;
}

void require(const RunConfig& rc, std::initializer_list<const char*> keys) {
    std::vector<std::string> missing;
    for (const char* k : keys)
        if (rc.resolved.at(k).empty()) missing.emplace_back(k);
    if (missing.empty()) return;
    std::string all = "invalid configuration:";
    for (const auto& k : missing) all += "\n  " + k + ": required by this command";
    fail(ErrorCategory::validation, all);
}

fs::path prepare_out(const RunConfig& rc) {
    const fs::path dir(rc.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCategory::io, "cannot create output directory '" + rc.out + "': " + ec.message());
    std::ofstream echo(dir / "config.txt");
    if (!echo) fail(ErrorCategory::io, "cannot write the configuration echo");
    write_config(echo, rc.resolved);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCategory::io, "cannot open '" + path.string() + "' for writing");
    return out;
}

std::string opt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

TickSeries load_series(const RunConfig& rc) { return ingest(rc.input, rc.ingest); }

StaticParams load_params(const RunConfig& rc) {
    StaticParams p = params_from_report(rc.params);
    if (p.k() != rc.spec.features(p.variant))
        fail(ErrorCategory::validation, "parameter document does not match the lag layout (p / aggregation)");
    return p;
}

/// Simulation defaults: the recovery design mapped onto the requested variant.
/// H and AH are not simulated.
StaticParams default_params(Variant v, const AggregationSpec& spec) {
    const StaticParams base = bench::recovery_params();
    StaticParams p = StaticParams::zeros(v, spec);
    p.mu1 = base.mu1;
    p.mu2 = base.mu2;
    p.b0 = base.b0;
    p.sigma2 = base.sigma2;
    if (is_aggregated(v)) {
        p.a = base.a;
        p.b = base.b;
        p.c = base.c;
        p.d = base.d;
    } else {
        p.a[0] = base.a[0];
        p.b[0] = base.b[0];
        p.c[0] = base.c[0];
        p.d[0] = base.d[0];
    }
    if (v == Variant::SdInt) p.alpha = base.alpha;
    if (v == Variant::SdAr) {
        p.alpha = base.alpha;
        p.beta = 0.99;
        p.omega = 0.01 * base.b0;
    }
    p.validate();
    return p;
}

double initial_impact(const RunConfig& rc, const TickSeries& series, const StaticParams& p) {
    if (rc.b0_init == "params") return p.b0;
    if (rc.b0_init == "fb") {
        const std::size_t n = std::min(series.size(), static_cast<std::size_t>(rc.spec.L2) + rc.fb_trades);
        return forward_backward_init(series.slice(0, n), p, p.b0, rc.spec);
    }
    return std::stod(rc.b0_init);
}

void write_filter_csv(const fs::path& path, const FilterState& f, std::size_t first, const BandEstimate* bands) {
    auto out = open_out(path);
    out << "t,b0,state,mu1,mu2,pi,band_lo,band_hi\n";
    for (std::size_t i = 0; i < f.b0_path.size(); ++i) {
        out << first + i << ',' << fmt17(f.b0_path[i]) << ',' << fmt17(f.state[i]) << ',' << fmt17(f.mu1[i]) << ','
            << fmt17(f.mu2[i]) << ',' << fmt17(f.pi[i]) << ',';
        if (bands != nullptr) out << fmt17(bands->lower[i]) << ',' << fmt17(bands->upper[i]);
        else out << ',';
        out << '\n';
    }
}

int cmd_simulate(const RunConfig& rc) {
    const StaticParams p = rc.params.empty() ? default_params(rc.variant, rc.spec) : load_params(rc);
    const auto dir = prepare_out(rc);
    const ScenarioPath sc = rc.scenario == ScenarioKind::ScoreDriven || rc.scenario == ScenarioKind::Constant
                                ? ScenarioPath{rc.scenario, {}, rc.ar1}
                                : scenario_path(rc.scenario, rc.T, rc.ar1);
    SimulateOptions so;
    so.spec = rc.spec;
    so.include_warmup = true;
    const auto sim = simulate(p, sc, rc.T, rc.seed, so);
    write_trades_csv((dir / "trades.csv").string(), sim.series);
    auto path = open_out(dir / "impact_path.csv");
    path << "t,b0\n";
    for (std::size_t i = 0; i < sim.b0_path.size(); ++i) path << sim.warmup + i << ',' << fmt17(sim.b0_path[i]) << '\n';
    write_text_file((dir / "params.json").string(), params_to_json(p) + "\n");
    std::cout << "simulated " << rc.T << " trades (+" << sim.warmup << " warm-up) to " << dir.string() << '\n';
    return 0;
}

int cmd_fit(const RunConfig& rc) {
    require(rc, {"input"});
    const auto series = load_series(rc);
    const auto dir = prepare_out(rc);
    FitOptions fo;
    fo.spec = rc.spec;
    if (!rc.params.empty()) fo.start = load_params(rc);
    const auto res = fit(series, rc.variant, rc.search, fo);
    write_text_file((dir / "fit.json").string(), fit_report_to_json(res.report, res.params) + "\n");
    write_text_file((dir / "stats.txt").string(), format_stats(series_stats(series)));
    std::optional<BandEstimate> bands;
    if (rc.bands > 0 && is_score_driven(rc.variant))
        bands = confidence_bands(series, res.params, res.report, rc.bands, 0.95, rc.seed, rc.spec);
    write_filter_csv(dir / "filter.csv", res.filter, static_cast<std::size_t>(rc.spec.L2), bands ? &*bands : nullptr);
    std::cout << "variant " << to_string(rc.variant) << " loglik " << fmt17(res.report.loglik) << " converged "
              << (res.report.converged ? "yes" : "no") << '\n';
    for (std::size_t i = 0; i < res.report.names.size(); ++i) {
        const double se = i < res.report.std_errors.size() ? res.report.std_errors[i] : NAN;
        std::cout << "  " << res.report.names[i] << ' ' << fmt17(res.report.estimates[i]) << " (" << fmt17(se) << ")\n";
    }
    return 0;
}

int cmd_filter(const RunConfig& rc) {
    require(rc, {"input", "params"});
    const auto series = load_series(rc);
    const StaticParams p = load_params(rc);
    const auto dir = prepare_out(rc);
    const auto f = filter(series, p, initial_impact(rc, series, p), rc.spec);
    write_filter_csv(dir / "filter.csv", f, static_cast<std::size_t>(rc.spec.L2), nullptr);
    std::cout << "filtered " << f.b0_path.size() << " trades, loglik " << fmt17(f.loglik.total) << '\n';
    return 0;
}

int cmd_irf(const RunConfig& rc) {
    require(rc, {"input", "params"});
    const auto series = load_series(rc);
    const StaticParams p = load_params(rc);
    const auto dir = prepare_out(rc);
    if (is_linear(p.variant)) {
        const auto lin = irf_linear(p, rc.cirf.H, rc.cirf.delta_x, rc.spec);
        auto out = open_out(dir / "irf_linear.csv");
        out << "h,irf,cirf\n";
        for (std::size_t h = 0; h < lin.irf.size(); ++h)
            out << h << ',' << fmt17(lin.irf[h]) << ',' << fmt17(lin.cirf[h]) << '\n';
        if (!lin.warning.empty()) std::cerr << "warning: " << lin.warning << '\n';
    }
    std::optional<FilterState> fstate;
    if (is_score_driven(p.variant)) fstate = filter(series, p, initial_impact(rc, series, p), rc.spec);
    const FilterState* fsp = fstate ? &*fstate : nullptr;
    std::vector<std::size_t> times;
    if (rc.t) {
        times.push_back(*rc.t);
    } else {
        for (std::size_t t = static_cast<std::size_t>(rc.spec.L2); t < series.size(); t += rc.thin) times.push_back(t);
    }
    auto out = open_out(dir / "cirf.csv");
    out << "t,h,cirf,mc_std,delta_x\n";
    auto lr = open_out(dir / "lrcirf.csv");
    lr << "t,lrcirf,mc_std,c,kappa,phi\n";
    for (const auto t : times) {
        CirfOptions o = rc.cirf;
        // per-trade substreams keep single-t runs consistent with full paths
        o.seed = substream_seed(rc.seed, t);
        const auto r = cirf_monte_carlo(series, p, fsp, t, o);
        for (std::size_t h = 0; h < r.cirf.size(); ++h)
            out << t << ',' << r.horizons[h] << ',' << fmt17(r.cirf[h]) << ',' << fmt17(r.mc_std[h]) << ','
                << fmt17(r.delta_x) << '\n';
        const auto e = fit_exponential(r.cirf);
        lr << t << ',' << fmt17(r.lrcirf) << ',' << fmt17(r.lrcirf_std) << ',' << fmt17(e.c) << ',' << fmt17(e.kappa)
           << ',' << fmt17(e.phi) << '\n';
    }
    std::cout << "CIRF at " << times.size() << " trades written to " << dir.string() << '\n';
    return 0;
}

int cmd_impact(const RunConfig& rc) {
    require(rc, {"input", "params"});
    const auto series = load_series(rc);
    const StaticParams p = load_params(rc);
    const auto dir = prepare_out(rc);
    std::optional<FilterState> fstate;
    if (is_score_driven(p.variant)) fstate = filter(series, p, initial_impact(rc, series, p), rc.spec);
    std::optional<BandEstimate> bands;
    if (rc.bands > 0 && is_score_driven(p.variant)) {
        FitOptions fo;
        fo.spec = rc.spec;
        fo.start = p;
        const auto refit = fit(series, p.variant, rc.search, fo);
        bands = confidence_bands(series, p, refit.report, rc.bands, 0.95, rc.seed, rc.spec);
    }
    const auto ser = impact_series(p, fstate ? &*fstate : nullptr, series, rc.M, rc.spec, rc.omega_mode,
                                   bands ? &*bands : nullptr);
    double qbar = 0.0, vbar = 0.0;
    std::size_t nq = 0, nv = 0;
    for (const auto& e : series.events()) {
        if (e.mid) qbar += *e.mid, ++nq;
        if (e.volume) vbar += *e.volume, ++nv;
    }
    const bool dollar = nq > 0 && nv > 0 && qbar > 0.0 && vbar > 0.0;
    if (dollar) qbar /= static_cast<double>(nq), vbar /= static_cast<double>(nv);
    auto out = open_out(dir / "impact.csv");
    out << "t,beta_sign,beta_dollar,band_lo,band_hi,source\n";
    auto row = [&](const ImpactEstimate& e0) {
        const ImpactEstimate e = dollar ? beta_dollar(e0, qbar, vbar) : e0;
        out << e.t << ',' << fmt17(e.beta_sign) << ',' << opt17(e.beta_dollar) << ',' << opt17(e.band_lo) << ','
            << opt17(e.band_hi) << ',' << to_string(e.source) << '\n';
    };
    for (const auto& e : ser.rows) row(e);
    try {
        row(beta_regression(series, rc.bin));
    } catch (const Error& e) {
        std::cerr << "regression skipped: " << e.what() << '\n';
    }
    std::cout << ser.rows.size() << " impact windows (" << ser.skipped << " balanced windows skipped)\n";
    return 0;
}

json lm_json(const LmSuite& s) {
    json j;
    j["lags"] = s.lags;
    j["p_values"] = s.p_values;
    j["pass_count"] = s.pass_count;
    j["level"] = s.level;
    return j;
}

json regression_json(const RegressionResult& r) {
    json j;
    j["names"] = r.names;
    j["gammas"] = r.gammas;
    j["std_errors"] = r.std_errors;
    j["p_values"] = r.p_values;
    j["r2"] = r.r2;
    j["var_shares"] = r.var_shares;
    j["n"] = r.n;
    return j;
}

int cmd_diagnose(const RunConfig& rc) {
    require(rc, {"input", "params"});
    const auto series = load_series(rc);
    const StaticParams p = load_params(rc);
    const auto dir = prepare_out(rc);
    const auto f = filter(series, p, initial_impact(rc, series, p), rc.spec);
    const auto d = diagnose(series, p, f, rc.seed, rc.block, rc.time_bin, rc.spec);
    const int K = parameter_count(p.variant, rc.spec);
    json j;
    j["variant"] = std::string(to_string(p.variant));
    j["n_obs"] = f.loglik.n_obs;
    j["loglik"] = f.loglik.total;
    j["K"] = K;
    j["bic"] = bic(K, f.loglik.n_obs, f.loglik.total, rc.bic);
    j["bic_convention"] = rc.bic == BicConvention::single ? "single" : "conventional";
    j["jb_return_p"] = d.jb_return_p;
    j["jb_trade_p"] = d.jb_trade_p;
    j["trade_residuals_randomized"] = d.trade_residuals_randomized;
    j["lm"] = lm_json(d.lm);
    j["block"] = d.block;
    j["jb_return_block_p"] = d.jb_return_block_p;
    j["lm_block"] = lm_json(d.lm_block);
    j["jb_return_time_p"] = d.jb_return_time_p ? json(*d.jb_return_time_p) : json(nullptr);
    if (rc.regressions && !is_linear(p.variant)) {
        const auto path = lrcirf_series(series, p, &f, rc.cirf, rc.thin);
        std::vector<double> b0, state;
        for (const auto t : path.t) {
            b0.push_back(f.b0_path[t - static_cast<std::size_t>(rc.spec.L2)]);
            state.push_back(f.state[t - static_cast<std::size_t>(rc.spec.L2)]);
        }
        const auto reg = state_regressions(path.lrcirf, b0, state);
        json r;
        if (reg.lrcirf_on_impact_state) r["lrcirf_on_impact_state"] = regression_json(*reg.lrcirf_on_impact_state);
        if (reg.impact_on_state) r["impact_on_state"] = regression_json(*reg.impact_on_state);
        r["lrcirf_on_state"] = regression_json(reg.lrcirf_on_state);
        j["regressions"] = r;
    }
    write_text_file((dir / "diagnostics.json").string(), j.dump(2) + "\n");
    std::cout << "JB return p " << fmt17(d.jb_return_p) << ", JB trade p " << fmt17(d.jb_trade_p) << ", LM passes "
              << d.lm.pass_count << '/' << d.lm.lags.size() << '\n';
    return 0;
}

int cmd_benchmark(const RunConfig& rc) {
    const auto dir = prepare_out(rc);
    auto csv = open_out(dir / "benchmark.csv");
    csv << "suite,item,T,mean,median,std,dq,reference\n";
    bool all = true;
    auto line = [&](const std::string& name, const bench::Verdict& v) {
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << '\n';
        all = all && v.pass;
    };
    auto summary_row = [&](const std::string& suite, const std::string& item, std::size_t T, const bench::Summary& s,
                           std::optional<double> ref) {
        csv << suite << ',' << item << ',' << T << ',' << fmt17(s.mean) << ',' << fmt17(s.median) << ','
            << fmt17(s.std) << ',' << fmt17(s.dq) << ',' << opt17(ref) << '\n';
    };
    const int S = rc.cirf.S;
    for (const auto& suite : rc.suites) {
        if (suite == "recovery") {
            const auto r = bench::recovery_study(S, rc.T, rc.seed);
            std::cout << "parameter   truth        mean         std          tolerance\n";
            for (const auto& row : r.rows) {
                std::cout << "  " << row.name << ' ' << fmt17(row.truth) << ' ' << fmt17(row.est.mean) << ' '
                          << fmt17(row.est.std) << ' ' << fmt17(row.tolerance) << (row.pass ? "" : "  <- out") << '\n';
                summary_row("recovery", row.name, rc.T, row.est, row.truth);
            }
            line("recovery", bench::judge(r));
        } else if (suite == "filter") {
            bench::FilterStudyOptions fo;
            fo.S = S;
            fo.scenarios = rc.scenarios;
            fo.sizes = rc.sizes;
            fo.seed = rc.seed;
            const auto rows = bench::filter_study(fo);
            std::cout << "scenario    T       MAE*\n";
            for (const auto& row : rows) {
                std::cout << "  " << to_string(row.scenario) << ' ' << row.T << ' ' << fmt17(row.mae_star.mean) << '\n';
                summary_row("filter", std::string(to_string(row.scenario)), row.T, row.mae_star,
                            bench::filter_reference(row.scenario, row.T));
            }
            line("filter", bench::judge(rows));
        } else if (suite == "init") {
            const auto r = bench::init_study(S, rc.T, 1e-7, rc.seed);
            summary_row("init", "b0", rc.T, r.est, r.truth);
            line("init", bench::judge(r));
        } else if (suite == "impact") {
            const auto r = bench::impact_study(S, rc.T, rc.M, rc.seed);
            summary_row("impact", "model", rc.T, r.model, 2.443e-3);
            summary_row("impact", "regression", rc.T, r.regression, 2.229e-3);
            line("impact", bench::judge(r));
        }
    }
    return all ? 0 : kExitBenchmarkFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Score-driven trade impact models"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "flat key = value configuration file");
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> opts;
    for (const auto& k : kKeys) {
        std::string name = std::string("--") + k.key;
        for (auto& ch : name)
            if (ch == '_') ch = '-';
        opts[k.key] = app.add_option(name, flags[k.key], k.help);
    }
    const std::vector<std::pair<std::string, int (*)(const RunConfig&)>> commands{
        {"simulate", cmd_simulate}, {"fit", cmd_fit},           {"filter", cmd_filter},
        {"irf", cmd_irf},           {"impact", cmd_impact},     {"diagnose", cmd_diagnose},
        {"benchmark", cmd_benchmark}};
    for (const auto& [name, fn] : commands) app.add_subcommand(name, "run " + name);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        std::map<std::string, std::string> cfg;
        for (const auto& k : kKeys) cfg[k.key] = k.fallback;
        if (!config_path.empty()) {
            for (const auto& [key, value] : read_config_file(config_path)) {
                if (!cfg.count(key)) fail(ErrorCategory::validation, "config: unknown key '" + key + "'");
                cfg[key] = value;
            }
        }
        for (const auto& [key, opt] : opts)
            if (opt->count() > 0) cfg[key] = flags[key];
        const RunConfig rc = resolve(cfg);
        for (const auto& [name, fn] : commands)
            if (app.got_subcommand(name)) return fn(rc);
    } catch (const Error& e) {
        std::cerr << "error [" << category_name(e.category()) << "]: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
