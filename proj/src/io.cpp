#include "sdamh/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdamh {

namespace {

using json = nlohmann::ordered_json;

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
    fail(ErrorCategory::io, "line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& s, std::size_t line, const char* field) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) bad_row(line, std::string("cannot parse ") + field + " '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, std::size_t line, const char* field) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) bad_row(line, std::string("cannot parse ") + field + " '" + s + "'");
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot open '" + path + "' for reading");
    return in;
}

const char* kHeader = "t,ret,sign,mid,volume,timestamp";

}  // namespace

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TickSeries read_trades_csv(std::istream& in, const IngestSpec& spec) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCategory::io, "empty trades file");
    if (trim(line) != kHeader) fail(ErrorCategory::io, "line 1: expected header '" + std::string(kHeader) + "'");
    TickSeries out;
    std::size_t lineno = 1;
    int prev_sign = 0;
    std::optional<double> prev_ts;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 6) bad_row(lineno, "expected 6 fields, got " + std::to_string(f.size()));
        TradeEvent e;
        e.index = parse_int(f[0], lineno, "t");
        e.ret = parse_double(f[1], lineno, "ret");
        if (spec.log_returns) e.ret = std::expm1(e.ret);
        const bool missing_sign = f[2].empty() || f[2] == "0";
        if (missing_sign && spec.sign_rule == SignRule::quote_rule) {
            if (e.ret > 0.0)
                e.sign = 1;
            else if (e.ret < 0.0)
                e.sign = -1;
            else if (prev_sign != 0)
                e.sign = prev_sign;
            else
                bad_row(lineno, "cannot infer the sign of a trade with no mid move and no earlier sign");
        } else {
            const auto s = parse_int(f[2], lineno, "sign");
            if (s != 1 && s != -1) bad_row(lineno, "sign must be +1 or -1, got " + f[2]);
            e.sign = static_cast<int>(s);
        }
        if (!f[3].empty()) e.mid = parse_double(f[3], lineno, "mid");
        if (!f[4].empty()) e.volume = parse_double(f[4], lineno, "volume");
        if (!f[5].empty()) {
            e.timestamp = parse_double(f[5], lineno, "timestamp");
            if (prev_ts && *e.timestamp < *prev_ts) bad_row(lineno, "timestamps must not decrease");
            prev_ts = e.timestamp;
        }
        try {
            out.push_back(e);
        } catch (const Error& err) {
            bad_row(lineno, err.what());
        }
        prev_sign = e.sign;
    }
    return out;
}

TickSeries read_trades_csv(const std::string& path, const IngestSpec& spec) {
    auto in = open_in(path);
    return read_trades_csv(in, spec);
}

TickSeries read_lobster(const std::string& message_path, const std::string& orderbook_path) {
    auto msg = open_in(message_path);
    auto book = open_in(orderbook_path);
    std::string mline, bline;
    std::size_t lineno = 0;
    std::optional<double> prev_mid;  // mid after the previous event
    std::optional<double> last_trade_mid;
    TickSeries out;
    struct Pending {
        double time = 0.0;
        int sign = 0;
        double volume = 0.0;
        double mid = 0.0;
        double ref_mid = 0.0;
    };
    std::optional<Pending> pending;
    std::int64_t index = 0;
    auto flush = [&] {
        if (!pending) return;
        TradeEvent e;
        e.index = ++index;
        const double ref = last_trade_mid.value_or(pending->ref_mid);
        e.ret = (pending->mid - ref) / ref;
        e.sign = pending->sign;
        e.mid = pending->mid;
        e.volume = pending->volume;
        e.timestamp = pending->time;
        out.push_back(e);
        last_trade_mid = pending->mid;
        pending.reset();
    };
    while (std::getline(msg, mline)) {
        ++lineno;
        if (!std::getline(book, bline)) fail(ErrorCategory::io, "orderbook file is shorter than the message file");
        const auto m = split(trim(mline), ',');
        const auto b = split(trim(bline), ',');
        if (m.size() < 6) bad_row(lineno, "LOBSTER message rows need 6 fields");
        if (b.size() < 4) bad_row(lineno, "LOBSTER orderbook rows need at least 4 fields");
        const double time = parse_double(m[0], lineno, "time");
        const auto type = parse_int(m[1], lineno, "type");
        const double size = parse_double(m[3], lineno, "size");
        const auto dir = parse_int(m[5], lineno, "direction");
        const double ask = parse_double(b[0], lineno, "ask price") / 10000.0;
        const double bid = parse_double(b[2], lineno, "bid price") / 10000.0;
        const double mid = 0.5 * (ask + bid);
        if (type == 4 || type == 5) {
            if (dir != 1 && dir != -1) bad_row(lineno, "direction must be +1 or -1");
            // a resting sell (-1) is hit by a buyer-initiated trade
            const int sign = dir == -1 ? 1 : -1;
            if (pending && (pending->time != time || pending->sign != sign)) flush();
            if (!pending) {
                if (!prev_mid && !last_trade_mid) {
                    prev_mid = mid;
                    continue;  // no reference mid before the first execution
                }
                pending = Pending{time, sign, 0.0, mid, prev_mid.value_or(mid)};
            }
            pending->volume += size;
            pending->mid = mid;
        } else {
            flush();
        }
        prev_mid = mid;
    }
    flush();
    return out;
}

TickSeries ingest(const std::string& path, const IngestSpec& spec) {
    if (spec.format == IngestSpec::Format::lobster_pair) {
        if (spec.orderbook_path.empty()) fail(ErrorCategory::validation, "LOBSTER ingestion needs an orderbook file");
        return read_lobster(path, spec.orderbook_path);
    }
    return read_trades_csv(path, spec);
}

void write_trades_csv(std::ostream& out, const TickSeries& series) {
    out << kHeader << '\n';
    for (const auto& e : series.events()) {
        out << e.index << ',' << fmt17(e.ret) << ',' << e.sign << ',';
        if (e.mid) out << fmt17(*e.mid);
        out << ',';
        if (e.volume) out << fmt17(*e.volume);
        out << ',';
        if (e.timestamp) out << fmt17(*e.timestamp);
        out << '\n';
    }
}

void write_trades_csv(const std::string& path, const TickSeries& series) {
    std::ofstream out(path);
    if (!out) fail(ErrorCategory::io, "cannot open '" + path + "' for writing");
    write_trades_csv(out, series);
}

SeriesStats series_stats(const TickSeries& series) {
    SeriesStats s;
    s.n = series.size();
    if (s.n == 0) return s;
    const auto r = series.returns();
    const double n = static_cast<double>(s.n);
    for (double v : r) s.mean += v;
    s.mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : r) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.std = std::sqrt(m2);
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    std::size_t buys = 0;
    for (double x : series.signs()) buys += x > 0.0 ? 1 : 0;
    s.buy_share = 100.0 * static_cast<double>(buys) / n;
    const auto& first = series[0].timestamp;
    const auto& last = series[s.n - 1].timestamp;
    if (s.n > 1 && first && last) s.mean_duration = (*last - *first) / (n - 1.0);
    return s;
}

std::string format_stats(const SeriesStats& s) {
    std::ostringstream o;
    o << "trades " << s.n << '\n'
      << "mean " << fmt17(s.mean) << '\n'
      << "std " << fmt17(s.std) << '\n'
      << "skew " << fmt17(s.skewness) << '\n'
      << "kurt " << fmt17(s.excess_kurtosis) << '\n'
      << "buy_pct " << fmt17(s.buy_share) << '\n';
    if (s.mean_duration) o << "duration " << fmt17(*s.mean_duration) << '\n';
    return o.str();
}

std::map<std::string, std::string> read_config(std::istream& in) {
    std::map<std::string, std::string> cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad_row(lineno, "expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) bad_row(lineno, "empty key");
        cfg[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    auto in = open_in(path);
    return read_config(in);
}

void write_config(std::ostream& out, const std::map<std::string, std::string>& cfg) {
    for (const auto& [k, v] : cfg) out << k << " = " << v << '\n';
}

namespace {

json params_json(const StaticParams& p) {
    json j;
    j["variant"] = std::string(to_string(p.variant));
    const auto names = param_names(p.variant, p.k());
    std::vector<double> values{p.mu1, p.mu2};
    for (const auto* fam : {&p.a, &p.b, &p.c, &p.d}) values.insert(values.end(), fam->begin(), fam->end());
    values.push_back(p.b0);
    values.push_back(p.sigma2);
    if (is_linear(p.variant)) values.push_back(p.sigma2_x);
    if (is_score_driven(p.variant)) {
        values.push_back(p.omega);
        values.push_back(p.beta);
        values.push_back(p.alpha);
    }
    json vals = json::object();
    for (std::size_t i = 0; i < names.size(); ++i) vals[names[i]] = values[i];
    j["params"] = vals;
    return j;
}

StaticParams params_from(const json& j) {
    if (!j.contains("variant") || !j.contains("params"))
        fail(ErrorCategory::io, "parameter document needs 'variant' and 'params'");
    const Variant v = parse_variant(j["variant"].get<std::string>());
    const auto& vals = j["params"];
    int k = 3;
    if (!is_aggregated(v)) {
        k = 0;
        while (vals.contains("a" + std::to_string(k + 1))) ++k;
    }
    const auto names = param_names(v, k);
    std::vector<double> x;
    for (const auto& n : names) {
        if (!vals.contains(n)) fail(ErrorCategory::io, "parameter '" + n + "' is missing");
        x.push_back(vals[n].get<double>());
    }
    StaticParams p;
    p.variant = v;
    std::size_t at = 0;
    p.mu1 = x[at++];
    p.mu2 = x[at++];
    for (auto* fam : {&p.a, &p.b, &p.c, &p.d}) {
        fam->resize(static_cast<std::size_t>(k));
        for (auto& c : *fam) c = x[at++];
    }
    p.b0 = x[at++];
    p.sigma2 = x[at++];
    if (is_linear(v)) p.sigma2_x = x[at++];
    if (is_score_driven(v)) {
        p.omega = x[at++];
        p.beta = x[at++];
        p.alpha = x[at++];
    }
    p.validate();
    return p;
}

}  // namespace

std::string params_to_json(const StaticParams& p, int indent) { return params_json(p).dump(indent); }

StaticParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        fail(ErrorCategory::io, std::string("malformed parameter document: ") + e.what());
    }
    return params_from(j);
}

std::string fit_report_to_json(const FitReport& r, const StaticParams& params, int indent) {
    json j = params_json(params);
    j["method"] = r.method;
    j["working_likelihood"] = r.working_likelihood;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["evaluations"] = r.evaluations;
    j["grad_norm"] = r.grad_norm;
    j["loglik"] = r.loglik;
    j["start_loglik"] = r.start_loglik;
    j["n_obs"] = r.n_obs;
    json se = json::object();
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        const double v = i < r.std_errors.size() ? r.std_errors[i] : NAN;
        se[r.names[i]] = std::isfinite(v) ? json(v) : json(nullptr);
    }
    j["std_errors"] = se;
    j["covariance_ok"] = r.covariance_ok;
    if (r.covariance_ok) {
        json cov = json::array();
        for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < r.covariance.cols(); ++k) row.push_back(r.covariance(i, k));
            cov.push_back(row);
        }
        j["covariance"] = cov;
    }
    j["message"] = r.message;
    return j.dump(indent);
}

StaticParams params_from_report(const std::string& path) { return params_from_json(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) fail(ErrorCategory::io, "cannot open '" + path + "' for writing");
    out << text;
}

}  // namespace sdamh
