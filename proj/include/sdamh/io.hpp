#pragma once

#include "sdamh/core.hpp"
#include "sdamh/estimate.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sdamh {

enum class SignRule {
    provided,    // sign column must hold +1 or -1
    quote_rule,  // empty or zero signs inferred from the mid move, ties keep the previous sign
};

struct IngestSpec {
    enum class Format { trades_csv, lobster_pair } format = Format::trades_csv;
    SignRule sign_rule = SignRule::provided;
    bool log_returns = false;  // convert the ret column from log returns
    std::string orderbook_path;  // LOBSTER only
};

/// Canonical CSV with header `t,ret,sign,mid,volume,timestamp`.
TickSeries read_trades_csv(std::istream& in, const IngestSpec& spec = {});
TickSeries read_trades_csv(const std::string& path, const IngestSpec& spec = {});

/// LOBSTER message + orderbook files. Executions (types 4 and 5) become
/// trades signed against the resting order's side; executions sharing a
/// timestamp and side are merged into one trade.
TickSeries read_lobster(const std::string& message_path, const std::string& orderbook_path);

TickSeries ingest(const std::string& path, const IngestSpec& spec);

void write_trades_csv(std::ostream& out, const TickSeries& series);
void write_trades_csv(const std::string& path, const TickSeries& series);

/// Formats a double with 17 significant digits.
std::string fmt17(double v);

struct SeriesStats {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double buy_share = 0.0;  // percent
    std::optional<double> mean_duration;
};

SeriesStats series_stats(const TickSeries& series);
std::string format_stats(const SeriesStats& s);

/// Flat `key = value` file; `#` starts a comment.
std::map<std::string, std::string> read_config(std::istream& in);
std::map<std::string, std::string> read_config_file(const std::string& path);
void write_config(std::ostream& out, const std::map<std::string, std::string>& cfg);

std::string params_to_json(const StaticParams& p, int indent = 2);
StaticParams params_from_json(const std::string& text);
std::string fit_report_to_json(const FitReport& report, const StaticParams& params, int indent = 2);
/// Reads the parameter block of a fit report (or a bare parameter document).
StaticParams params_from_report(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sdamh
