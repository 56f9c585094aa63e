#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdamh {

// Error categories. The CLI maps each category onto a distinct exit code.
enum class ErrorCategory {
    validation,
    insufficient_history,
    domain,
    variant,
    balanced_window,
    numerical,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}
    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& what);

/// Model family members. H/MH use raw lags, the others use aggregated lags.
enum class Variant { H, AH, MH, AMH, SdAr, SdInt };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

constexpr bool is_linear(Variant v) { return v == Variant::H || v == Variant::AH; }
constexpr bool is_aggregated(Variant v) { return v != Variant::H && v != Variant::MH; }
constexpr bool is_score_driven(Variant v) { return v == Variant::SdAr || v == Variant::SdInt; }

/// Lag layout. L1/L2 are the aggregation horizons; p is the raw lag count
/// used by the non-aggregated variants (H, MH).
struct AggregationSpec {
    int L1 = 10;
    int L2 = 100;
    int p = 5;

    void validate() const;
    /// Number of regressors per variable (return or sign) for a variant.
    [[nodiscard]] int features(Variant v) const { return is_aggregated(v) ? 3 : p; }
};

struct TradeEvent {
    std::int64_t index = 0;
    double ret = 0.0;
    int sign = 1;
    std::optional<double> mid;
    std::optional<double> volume;
    std::optional<double> timestamp;
};

/// Ordered trade events in trade time. Returns and signs are also kept as
/// contiguous columns for the filter and likelihood loops.
class TickSeries {
public:
    TickSeries() = default;
    explicit TickSeries(std::vector<TradeEvent> events);

    void push_back(const TradeEvent& e);
    void reserve(std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
    [[nodiscard]] bool empty() const noexcept { return events_.empty(); }
    [[nodiscard]] const TradeEvent& operator[](std::size_t i) const { return events_[i]; }
    [[nodiscard]] const std::vector<TradeEvent>& events() const noexcept { return events_; }
    [[nodiscard]] std::span<const double> returns() const noexcept { return ret_; }
    [[nodiscard]] std::span<const double> signs() const noexcept { return sign_; }

    /// Trades [first, last) as a new series (indices kept).
    [[nodiscard]] TickSeries slice(std::size_t first, std::size_t last) const;

    friend bool operator==(const TickSeries& a, const TickSeries& b);

private:
    std::vector<TradeEvent> events_;
    std::vector<double> ret_;
    std::vector<double> sign_;
};

void validate_event(const TradeEvent& e);

struct LagAggregates {
    double r_lag1 = 0.0;
    double r_L1 = 0.0;
    double r_L2 = 0.0;
    double x_lag1 = 0.0;
    double x_L1 = 0.0;
    double x_L2 = 0.0;
};

/// Lag aggregates for trade t (0-based). Requires t >= L2, i.e. L2 trades of
/// history; the first L2 trades are warm-up.
LagAggregates aggregate_lags(const TickSeries& series, const AggregationSpec& spec, std::size_t t);
LagAggregates aggregate_lags(std::span<const double> r, std::span<const double> x,
                             const AggregationSpec& spec, std::size_t t);

/// Writes the k = spec.features(v) return regressors into fr and sign
/// regressors into fx for trade t. Aggregated variants use
/// (lag 1, short aggregate, long aggregate); raw-lag variants use lags 1..p.
void lag_features(std::span<const double> r, std::span<const double> x, const AggregationSpec& spec,
                  Variant v, std::size_t t, double* fr, double* fx);

/// Numerically stable inverse logit.
inline double inv_logit(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

/// Constant coefficients of a model variant plus the score-recursion
/// coefficients. Lag coefficient vectors hold k = spec.features(variant)
/// entries: for aggregated variants {lag 1, short aggregate, long aggregate}
/// (a1, a10bar, a100bar, ...), for H/MH the raw lags 1..p.
struct StaticParams {
    Variant variant = Variant::AMH;
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::vector<double> a{0.0, 0.0, 0.0};  // return on past returns
    std::vector<double> b{0.0, 0.0, 0.0};  // return on past signs
    std::vector<double> c{0.0, 0.0, 0.0};  // sign log-odds on past returns
    std::vector<double> d{0.0, 0.0, 0.0};  // sign log-odds on past signs
    double b0 = 0.0;        // instantaneous impact (initial value for score-driven variants)
    double sigma2 = 1.0;    // return innovation variance
    double sigma2_x = 1.0;  // residual variance of the linear sign equation (H/AH only)
    double omega = 0.0;
    double beta = 1.0;
    double alpha = 0.0;

    /// Zero coefficients with the lag layout of `v`.
    static StaticParams zeros(Variant v, const AggregationSpec& spec = {});

    [[nodiscard]] int k() const noexcept { return static_cast<int>(a.size()); }
    void validate() const;
};

/// Coefficient names in serialization order, e.g. "mu1", "a1", "a10bar", ...
std::vector<std::string> param_names(Variant v, int k);

struct ConditionalMeans {
    double mu1_t = 0.0;
    double mu2_t = 0.0;
    double state_t = 0.0;
    double pi_t = 0.5;
};

/// Conditional return mean, sign log-odds, market state and buy probability.
ConditionalMeans conditional_means(const StaticParams& params, double b0_t, const LagAggregates& lags,
                                   double x_t);

/// Regressors for every effective observation t = L2 .. T-1, computed once
/// per series so likelihood evaluations reduce to dot products.
struct Design {
    Variant variant = Variant::AMH;
    std::size_t first = 0;
    int k = 3;
    std::vector<double> fr;  // n x k, row-major
    std::vector<double> fx;  // n x k, row-major
    std::vector<double> r;   // observed returns at effective t
    std::vector<double> x;   // observed signs at effective t

    [[nodiscard]] std::size_t n() const noexcept { return r.size(); }
    [[nodiscard]] const double* fr_row(std::size_t i) const { return fr.data() + i * static_cast<std::size_t>(k); }
    [[nodiscard]] const double* fx_row(std::size_t i) const { return fx.data() + i * static_cast<std::size_t>(k); }
};

Design build_design(const TickSeries& series, Variant v, const AggregationSpec& spec);

}  // namespace sdamh
