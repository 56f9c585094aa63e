#include "sdamh/core.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace sdamh {

void fail(ErrorCategory category, const std::string& what) { throw Error(category, what); }

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 6> kVariantNames{{
    {Variant::H, "H"},
    {Variant::AH, "AH"},
    {Variant::MH, "MH"},
    {Variant::AMH, "AMH"},
    {Variant::SdAr, "SDAMH-AR"},
    {Variant::SdInt, "SDAMH-INT"},
}};

}  // namespace

std::string_view to_string(Variant v) {
    for (const auto& [var, name] : kVariantNames)
        if (var == v) return name;
    return "?";
}

Variant parse_variant(std::string_view name) {
    for (const auto& [var, n] : kVariantNames)
        if (n == name) return var;
    if (name == "SD-AR") return Variant::SdAr;
    if (name == "SD-INT" || name == "SDAMH") return Variant::SdInt;
    fail(ErrorCategory::validation, "unknown variant '" + std::string(name) + "'");
}

void AggregationSpec::validate() const {
    if (L1 < 2 || L1 >= L2)
        fail(ErrorCategory::validation, "aggregation spec requires 2 <= L1 < L2 (got L1=" + std::to_string(L1) +
                                            ", L2=" + std::to_string(L2) + ")");
    if (L2 - L1 - 1 < 1) fail(ErrorCategory::validation, "long aggregate window is empty (L2 - L1 - 1 < 1)");
    if (p < 1 || p > L2) fail(ErrorCategory::validation, "raw lag count p must lie in [1, L2]");
}

void validate_event(const TradeEvent& e) {
    if (e.sign != 1 && e.sign != -1)
        fail(ErrorCategory::domain, "trade " + std::to_string(e.index) + ": sign must be -1 or +1");
    if (!std::isfinite(e.ret)) fail(ErrorCategory::domain, "trade " + std::to_string(e.index) + ": non-finite return");
    if (e.mid && !(*e.mid > 0.0))
        fail(ErrorCategory::domain, "trade " + std::to_string(e.index) + ": mid price must be positive");
    if (e.volume && !(*e.volume > 0.0))
        fail(ErrorCategory::domain, "trade " + std::to_string(e.index) + ": volume must be positive");
}

TickSeries::TickSeries(std::vector<TradeEvent> events) {
    reserve(events.size());
    for (const auto& e : events) push_back(e);
}

void TickSeries::reserve(std::size_t n) {
    events_.reserve(n);
    ret_.reserve(n);
    sign_.reserve(n);
}

void TickSeries::push_back(const TradeEvent& e) {
    validate_event(e);
    if (!events_.empty() && e.index <= events_.back().index)
        fail(ErrorCategory::domain, "trade indices must be strictly increasing (at " + std::to_string(e.index) + ")");
    events_.push_back(e);
    ret_.push_back(e.ret);
    sign_.push_back(static_cast<double>(e.sign));
}

TickSeries TickSeries::slice(std::size_t first, std::size_t last) const {
    last = std::min(last, size());
    TickSeries out;
    if (first >= last) return out;
    out.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) out.push_back(events_[i]);
    return out;
}

bool operator==(const TickSeries& a, const TickSeries& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a.events_[i];
        const auto& y = b.events_[i];
        if (x.index != y.index || x.ret != y.ret || x.sign != y.sign || x.mid != y.mid || x.volume != y.volume ||
            x.timestamp != y.timestamp)
            return false;
    }
    return true;
}

LagAggregates aggregate_lags(std::span<const double> r, std::span<const double> x, const AggregationSpec& spec,
                             std::size_t t) {
    spec.validate();
    const auto L1 = static_cast<std::size_t>(spec.L1);
    const auto L2 = static_cast<std::size_t>(spec.L2);
    if (t < L2 || t >= r.size() + 1 || r.size() != x.size())
        fail(ErrorCategory::insufficient_history,
             "trade " + std::to_string(t) + " needs " + std::to_string(L2) + " trades of history");
    LagAggregates out;
    out.r_lag1 = r[t - 1];
    out.x_lag1 = x[t - 1];
    double sr = 0.0, sx = 0.0;
    for (std::size_t i = 2; i <= L1; ++i) {
        sr += r[t - i];
        sx += x[t - i];
    }
    out.r_L1 = sr / static_cast<double>(L1 - 1);
    out.x_L1 = sx / static_cast<double>(L1 - 1);
    sr = sx = 0.0;
    for (std::size_t j = L1 + 1; j <= L2; ++j) {
        sr += r[t - j];
        sx += x[t - j];
    }
    out.r_L2 = sr / static_cast<double>(L2 - L1 - 1);
    out.x_L2 = sx / static_cast<double>(L2 - L1 - 1);
    return out;
}

LagAggregates aggregate_lags(const TickSeries& series, const AggregationSpec& spec, std::size_t t) {
    return aggregate_lags(series.returns(), series.signs(), spec, t);
}

void lag_features(std::span<const double> r, std::span<const double> x, const AggregationSpec& spec, Variant v,
                  std::size_t t, double* fr, double* fx) {
    if (is_aggregated(v)) {
        const auto g = aggregate_lags(r, x, spec, t);
        fr[0] = g.r_lag1;
        fr[1] = g.r_L1;
        fr[2] = g.r_L2;
        fx[0] = g.x_lag1;
        fx[1] = g.x_L1;
        fx[2] = g.x_L2;
        return;
    }
    if (t < static_cast<std::size_t>(spec.p))
        fail(ErrorCategory::insufficient_history, "trade " + std::to_string(t) + " has fewer than p lags");
    for (int i = 0; i < spec.p; ++i) {
        fr[i] = r[t - 1 - static_cast<std::size_t>(i)];
        fx[i] = x[t - 1 - static_cast<std::size_t>(i)];
    }
}

StaticParams StaticParams::zeros(Variant v, const AggregationSpec& spec) {
    StaticParams p;
    p.variant = v;
    const auto k = static_cast<std::size_t>(spec.features(v));
    p.a.assign(k, 0.0);
    p.b.assign(k, 0.0);
    p.c.assign(k, 0.0);
    p.d.assign(k, 0.0);
    if (v == Variant::SdInt) {
        p.omega = 0.0;
        p.beta = 1.0;
    }
    return p;
}

void StaticParams::validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail(ErrorCategory::validation, "sigma2 must be positive");
    if (a.size() != b.size() || a.size() != c.size() || a.size() != d.size() || a.empty())
        fail(ErrorCategory::validation, "lag coefficient vectors must share a non-zero length");
    if (is_aggregated(variant) && a.size() != 3)
        fail(ErrorCategory::validation, "aggregated variants carry exactly 3 coefficients per lag family");
    if (variant == Variant::SdInt && (omega != 0.0 || beta != 1.0))
        fail(ErrorCategory::validation, "SDAMH-INT requires omega = 0 and beta = 1");
    if (!is_score_driven(variant) && alpha != 0.0)
        fail(ErrorCategory::validation, "static variants require alpha = 0");
    if (is_linear(variant) && !(sigma2_x > 0.0))
        fail(ErrorCategory::validation, "linear variants need a positive sign-equation variance");
}

std::vector<std::string> param_names(Variant v, int k) {
    std::vector<std::string> names{"mu1", "mu2"};
    const char* fams[] = {"a", "b", "c", "d"};
    for (const char* f : fams) {
        if (is_aggregated(v)) {
            names.push_back(std::string(f) + "1");
            names.push_back(std::string(f) + "10bar");
            names.push_back(std::string(f) + "100bar");
        } else {
            for (int i = 1; i <= k; ++i) names.push_back(std::string(f) + std::to_string(i));
        }
    }
    names.push_back("b0");
    names.push_back("sigma2");
    if (is_linear(v)) names.push_back("sigma2_x");
    if (is_score_driven(v)) {
        names.push_back("omega");
        names.push_back("beta");
        names.push_back("alpha");
    }
    return names;
}

ConditionalMeans conditional_means(const StaticParams& p, double b0_t, const LagAggregates& g, double x_t) {
    ConditionalMeans m;
    m.state_t = p.mu1 + p.a[0] * g.r_lag1 + p.a[1] * g.r_L1 + p.a[2] * g.r_L2 + p.b[0] * g.x_lag1 +
                p.b[1] * g.x_L1 + p.b[2] * g.x_L2;
    m.mu1_t = m.state_t + b0_t * x_t;
    m.mu2_t = p.mu2 + p.c[0] * g.r_lag1 + p.c[1] * g.r_L1 + p.c[2] * g.r_L2 + p.d[0] * g.x_lag1 +
              p.d[1] * g.x_L1 + p.d[2] * g.x_L2;
    m.pi_t = inv_logit(m.mu2_t);
    // state_t + b0_t * x_t reproduces mu1_t bit for bit.
    return m;
}

Design build_design(const TickSeries& series, Variant v, const AggregationSpec& spec) {
    spec.validate();
    const std::size_t first = static_cast<std::size_t>(spec.L2);
    if (series.size() <= first)
        fail(ErrorCategory::insufficient_history, "series of length " + std::to_string(series.size()) +
                                                      " has no observations beyond the warm-up of " +
                                                      std::to_string(first));
    Design d;
    d.variant = v;
    d.first = first;
    d.k = spec.features(v);
    const std::size_t n = series.size() - first;
    const auto k = static_cast<std::size_t>(d.k);
    d.fr.resize(n * k);
    d.fx.resize(n * k);
    d.r.resize(n);
    d.x.resize(n);
    const auto r = series.returns();
    const auto x = series.signs();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = first + i;
        lag_features(r, x, spec, v, t, d.fr.data() + i * k, d.fx.data() + i * k);
        d.r[i] = r[t];
        d.x[i] = x[t];
    }
    return d;
}

}  // namespace sdamh
