#include "sdamh/models.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sdamh {

ScoreStep score_step(double x_t, double r_t, double mu1_t, double sigma2) {
    ScoreStep s;
    s.scaled_score = x_t * (r_t - mu1_t);
    s.score = s.scaled_score / sigma2;
    s.fisher_inv = sigma2;
    return s;
}

double score_update(double b0_t, double x_t, double r_t, double mu1_t, const StaticParams& params) {
    if (!is_score_driven(params.variant))
        fail(ErrorCategory::variant,
             "score update is defined for score-driven variants only, not " + std::string(to_string(params.variant)));
    return next_impact(params, b0_t, x_t * (r_t - mu1_t));
}

LogLikResult loglik(const Design& design, const StaticParams& params, std::span<const double> b0_path) {
    params.validate();
    const std::size_t n = design.n();
    if (params.k() != design.k) fail(ErrorCategory::validation, "parameter lag layout does not match the design");
    if (b0_path.size() != 1 && b0_path.size() != n)
        fail(ErrorCategory::validation, "impact path has " + std::to_string(b0_path.size()) +
                                            " values for " + std::to_string(n) + " effective observations");
    LogLikResult out;
    out.n_obs = n;
    out.working_gaussian = is_linear(params.variant);
    out.per_obs.resize(n);
    std::size_t first_clamp = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double b0 = b0_path.size() == 1 ? b0_path[0] : b0_path[i];
        const auto e = evaluate_obs(params, design.fr_row(i), design.fx_row(i), design.r[i], design.x[i], b0);
        out.per_obs[i] = e.loglik;
        out.total += e.loglik;
        if (e.clamped) {
            if (out.clamped == 0) first_clamp = i;
            ++out.clamped;
        }
    }
    if (static_cast<double>(out.clamped) > kMaxClampShare * static_cast<double>(n))
        fail(ErrorCategory::domain, "buy probability saturated at " + std::to_string(out.clamped) +
                                        " observations (first at trade " +
                                        std::to_string(design.first + first_clamp) + ")");
    return out;
}

LogLikResult loglik(const TickSeries& series, const StaticParams& params, std::span<const double> b0_path,
                    const AggregationSpec& spec) {
    return loglik(build_design(series, params.variant, spec), params, b0_path);
}

double loglik_objective(const Design& design, const StaticParams& params) {
    const std::size_t n = design.n();
    double total = 0.0;
    double b0 = params.b0;
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = evaluate_obs(params, design.fr_row(i), design.fx_row(i), design.r[i], design.x[i], b0);
        total += e.loglik;
        clamped += e.clamped ? 1 : 0;
        b0 = next_impact(params, b0, e.scaled_score);
    }
    if (!std::isfinite(total) || static_cast<double>(clamped) > kMaxClampShare * static_cast<double>(n))
        return -std::numeric_limits<double>::infinity();
    return total;
}

}  // namespace sdamh
