#pragma once

#include "sdamh/core.hpp"

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace sdamh {

/// pi is clamped to [kPiFloor, 1 - kPiFloor] inside the log; more than
/// kMaxClampShare of clamped observations turns into a domain error.
inline constexpr double kPiFloor = 1e-12;
inline constexpr double kMaxClampShare = 1e-3;

struct ScoreStep {
    double score = 0.0;         // x (r - mu1) / sigma2
    double scaled_score = 0.0;  // x (r - mu1)
    double fisher_inv = 1.0;    // sigma2
};

ScoreStep score_step(double x_t, double r_t, double mu1_t, double sigma2);

struct LogLikResult {
    double total = 0.0;
    std::vector<double> per_obs;
    std::size_t n_obs = 0;
    std::size_t clamped = 0;
    /// True for H/AH, whose sign equation is scored under a working Gaussian density.
    bool working_gaussian = false;
};

/// Everything the filter, the likelihood and the simulator need about one
/// observation given the lag regressors and the current impact.
struct ObsEval {
    double state = 0.0;  // mu1 without the contemporaneous trade term
    double mu1 = 0.0;
    double mu2 = 0.0;
    double pi = 0.5;
    double scaled_score = 0.0;
    double loglik = 0.0;
    bool clamped = false;
};

inline double state_mean(const StaticParams& p, const double* fr, const double* fx) {
    double s = p.mu1;
    const int k = p.k();
    for (int i = 0; i < k; ++i) s += p.a[i] * fr[i];
    for (int i = 0; i < k; ++i) s += p.b[i] * fx[i];
    return s;
}

inline double sign_mean(const StaticParams& p, const double* fr, const double* fx) {
    double s = p.mu2;
    const int k = p.k();
    for (int i = 0; i < k; ++i) s += p.c[i] * fr[i];
    for (int i = 0; i < k; ++i) s += p.d[i] * fx[i];
    return s;
}

inline constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi)

/// Log-density of (r, x) for one observation. Linear variants use a
/// Gaussian working density for the sign equation.
inline ObsEval evaluate_obs(const StaticParams& p, const double* fr, const double* fx, double r, double x,
                            double b0) {
    ObsEval e;
    e.state = state_mean(p, fr, fx);
    e.mu1 = e.state + b0 * x;
    e.mu2 = sign_mean(p, fr, fx);
    const double resid = r - e.mu1;
    e.scaled_score = x * resid;
    e.pi = inv_logit(e.mu2);
    double ll = -0.5 * kLogTwoPi - 0.5 * std::log(p.sigma2) - resid * resid / (2.0 * p.sigma2);
    if (is_linear(p.variant)) {
        const double rx = x - e.mu2;
        ll += -0.5 * kLogTwoPi - 0.5 * std::log(p.sigma2_x) - rx * rx / (2.0 * p.sigma2_x);
    } else {
        static const double log_floor = std::log(kPiFloor);
        // log(pi) = -softplus(-mu2), log(1 - pi) = -softplus(mu2)
        double lp = x > 0.0 ? -softplus(-e.mu2) : -softplus(e.mu2);
        if (lp < log_floor) {
            lp = log_floor;
            e.clamped = true;
        }
        ll += lp;
    }
    e.loglik = ll;
    return e;
}

/// Next impact value from the current one and the scaled score. Static
/// variants keep the impact constant.
inline double next_impact(const StaticParams& p, double b0, double scaled_score) {
    switch (p.variant) {
        case Variant::SdInt:
            return b0 + p.alpha * scaled_score;
        case Variant::SdAr:
            return p.omega + p.beta * b0 + p.alpha * scaled_score;
        default:
            return b0;
    }
}

/// Score-driven update of the instantaneous impact. Throws a variant error
/// for static variants.
double score_update(double b0_t, double x_t, double r_t, double mu1_t, const StaticParams& params);

/// Log-likelihood over the effective sample t = L2 .. T-1. b0_path holds one
/// value per effective observation, or a single value for a constant path.
LogLikResult loglik(const TickSeries& series, const StaticParams& params, std::span<const double> b0_path,
                    const AggregationSpec& spec = {});

/// Same, on a precomputed design.
LogLikResult loglik(const Design& design, const StaticParams& params, std::span<const double> b0_path);

/// Total log-likelihood with the impact path generated by the variant's own
/// recursion from params.b0. Returns -inf instead of throwing when the
/// clamp budget is exceeded or a value is non-finite; used as the optimizer
/// objective.
double loglik_objective(const Design& design, const StaticParams& params);

}  // namespace sdamh
