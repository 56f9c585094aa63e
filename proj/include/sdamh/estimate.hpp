#pragma once

#include "sdamh/core.hpp"
#include "sdamh/models.hpp"
#include "sdamh/optimize.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdamh {

struct ParamRange {
    double lo = 0.0;
    double hi = 1.0;
};

/// Uniform random-restart search box. Defaults follow the original
/// estimation experiments; omega/beta (SDAMH-AR only) are local choices.
struct InitSearchSpec {
    std::size_t n_draws = 100000;
    ParamRange mu{-2.0, 2.0};
    ParamRange a{-1.0, 0.0};
    ParamRange b{0.0, 1.0};  // b0 and the lagged sign-on-return coefficients
    ParamRange c{-4.0, 0.0};
    ParamRange d{0.0, 1.0};
    ParamRange sigma{0.0, 1.0};  // innovation standard deviation
    ParamRange alpha{0.0, 1.0};
    ParamRange omega{-0.01, 0.01};
    ParamRange beta{0.5, 1.0};
    std::uint64_t seed = 20210604;

    void validate() const;
};

/// Names of parameters of `p` that fall outside the search box.
std::vector<std::string> range_offenders(const InitSearchSpec& spec, const StaticParams& p);

/// Highest-likelihood candidate among spec.n_draws uniform draws. Each
/// candidate is scored with a constant impact path at its drawn b0.
StaticParams init_search(const TickSeries& series, const InitSearchSpec& spec, Variant variant,
                         const AggregationSpec& agg = {});
StaticParams init_search(const Design& design, const InitSearchSpec& spec, Variant variant);

/// Filtered impact path and per-observation quantities over the effective
/// sample. Index i corresponds to trade L2 + i.
struct FilterState {
    std::vector<double> b0_path;
    std::vector<double> scores;  // scaled scores x (r - mu1)
    std::vector<double> state;   // market state mu1 - b0 x
    std::vector<double> mu1;
    std::vector<double> mu2;
    std::vector<double> pi;
    LogLikResult loglik;
    double b0_init = 0.0;
    double b0_next = 0.0;  // impact for the trade after the last one
};

/// Trade-by-trade filter. Feeding a series through push() reproduces the
/// batch filter bit for bit.
class OnlineFilter {
public:
    OnlineFilter(StaticParams params, double b0_init, AggregationSpec spec = {});

    /// Appends one trade. Returns true when the trade produced a filtered
    /// observation (i.e. the warm-up was already complete).
    bool push(double r, double x);

    [[nodiscard]] const FilterState& state() const noexcept { return state_; }
    [[nodiscard]] double current_b0() const noexcept { return b0_; }
    [[nodiscard]] const StaticParams& params() const noexcept { return params_; }

private:
    StaticParams params_;
    AggregationSpec spec_;
    std::vector<double> r_;
    std::vector<double> x_;
    std::vector<double> fr_;
    std::vector<double> fx_;
    double b0_;
    FilterState state_;
};

FilterState filter(const TickSeries& series, const StaticParams& params, double b0_init,
                   const AggregationSpec& spec = {});

/// Initial impact from a forward pass seeded at f0 followed by a backward
/// pass seeded at the forward terminal value. In each pass the conditional
/// mean uses that pass's current recursion value.
double forward_backward_init(const TickSeries& series, const StaticParams& params, double f0,
                             const AggregationSpec& spec = {});

struct FitReport {
    Variant variant = Variant::AMH;
    std::string method;  // "mle-bfgs" or "ols"
    bool working_likelihood = false;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    double grad_norm = 0.0;
    double loglik = 0.0;
    double start_loglik = 0.0;
    std::size_t n_obs = 0;
    std::vector<std::string> names;  // free parameters, natural units
    std::vector<double> estimates;
    std::vector<double> std_errors;
    Eigen::MatrixXd covariance;  // natural units, same order as names
    bool covariance_ok = false;
    std::string message;
};

struct FitOptions {
    AggregationSpec spec{};
    optim::Options optimizer{};
    /// Skip the random search and start the optimizer here.
    std::optional<StaticParams> start;
    /// Replace the starting b0 of SDAMH-INT by the forward-backward estimate.
    bool forward_backward = true;
    bool std_errors = true;
};

struct FitResult {
    StaticParams params;
    FilterState filter;
    FitReport report;
};

FitResult fit(const TickSeries& series, Variant variant, const InitSearchSpec& search = {},
              const FitOptions& options = {});

/// Mapping between StaticParams and the vector of free parameters of a
/// variant, in natural units and in the unconstrained optimizer space
/// (log sigma2, scaled-logit alpha in (0, kAlphaMax), scaled-logit beta in (-1, 1)).
struct ParamLayout {
    static constexpr double kAlphaMax = 2.0;

    Variant variant = Variant::AMH;
    int k = 3;

    ParamLayout(Variant v, int k_);

    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] Eigen::Index size() const;
    [[nodiscard]] Eigen::VectorXd natural(const StaticParams& p) const;
    [[nodiscard]] StaticParams from_natural(const Eigen::VectorXd& v, const StaticParams& tmpl) const;
    [[nodiscard]] Eigen::VectorXd to_free(const StaticParams& p) const;
    [[nodiscard]] StaticParams from_free(const Eigen::VectorXd& z, const StaticParams& tmpl) const;
};

struct BandEstimate {
    std::vector<double> lower;
    std::vector<double> upper;
    double level = 0.95;
    int n_sim = 0;
    bool diagonal_fallback = false;
};

/// Pointwise bands for the filtered impact from re-filtering the observed
/// series under parameter draws from the asymptotic Gaussian distribution of
/// the estimates.
BandEstimate confidence_bands(const TickSeries& series, const StaticParams& params, const FitReport& report,
                              int n_sim, double level = 0.95, std::uint64_t seed = 11,
                              const AggregationSpec& spec = {});

}  // namespace sdamh
