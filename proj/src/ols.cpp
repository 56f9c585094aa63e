#include "sdamh/ols.hpp"

#include "sdamh/core.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <string>

namespace sdamh {

OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double max_condition) {
    OlsResult out;
    out.n = X.rows();
    out.K = X.cols();
    if (out.n != y.size()) fail(ErrorCategory::validation, "regression design and response differ in length");
    if (out.n <= out.K) fail(ErrorCategory::numerical, "regression needs more observations than regressors");

    // Condition number of the column-scaled design.
    Eigen::VectorXd scale = X.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale[j] == 0.0) fail(ErrorCategory::numerical, "regressor " + std::to_string(j) + " is identically zero");
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs);
    const auto& sv = svd.singularValues();
    out.condition = sv[0] / sv[sv.size() - 1];
    if (!std::isfinite(out.condition) || out.condition > max_condition)
        fail(ErrorCategory::numerical, "regressors are collinear (condition number " +
                                           std::to_string(out.condition) + ")");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    out.coef = qr.solve(y);
    out.fitted = X * out.coef;
    out.residuals = y - out.fitted;
    out.rss = out.residuals.squaredNorm();
    const double dof = static_cast<double>(out.n - out.K);
    out.sigma2 = out.rss / dof;
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    out.covariance = out.sigma2 * xtx_inv;
    out.std_err = out.covariance.diagonal().cwiseSqrt();
    out.t_stat = out.coef.cwiseQuotient(out.std_err);
    out.p_value.resize(out.K);
    boost::math::students_t dist(dof);
    for (Eigen::Index j = 0; j < out.K; ++j) {
        const double t = out.t_stat[j];
        out.p_value[j] = std::isfinite(t) ? 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))
                                          : (out.std_err[j] == 0.0 ? 0.0 : 1.0);
    }
    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    out.r2 = tss > 0.0 ? std::max(0.0, 1.0 - out.rss / tss) : 0.0;
    return out;
}

}  // namespace sdamh
