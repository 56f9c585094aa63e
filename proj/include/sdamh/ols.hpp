#pragma once

#include <Eigen/Dense>

namespace sdamh {

struct OlsResult {
    Eigen::VectorXd coef;
    Eigen::VectorXd std_err;
    Eigen::VectorXd t_stat;
    Eigen::VectorXd p_value;  // two-sided, Student t with n - K degrees of freedom
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    Eigen::MatrixXd covariance;
    double rss = 0.0;
    double sigma2 = 0.0;  // rss / (n - K)
    double r2 = 0.0;      // centred; 0 when y is constant
    double condition = 0.0;
    Eigen::Index n = 0;
    Eigen::Index K = 0;
};

/// Least squares via a column-pivoted QR. Throws a numerical error when the
/// design is rank deficient or its condition number exceeds `max_condition`.
OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double max_condition = 1e12);

}  // namespace sdamh
