#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace sdamh::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Options {
    int max_iter = 500;
    double grad_tol = 1e-5;   // on the infinity norm of the gradient, relative to max(1, |f|)
    double f_tol = 1e-12;     // relative change of f over `stall_iters` iterations
    int stall_iters = 5;
    double grad_step = 1e-6;  // central-difference step, scaled by max(1, |x_i|)
    double hess_step = 1e-4;  // outer step for the Hessian of gradients
};

struct Result {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    double grad_norm = 0.0;
    bool converged = false;
    std::string message;
};

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-6);

/// Symmetrized finite differences of numeric gradients.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double grad_step = 1e-6,
                                double outer_step = 1e-4);

/// BFGS on the inverse Hessian with a backtracking Armijo line search and
/// numerically differenced gradients. The objective may return +inf for
/// infeasible points; the line search backs off from them. When
/// `inv_hessian0` is empty the identity is used.
Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const Options& opts = {},
                     const Eigen::MatrixXd& inv_hessian0 = {});

/// Golden-section search for a scalar minimum on [lo, hi].
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-8);

}  // namespace sdamh::optim
