#include "sdamh/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdamh::optim {

namespace {

double step_for(double x, double rel) { return rel * std::max(1.0, std::abs(x)); }

}  // namespace

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = step_for(x[i], rel_step);
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double grad_step, double outer_step) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = step_for(x[i], outer_step);
        xp[i] = x[i] + h;
        const Eigen::VectorXd gp = numeric_gradient(f, xp, grad_step);
        xp[i] = x[i] - h;
        const Eigen::VectorXd gm = numeric_gradient(f, xp, grad_step);
        xp[i] = x[i];
        H.col(i) = (gp - gm) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
}

Result minimize_bfgs(const Objective& f_raw, const Eigen::VectorXd& x0, const Options& opts,
                     const Eigen::MatrixXd& inv_hessian0) {
    Result res;
    int evals = 0;
    const Objective f = [&](const Eigen::VectorXd& v) {
        ++evals;
        const double y = f_raw(v);
        return std::isfinite(y) ? y : std::numeric_limits<double>::infinity();
    };
    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = x0;
    double fx = f(x);
    if (!std::isfinite(fx)) {
        res.x = x;
        res.f = fx;
        res.message = "objective is not finite at the starting point";
        res.evaluations = evals;
        return res;
    }
    Eigen::MatrixXd H = inv_hessian0.size() == n * n ? inv_hessian0 : Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = numeric_gradient(f, x, opts.grad_step);
    int stall = 0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        res.grad_norm = g.lpNorm<Eigen::Infinity>();
        if (res.grad_norm <= opts.grad_tol * std::max(1.0, std::abs(fx))) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            break;
        }
        Eigen::VectorXd p = -H * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            H = Eigen::MatrixXd::Identity(n, n);
            p = -g;
            slope = g.dot(p);
        }
        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * p;
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (H.isIdentity()) {
                res.converged = res.grad_norm <= 1e3 * opts.grad_tol * std::max(1.0, std::abs(fx));
                res.message = "line search failed along the steepest-descent direction";
                break;
            }
            H = Eigen::MatrixXd::Identity(n, n);
            continue;
        }
        const Eigen::VectorXd g_new = numeric_gradient(f, x_new, opts.grad_step);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        const double rel_change = std::abs(fx - f_new) / std::max(1.0, std::abs(fx));
        stall = rel_change < opts.f_tol ? stall + 1 : 0;
        x = x_new;
        fx = f_new;
        g = g_new;
        if (stall >= opts.stall_iters) {
            res.grad_norm = g.lpNorm<Eigen::Infinity>();
            res.converged = true;
            res.message = "objective change below tolerance";
            ++it;
            break;
        }
    }
    if (it >= opts.max_iter) res.message = "maximum iterations reached";
    res.x = x;
    res.f = fx;
    res.iterations = it;
    res.evaluations = evals;
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    return res;
}

double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace sdamh::optim
