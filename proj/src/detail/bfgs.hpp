#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>

namespace kep::detail {

/// Derivative-free objective gradient via forward differences, plus a
/// standard inverse-Hessian BFGS update with backtracking line search.
/// Built for small dense problems (tens of variables) where each objective
/// evaluation is an ODE solve.
struct BfgsOptions {
    int max_iterations = 120;
    double fd_step = 1e-6;
    double step_tol = 1e-10;    ///< stop on |step|_inf below this
    double f_stall_tol = 0.0;   ///< stop after stall_iters tiny improvements
    int stall_iters = 5;
    double armijo_c1 = 1e-4;
    int max_linesearch = 30;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

inline BfgsResult bfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                Eigen::VectorXd x0, const BfgsOptions& opt) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const Eigen::Index n = x0.size();

    BfgsResult res;
    res.x = std::move(x0);
    res.f = f(res.x);
    res.evaluations = 1;

    const auto gradient = [&](const VectorXd& x, double fx) -> VectorXd {
        VectorXd g(n);
        VectorXd xp = x;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double save = xp[i];
            xp[i] = save + opt.fd_step;
            g[i] = (f(xp) - fx) / opt.fd_step;
            xp[i] = save;
            ++res.evaluations;
        }
        return g;
    };

    MatrixXd h_inv = MatrixXd::Identity(n, n);
    VectorXd g = gradient(res.x, res.f);
    int stall_count = 0;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        res.iterations = iter + 1;
        VectorXd d = -(h_inv * g);
        double slope = g.dot(d);
        if (!(slope < 0.0)) { // curvature lost; restart from steepest descent
            h_inv.setIdentity();
            d = -g;
            slope = g.dot(d);
            if (!(slope < 0.0)) { // gradient numerically zero
                res.converged = true;
                break;
            }
        }

        double lambda = 1.0;
        double f_new = res.f;
        VectorXd x_new = res.x;
        bool accepted = false;
        for (int ls = 0; ls < opt.max_linesearch; ++ls) {
            x_new = res.x + lambda * d;
            f_new = f(x_new);
            ++res.evaluations;
            if (f_new <= res.f + opt.armijo_c1 * lambda * slope) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            res.converged = true; // no descent at the smallest trial step
            break;
        }

        const VectorXd step = x_new - res.x;
        const double improvement = res.f - f_new;
        const VectorXd g_new = gradient(x_new, f_new);
        const VectorXd yk = g_new - g;
        const double sy = step.dot(yk);
        if (sy > 1e-12 * step.norm() * yk.norm()) {
            const double rho = 1.0 / sy;
            const MatrixXd i_mat = MatrixXd::Identity(n, n);
            h_inv = (i_mat - rho * step * yk.transpose()) * h_inv *
                        (i_mat - rho * yk * step.transpose()) +
                    rho * step * step.transpose();
        }
        res.x = x_new;
        res.f = f_new;
        g = g_new;

        if (step.lpNorm<Eigen::Infinity>() <= opt.step_tol) {
            res.converged = true;
            break;
        }
        if (opt.f_stall_tol > 0.0) {
            stall_count = improvement < opt.f_stall_tol ? stall_count + 1 : 0;
            if (stall_count >= opt.stall_iters) {
                res.converged = true;
                break;
            }
        }
    }
    return res;
}

} // namespace kep::detail
