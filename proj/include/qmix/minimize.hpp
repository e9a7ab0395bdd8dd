#pragma once

#include <functional>

#include <Eigen/Dense>

namespace qmix {

// Objective returning f(x); fills `grad` when it is non-null.
using SmoothObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
using PlainObjective = std::function<double(const Eigen::VectorXd& x)>;

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

// Quasi-Newton descent (GSL vector_bfgs2). Non-finite objective values are mapped to `wall`.
MinimizeResult minimize_bfgs(const SmoothObjective& objective, const Eigen::VectorXd& x0, int max_iter,
                             double grad_tol = 1e-9, double initial_step = 0.1, double wall = 1e6);

// Nelder-Mead simplex (GSL nmsimplex2).
MinimizeResult minimize_simplex(const PlainObjective& objective, const Eigen::VectorXd& x0, double step,
                                int max_evaluations, double size_tol = 1e-10);

// Central finite-difference gradient, used where no analytic gradient exists.
Eigen::VectorXd numeric_gradient(const PlainObjective& objective, const Eigen::VectorXd& x, double h = 1e-6);

}  // namespace qmix
