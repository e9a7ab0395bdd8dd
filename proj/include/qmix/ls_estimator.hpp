#pragma once

#include <cstdint>
#include <optional>

#include "qmix/dirichlet_gap.hpp"
#include "qmix/generators.hpp"
#include "qmix/minimize.hpp"

namespace qmix {

struct Budget {
    int restarts = 24;
    int max_iter = 2000;
    std::uint64_t seed = 1;
};

struct AnalyticBounds {
    std::optional<double> closed_form;
    std::optional<double> unital_lower;
    std::optional<double> expander_upper;
    double gap_upper = 0.0;
    bool gap_upper_applies = false;  // reversible or unital generator
};

struct LSReport {
    double p = 2.0;
    bool use_hat = true;
    double alpha_estimate = 0.0;  // upper bound on alpha_p from the best witness
    Matrix witness;               // normalised so that ||witness||_{p,sigma} = 1
    double witness_min_eig = 0.0;
    double witness_entropy = 0.0;
    int restarts = 0;
    bool converged = false;
    AnalyticBounds analytic_bounds;
};

// Hermitian matrix <-> real coordinates (diagonal, then Re/Im of the upper triangle).
Eigen::VectorXd hermitian_to_params(const Matrix& h);
Matrix params_to_hermitian(const Eigen::VectorXd& x, Index d);

// Ratio E_p(exp h) / Ent_p(exp h) with its analytic gradient in the coordinates above.
// Returns +inf when the entropy falls below the admissibility floor.
SmoothObjective ls_ratio_objective(const Generator& g, int p, bool use_hat);

LSReport estimate_alpha(const Generator& g, int p, bool use_hat = true, const Budget& budget = {},
                        const GapReport* gap = nullptr);

double depolarizing_alpha2(Index d, double gamma);
double unital_alpha2_lower(const Generator& g, double lambda);
double expander_alpha2_upper(int kraus_count, Index d);

struct PartialOrderVerdict {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double lambda = 0.0;
    bool ok_alpha2_le_2alpha1 = true;
    bool ok_alpha1_le_lambda = true;
    bool alpha1_le_lambda_asserted = false;  // generator is reversible or unital, so alpha1 <= lambda must hold
    double slack = 1e-4;
};

PartialOrderVerdict partial_order_verdict(const Generator& g, const Budget& budget = {});
PartialOrderVerdict partial_order_verdict(double alpha1, double alpha2, double lambda, bool asserted);

}  // namespace qmix
