#pragma once

#include <functional>

#include "qmix/operator_core.hpp"

namespace qmix {

// Full-rank density matrix together with the spectral data every weighted
// quantity is built from.
class WeightedSpace {
public:
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kMinEigenvalue = 1e-10;

    explicit WeightedSpace(const Matrix& sigma);

    Index dim() const { return sigma_.rows(); }
    const Matrix& sigma() const { return sigma_; }
    const EigenDecomposition& spectrum() const { return eig_; }
    double sigma_min() const { return eig_.values(0); }

    Matrix sigma_power(double a) const;
    const Matrix& log_sigma() const { return log_; }
    const Matrix& quarter() const { return quarter_; }
    const Matrix& inv_quarter() const { return inv_quarter_; }
    const Matrix& half() const { return half_; }
    const Matrix& inv_half() const { return inv_half_; }

    // sigma^{a/2} f sigma^{a/2}
    Matrix gamma(double a, const Matrix& f) const;

private:
    Matrix sigma_;
    EigenDecomposition eig_;
    Matrix log_, quarter_, inv_quarter_, half_, inv_half_;
};

Matrix gamma_power(const WeightedSpace& space, double a, const Matrix& f);

double lp_norm(const WeightedSpace& space, double p, const Matrix& f);
double inner(const WeightedSpace& space, const Matrix& f, const Matrix& g);
double variance(const WeightedSpace& space, const Matrix& g);

// I_{p,q}(f) = Gamma^{-1/p}[ |Gamma^{1/q}(f)|^{q/p} ]
Matrix power_operator(const WeightedSpace& space, double p, double q, const Matrix& f);

// S_p(f) for positive definite f.
Matrix op_relative_entropy(const WeightedSpace& space, double p, const Matrix& f);

// <I_{q,p}(f), S_p(f)>_sigma with 1/p + 1/q = 1; p = 1 is taken as the limit.
double entropy_pairing(const WeightedSpace& space, double p, const Matrix& f);

double ent_p(const WeightedSpace& space, double p, const Matrix& f);

// Closed forms used by the optimizer and as cross-checks.
double ent1_closed(const WeightedSpace& space, const Matrix& f);
double ent2_closed(const WeightedSpace& space, const Matrix& f);

// D(rho||sigma) with the 0 log 0 = 0 convention on rho.
double relative_entropy(const Matrix& rho, const Matrix& sigma);

struct NormDerivative {
    double lhs;  // finite difference of t -> ||f||_{p(t)}^{p(t)}
    double rhs;  // p'(t) <I_{q,p}(f), S_p(f)>
};

struct ExponentPath {
    std::function<double(double)> value;
    std::function<double(double)> rate;
};

NormDerivative norm_derivative_check(const WeightedSpace& space, const Matrix& f,
                                     const ExponentPath& path, double t, double step = 1e-5);

}  // namespace qmix
