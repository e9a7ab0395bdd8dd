#include "qmix/lp_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qmix {

namespace {

void require_exponent(double p)
{
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("exponent must be a finite real >= 1");
}

void require_same_dim(const WeightedSpace& space, const Matrix& f)
{
    if (f.rows() != space.dim() || f.cols() != space.dim())
        throw std::invalid_argument("operator dimension does not match the weighted space");
}

// Entropic functionals accept f only when lambda_min(f) > 1e-12 lambda_max(f).
constexpr double kPositivityGate = 1e-12;
constexpr double kUnitExponentBand = 1e-6;

void require_positive(const EigenDecomposition& e, const char* what)
{
    double top = e.values(e.values.size() - 1);
    if (!(top > 0.0) || e.values(0) <= kPositivityGate * top)
        throw std::domain_error(std::string(what) + " must be positive definite");
}

double xlogx(double x)
{
    return x > 0.0 ? x * std::log(x) : 0.0;
}

}  // namespace

WeightedSpace::WeightedSpace(const Matrix& sigma)
{
    require_hermitian(sigma, "sigma");
    sigma_ = hermitian_part(sigma);
    double tr = sigma_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol)
        throw std::invalid_argument("sigma must have unit trace");
    eig_ = eig_hermitian(sigma_);
    if (eig_.values(0) <= kMinEigenvalue)
        throw std::invalid_argument("sigma must be full rank (smallest eigenvalue above 1e-10)");
    log_ = reconstruct(eig_, [](double x) { return std::log(x); });
    quarter_ = sigma_power(0.25);
    inv_quarter_ = sigma_power(-0.25);
    half_ = sigma_power(0.5);
    inv_half_ = sigma_power(-0.5);
}

Matrix WeightedSpace::sigma_power(double a) const
{
    return reconstruct(eig_, [a](double x) { return std::pow(x, a); });
}

Matrix WeightedSpace::gamma(double a, const Matrix& f) const
{
    if (a == 1.0)
        return half_ * f * half_;
    if (a == 0.5)
        return quarter_ * f * quarter_;
    if (a == -0.5)
        return inv_quarter_ * f * inv_quarter_;
    if (a == -1.0)
        return inv_half_ * f * inv_half_;
    if (a == 0.0)
        return f;
    Matrix s = sigma_power(0.5 * a);
    return s * f * s;
}

Matrix gamma_power(const WeightedSpace& space, double a, const Matrix& f)
{
    require_same_dim(space, f);
    return space.gamma(a, f);
}

double lp_norm(const WeightedSpace& space, double p, const Matrix& f)
{
    require_exponent(p);
    require_same_dim(space, f);
    require_hermitian(f, "f");
    auto e = eig_hermitian(hermitian_part(space.gamma(1.0 / p, f)));
    double total = 0.0;
    for (Index i = 0; i < e.values.size(); ++i)
        total += std::pow(std::abs(e.values(i)), p);
    return std::pow(total, 1.0 / p);
}

double inner(const WeightedSpace& space, const Matrix& f, const Matrix& g)
{
    require_same_dim(space, f);
    require_same_dim(space, g);
    return (space.gamma(1.0, f) * g).trace().real();
}

double variance(const WeightedSpace& space, const Matrix& g)
{
    require_hermitian(g, "g");
    require_same_dim(space, g);
    Matrix wg = space.gamma(1.0, g);
    double mean = wg.trace().real();
    double var = (wg * g).trace().real() - mean * mean;
    return var >= -1e-12 ? std::max(var, 0.0) : var;
}

Matrix power_operator(const WeightedSpace& space, double p, double q, const Matrix& f)
{
    require_exponent(p);
    require_exponent(q);
    require_same_dim(space, f);
    require_hermitian(f, "f");
    double r = q / p;
    Matrix inner_part = matrix_function(hermitian_part(space.gamma(1.0 / q, f)),
                                        [r](double x) { return std::pow(std::abs(x), r); });
    return hermitian_part(space.gamma(-1.0 / p, inner_part));
}

Matrix op_relative_entropy(const WeightedSpace& space, double p, const Matrix& f)
{
    require_exponent(p);
    require_same_dim(space, f);
    require_hermitian(f, "f");
    auto e = eig_hermitian(hermitian_part(space.gamma(1.0 / p, f)));
    require_positive(e, "f");
    Matrix ulogu = reconstruct(e, xlogx);
    Matrix out = space.gamma(-1.0 / p, ulogu) - anticommutator(f, space.log_sigma()) / (2.0 * p);
    return out;
}

double entropy_pairing(const WeightedSpace& space, double p, const Matrix& f)
{
    require_exponent(p);
    if (p - 1.0 < kUnitExponentBand) {
        auto e = eig_hermitian(hermitian_part(space.gamma(1.0, f)));
        require_positive(e, "f");
        Matrix w = reconstruct(e, [](double x) { return x; });
        double wlogw = 0.0;
        for (Index i = 0; i < e.values.size(); ++i)
            wlogw += xlogx(e.values(i));
        return wlogw - (w * space.log_sigma()).trace().real();
    }
    double q = p / (p - 1.0);
    Matrix iqp = power_operator(space, q, p, f);
    Matrix sp = op_relative_entropy(space, p, f);
    return inner(space, iqp, sp);
}

double ent_p(const WeightedSpace& space, double p, const Matrix& f)
{
    require_exponent(p);
    require_same_dim(space, f);
    require_hermitian(f, "f");
    if (p - 1.0 < kUnitExponentBand)
        return ent1_closed(space, f);
    double norm = lp_norm(space, p, f);
    return entropy_pairing(space, p, f) - std::pow(norm, p) * std::log(norm);
}

double ent1_closed(const WeightedSpace& space, const Matrix& f)
{
    auto e = eig_hermitian(hermitian_part(space.gamma(1.0, f)));
    require_positive(e, "f");
    double total = e.values.sum();
    double wlogw = 0.0;
    for (Index i = 0; i < e.values.size(); ++i)
        wlogw += xlogx(e.values(i));
    Matrix w = space.gamma(1.0, f);
    return wlogw - (w * space.log_sigma()).trace().real() - total * std::log(total);
}

double ent2_closed(const WeightedSpace& space, const Matrix& f)
{
    Matrix u = hermitian_part(space.gamma(0.5, f));
    auto e = eig_hermitian(u);
    require_positive(e, "f");
    double u2logu = 0.0, norm2 = 0.0;
    for (Index i = 0; i < e.values.size(); ++i) {
        double x = e.values(i);
        u2logu += x * x * std::log(x);
        norm2 += x * x;
    }
    double cross = (u * u * space.log_sigma()).trace().real();
    return u2logu - 0.5 * cross - 0.5 * norm2 * std::log(norm2);
}

double relative_entropy(const Matrix& rho, const Matrix& sigma)
{
    require_hermitian(rho, "rho");
    require_hermitian(sigma, "sigma");
    auto er = eig_hermitian(rho);
    auto es = eig_hermitian(sigma);
    if (es.values(0) <= 0.0)
        throw std::domain_error("relative entropy needs a full-rank reference state");
    double self = 0.0;
    for (Index i = 0; i < er.values.size(); ++i)
        self += xlogx(std::max(er.values(i), 0.0));
    Matrix log_sigma = reconstruct(es, [](double x) { return std::log(x); });
    return self - (hermitian_part(rho) * log_sigma).trace().real();
}

NormDerivative norm_derivative_check(const WeightedSpace& space, const Matrix& f,
                                     const ExponentPath& path, double t, double step)
{
    auto powered_norm = [&](double tt) {
        double p = path.value(tt);
        return std::pow(lp_norm(space, p, f), p);
    };
    double lhs = (powered_norm(t + step) - powered_norm(t - step)) / (2.0 * step);
    double rhs = path.rate(t) * entropy_pairing(space, path.value(t), f);
    return {lhs, rhs};
}

}  // namespace qmix
