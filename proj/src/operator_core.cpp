#include "qmix/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qmix {

double max_abs(const Matrix& a)
{
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_finite(const Matrix& a)
{
    return a.allFinite();
}

bool is_hermitian(const Matrix& a, double rel_tol)
{
    if (a.rows() != a.cols())
        return false;
    double scale = std::max(1.0, max_abs(a));
    return max_abs(a - a.adjoint()) <= rel_tol * scale;
}

void require_hermitian(const Matrix& a, const char* what)
{
    if (!is_finite(a))
        throw std::domain_error(std::string(what) + " has non-finite entries");
    if (a.rows() != a.cols() || a.rows() == 0)
        throw std::invalid_argument(std::string(what) + " must be a non-empty square matrix");
    if (!is_hermitian(a))
        throw std::invalid_argument(std::string(what) + " is not Hermitian");
}

Matrix hermitian_part(const Matrix& a)
{
    return 0.5 * (a + a.adjoint());
}

Matrix anticommutator(const Matrix& a, const Matrix& b)
{
    return a * b + b * a;
}

Matrix commutator(const Matrix& a, const Matrix& b)
{
    return a * b - b * a;
}

EigenDecomposition eig_hermitian(const Matrix& a)
{
    require_hermitian(a, "matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(a));
    if (solver.info() != Eigen::Success)
        throw std::domain_error("Hermitian eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix reconstruct(const EigenDecomposition& e, const std::function<double(double)>& f)
{
    RealVector mapped(e.values.size());
    for (Index i = 0; i < e.values.size(); ++i)
        mapped(i) = f(e.values(i));
    Matrix out = e.vectors * mapped.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    return hermitian_part(out);
}

Matrix matrix_function(const Matrix& a, const std::function<double(double)>& f)
{
    return reconstruct(eig_hermitian(a), f);
}

namespace {

double floor_for(const RealVector& values, double floor_rel)
{
    double top = values.size() ? values.maxCoeff() : 0.0;
    return floor_rel * std::max(top, 0.0);
}

}  // namespace

Matrix matrix_power(const Matrix& a, double s, double floor_rel)
{
    auto e = eig_hermitian(a);
    if (e.values.minCoeff() < -1e-10 * std::max(1.0, e.values.cwiseAbs().maxCoeff()))
        throw std::domain_error("fractional power of a matrix with negative spectrum");
    double lo = floor_for(e.values, floor_rel);
    return reconstruct(e, [&](double x) { return std::pow(std::max(x, lo), s); });
}

Matrix matrix_log(const Matrix& a, double floor_rel)
{
    auto e = eig_hermitian(a);
    if (e.values.minCoeff() < -1e-10 * std::max(1.0, e.values.cwiseAbs().maxCoeff()))
        throw std::domain_error("logarithm of a matrix with negative spectrum");
    double lo = floor_for(e.values, floor_rel);
    if (lo <= 0.0)
        throw std::domain_error("logarithm of the zero matrix");
    return reconstruct(e, [&](double x) { return std::log(std::max(x, lo)); });
}

Matrix matrix_abs(const Matrix& a)
{
    return matrix_function(a, [](double x) { return std::abs(x); });
}

Matrix divided_differences(const RealVector& values, const std::function<double(double)>& f,
                           const std::function<double(double)>& fprime)
{
    const Index n = values.size();
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            double a = values(i), b = values(j);
            double gap = a - b;
            double scale = std::max({1.0, std::abs(a), std::abs(b)});
            if (std::abs(gap) <= 1e-9 * scale)
                out(i, j) = fprime(0.5 * (a + b));
            else
                out(i, j) = (f(a) - f(b)) / gap;
        }
    }
    return out;
}

Matrix exp_divided_differences(const RealVector& values)
{
    const Index n = values.size();
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            double a = values(i), b = values(j);
            double lo = std::min(a, b), gap = std::abs(a - b);
            // (e^a - e^b)/(a - b) = e^lo * expm1(gap)/gap
            double ratio = gap < 1e-12 ? 1.0 + 0.5 * gap : std::expm1(gap) / gap;
            out(i, j) = std::exp(lo) * ratio;
        }
    }
    return out;
}

Matrix log_divided_differences(const RealVector& values)
{
    const Index n = values.size();
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            double a = values(i), b = values(j);
            if (a <= 0.0 || b <= 0.0)
                throw std::domain_error("log divided difference needs positive eigenvalues");
            double rel = (a - b) / b;
            out(i, j) = std::abs(rel) < 1e-12 ? (1.0 - 0.5 * rel) / b : std::log1p(rel) / (a - b);
        }
    }
    return out;
}

Matrix frechet(const EigenDecomposition& e, const Matrix& loewner, const Matrix& h)
{
    Matrix inner = e.vectors.adjoint() * h * e.vectors;
    inner = inner.cwiseProduct(loewner);
    return e.vectors * inner * e.vectors.adjoint();
}

Vector vec(const Matrix& x)
{
    return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, Index d)
{
    if (v.size() != d * d)
        throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

Superoperator::Superoperator(Index d, Matrix m) : d_(d), m_(std::move(m))
{
    if (m_.rows() != d * d || m_.cols() != d * d)
        throw std::invalid_argument("superoperator matrix must be d^2 x d^2");
}

Superoperator Superoperator::zero(Index d)
{
    return {d, Matrix::Zero(d * d, d * d)};
}

Superoperator Superoperator::identity(Index d)
{
    return {d, Matrix::Identity(d * d, d * d)};
}

Superoperator Superoperator::sandwich(const std::vector<std::pair<Matrix, Matrix>>& terms)
{
    if (terms.empty())
        throw std::invalid_argument("sandwich needs at least one term");
    Index d = terms.front().first.rows();
    Matrix m = Matrix::Zero(d * d, d * d);
    for (const auto& [a, b] : terms) {
        if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d)
            throw std::invalid_argument("sandwich terms must share one square dimension");
        m += Eigen::kroneckerProduct(b.transpose(), a).eval();
    }
    return {d, std::move(m)};
}

Superoperator Superoperator::left(const Matrix& a)
{
    return sandwich({{a, Matrix::Identity(a.rows(), a.cols())}});
}

Superoperator Superoperator::right(const Matrix& b)
{
    return sandwich({{Matrix::Identity(b.rows(), b.cols()), b}});
}

Matrix Superoperator::apply(const Matrix& x) const
{
    if (x.rows() != d_ || x.cols() != d_)
        throw std::invalid_argument("superoperator applied to matrix of wrong dimension");
    Vector out = m_ * vec(x);
    return unvec(out, d_);
}

Superoperator Superoperator::adjoint() const
{
    return {d_, m_.adjoint()};
}

Superoperator Superoperator::operator+(const Superoperator& o) const
{
    return {d_, m_ + o.m_};
}

Superoperator Superoperator::operator-(const Superoperator& o) const
{
    return {d_, m_ - o.m_};
}

Superoperator Superoperator::operator*(const Superoperator& o) const
{
    return {d_, m_ * o.m_};
}

Superoperator Superoperator::operator*(double c) const
{
    return {d_, m_ * c};
}

Superoperator expm(const Superoperator& s, double t)
{
    return {s.dim(), expm(Matrix(t * s.matrix()))};
}

Matrix expm(const Matrix& a)
{
    if (!is_finite(a))
        throw std::domain_error("expm of non-finite matrix");
    Matrix out = a.exp();
    if (!is_finite(out))
        throw std::overflow_error("matrix exponential overflowed");
    return out;
}

Matrix choi(const Superoperator& s)
{
    const Index d = s.dim();
    Matrix j = Matrix::Zero(d * d, d * d);
    for (Index a = 0; a < d; ++a) {
        for (Index b = 0; b < d; ++b) {
            Matrix unit = Matrix::Zero(d, d);
            unit(a, b) = 1.0;
            j.block(a * d, b * d, d, d) = s.apply(unit);
        }
    }
    return j;
}

std::vector<Matrix> kraus_from_choi(const Matrix& choi_matrix, Index d, double rel_tol)
{
    auto e = eig_hermitian(hermitian_part(choi_matrix));
    double top = std::max(e.values.maxCoeff(), 0.0);
    if (e.values.minCoeff() < -1e-9 * std::max(1.0, top))
        throw std::domain_error("Choi matrix is not positive semidefinite");
    std::vector<Matrix> kraus;
    for (Index k = e.values.size() - 1; k >= 0; --k) {
        if (e.values(k) <= rel_tol * top)
            break;
        kraus.push_back(std::sqrt(e.values(k)) * unvec(e.vectors.col(k), d));
    }
    return kraus;
}

int numerical_rank(const std::vector<Matrix>& ops, double rel_tol)
{
    if (ops.empty())
        return 0;
    Index n = ops.front().size();
    Matrix stacked(n, static_cast<Index>(ops.size()));
    for (std::size_t k = 0; k < ops.size(); ++k)
        stacked.col(static_cast<Index>(k)) = vec(ops[k]);
    Eigen::JacobiSVD<Matrix> svd(stacked);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    int rank = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0))
            ++rank;
    return rank;
}

}  // namespace qmix
