#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qmix {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative tolerance used when deciding whether an input is Hermitian.
inline constexpr double kHermitianTol = 1e-12;

struct EigenDecomposition {
    RealVector values;  // ascending
    Matrix vectors;     // columns are orthonormal eigenvectors
};

double max_abs(const Matrix& a);
bool is_finite(const Matrix& a);
bool is_hermitian(const Matrix& a, double rel_tol = kHermitianTol);

// Throws std::invalid_argument naming `what` when `a` is not square Hermitian.
void require_hermitian(const Matrix& a, const char* what);

Matrix hermitian_part(const Matrix& a);
Matrix anticommutator(const Matrix& a, const Matrix& b);
Matrix commutator(const Matrix& a, const Matrix& b);

EigenDecomposition eig_hermitian(const Matrix& a);

Matrix reconstruct(const EigenDecomposition& e, const std::function<double(double)>& f);
Matrix matrix_function(const Matrix& a, const std::function<double(double)>& f);

// Eigenvalues below floor_rel * lambda_max are clamped before the map is applied.
inline constexpr double kEigFloor = 1e-14;
Matrix matrix_power(const Matrix& a, double s, double floor_rel = kEigFloor);
Matrix matrix_log(const Matrix& a, double floor_rel = kEigFloor);
Matrix matrix_abs(const Matrix& a);

// Loewner matrix of divided differences [f(a_i) - f(a_j)] / (a_i - a_j).
Matrix divided_differences(const RealVector& values, const std::function<double(double)>& f,
                           const std::function<double(double)>& fprime);
Matrix exp_divided_differences(const RealVector& values);
Matrix log_divided_differences(const RealVector& values);

// Frechet derivative of a spectral function at A in direction H, given the eigendecomposition
// of A and the corresponding Loewner matrix. Self-adjoint in the trace pairing.
Matrix frechet(const EigenDecomposition& e, const Matrix& loewner, const Matrix& h);

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Index d);

class Superoperator {
public:
    Superoperator() = default;
    Superoperator(Index d, Matrix m);

    static Superoperator zero(Index d);
    static Superoperator identity(Index d);
    // X -> sum_k A_k X B_k
    static Superoperator sandwich(const std::vector<std::pair<Matrix, Matrix>>& terms);
    static Superoperator left(const Matrix& a);
    static Superoperator right(const Matrix& b);

    Index dim() const { return d_; }
    const Matrix& matrix() const { return m_; }

    Matrix apply(const Matrix& x) const;
    // Adjoint with respect to the Hilbert-Schmidt pairing tr[A^dagger B].
    Superoperator adjoint() const;

    Superoperator operator+(const Superoperator& o) const;
    Superoperator operator-(const Superoperator& o) const;
    Superoperator operator*(const Superoperator& o) const;  // composition, right factor first
    Superoperator operator*(double c) const;

private:
    Index d_ = 0;
    Matrix m_;
};

// exp(t S) via scaled Pade approximation; throws std::overflow_error on non-finite output.
Superoperator expm(const Superoperator& s, double t);
Matrix expm(const Matrix& a);

// Choi matrix sum_ij |i><j| kron S(|i><j|), ordered as (output index, input index) blocks.
Matrix choi(const Superoperator& s);
// Kraus operators K_k with S(X) = sum_k K_k X K_k^dagger, from a PSD Choi matrix.
std::vector<Matrix> kraus_from_choi(const Matrix& choi_matrix, Index d, double rel_tol = 1e-12);

// Number of singular values above rel_tol * largest for the stacked vec(K_k).
int numerical_rank(const std::vector<Matrix>& ops, double rel_tol = 1e-8);

}  // namespace qmix
