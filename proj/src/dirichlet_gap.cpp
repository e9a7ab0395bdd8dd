#include "qmix/dirichlet_gap.hpp"

#include <algorithm>
#include <cmath>

#include "qmix/random_ops.hpp"

namespace qmix {

namespace {

constexpr double kOneBranch = 1e-6;

double dirichlet_one(const WeightedSpace& space, const LinearMap& action, const Matrix& f)
{
    Matrix w = hermitian_part(space.gamma(1.0, f));
    auto e = eig_hermitian(w);
    double floor = kEigFloor * std::max(e.values.maxCoeff(), 0.0);
    if (e.values(0) <= floor)
        throw std::domain_error("p = 1 Dirichlet form needs a positive definite argument");
    Matrix log_w = reconstruct(e, [](double x) { return std::log(x); });
    Matrix lf = space.gamma(1.0, action(f));
    return -0.5 * (lf * (log_w - space.log_sigma())).trace().real();
}

// Symmetrized generator conjugated by Gamma^{1/2}; Hermitian in the trace pairing.
Matrix symmetrized_action(const Generator& g, const WeightedSpace& space, const Matrix& h)
{
    Matrix a = space.gamma(0.5, g.apply(space.gamma(-0.5, h)));
    Matrix b = space.gamma(-0.5, g.apply_adjoint(space.gamma(0.5, h)));
    return hermitian_part(0.5 * (a + b));
}

Matrix hermitian_witness(const Matrix& v)
{
    Matrix re = hermitian_part(v);
    Matrix im = hermitian_part(cplx(0.0, 1.0) * v);
    return re.norm() >= im.norm() ? re : im;
}

double hs_inner(const Matrix& a, const Matrix& b)
{
    return (a.adjoint() * b).trace().real();
}

struct SpectralPick {
    double lambda;
    Matrix h;  // Gamma^{1/2}-conjugated witness, orthogonal to sqrt(sigma)
};

SpectralPick dense_pick(const Generator& g, const WeightedSpace& space)
{
    const Index d = g.dim();
    Superoperator half = Superoperator::sandwich({{space.quarter(), space.quarter()}});
    Superoperator inv_half = Superoperator::sandwich({{space.inv_quarter(), space.inv_quarter()}});
    Matrix a = (half * g.heisenberg() * inv_half).matrix();
    Matrix k = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(k);
    Vector root = vec(space.half());
    root /= root.norm();
    // drop the eigenvector aligned with sqrt(sigma)
    Index skip = 0;
    double best_overlap = -1.0;
    for (Index i = 0; i < k.rows(); ++i) {
        double ov = std::abs(solver.eigenvectors().col(i).dot(root));
        if (ov > best_overlap) {
            best_overlap = ov;
            skip = i;
        }
    }
    Index pick = k.rows() - 1 == skip ? k.rows() - 2 : k.rows() - 1;
    Matrix h = hermitian_witness(unvec(solver.eigenvectors().col(pick), d));
    Matrix r = unvec(root, d);
    h -= hs_inner(r, h) * r;
    return {-solver.eigenvalues()(pick), h};
}

SpectralPick lanczos_pick(const Generator& g, const WeightedSpace& space, Rng& rng)
{
    const Index d = g.dim();
    Matrix root = space.half();
    root /= root.norm();
    auto project = [&](Matrix x) {
        x -= hs_inner(root, x) * root;
        return hermitian_part(x);
    };
    const int max_steps = static_cast<int>(std::min<Index>(d * d - 1, 120));
    std::vector<Matrix> basis;
    std::vector<double> alpha, beta;
    Matrix q = project(random_hermitian(d, rng));
    q /= q.norm();
    for (int j = 0; j < max_steps; ++j) {
        basis.push_back(q);
        Matrix w = symmetrized_action(g, space, q);
        double a = hs_inner(q, w);
        alpha.push_back(a);
        w = project(w);
        for (const auto& b : basis)
            w -= hs_inner(b, w) * b;
        for (const auto& b : basis)
            w -= hs_inner(b, w) * b;
        double nb = w.norm();
        if (nb < 1e-12 * std::max(1.0, std::abs(a)))
            break;
        beta.push_back(nb);
        q = w / nb;
    }
    const Index m = static_cast<Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) {
            t(i, i + 1) = beta[i];
            t(i + 1, i) = beta[i];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    Eigen::VectorXd y = solver.eigenvectors().col(m - 1);
    Matrix h = Matrix::Zero(d, d);
    for (Index i = 0; i < m; ++i)
        h += y(i) * basis[i];
    return {-solver.eigenvalues()(m - 1), h};
}

}  // namespace

double dirichlet_form(const WeightedSpace& space, const LinearMap& action, double p, const Matrix& f)
{
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("Dirichlet form needs p >= 1");
    require_hermitian(f, "f");
    if (p - 1.0 < kOneBranch)
        return dirichlet_one(space, action, f);
    Matrix lf = action(f);
    if (p == 2.0)
        return -inner(space, f, lf);
    double q = p / (p - 1.0);
    Matrix iqp = power_operator(space, q, p, f);
    return -p / (2.0 * (p - 1.0)) * inner(space, iqp, lf);
}

double dirichlet_p(const Generator& g, double p, const Matrix& f)
{
    return dirichlet_form(g.stationary(), [&](const Matrix& x) { return g.apply(x); }, p, f);
}

Matrix apply_hat(const Generator& g, const Matrix& f)
{
    const auto& space = g.stationary();
    return space.gamma(-1.0, g.apply_adjoint(space.gamma(1.0, f)));
}

double dirichlet_hat_p(const Generator& g, double p, const Matrix& f)
{
    return dirichlet_form(g.stationary(), [&](const Matrix& x) { return apply_hat(g, x); }, p, f);
}

std::string gap_method_name(GapMethod m)
{
    switch (m) {
    case GapMethod::eigen_symmetrization: return "eigen_symmetrization";
    case GapMethod::lanczos_symmetrization: return "lanczos_symmetrization";
    case GapMethod::variational_refine: return "variational_refine";
    }
    return "eigen_symmetrization";
}

double gap_ratio(const Generator& g, const Matrix& witness)
{
    return dirichlet_p(g, 2.0, witness) / variance(g.stationary(), witness);
}

GapReport spectral_gap(const Generator& g, int validation_probes, std::uint64_t seed)
{
    const WeightedSpace& space = g.stationary();
    Rng rng(seed);
    GapReport report;
    SpectralPick pick;
    if (g.has_dense()) {
        pick = dense_pick(g, space);
        report.method = GapMethod::eigen_symmetrization;
    } else {
        pick = lanczos_pick(g, space, rng);
        report.method = GapMethod::lanczos_symmetrization;
    }
    report.lambda = pick.lambda;
    Matrix kh = symmetrized_action(g, space, pick.h);
    report.residual = (kh + pick.lambda * pick.h).norm() / std::max(pick.h.norm(), 1e-300);
    report.witness = hermitian_part(space.gamma(-0.5, pick.h));

    double worst = std::numeric_limits<double>::infinity();
    Matrix worst_g;
    for (int k = 0; k < validation_probes; ++k) {
        Matrix probe = random_hermitian(g.dim(), rng);
        double var = variance(space, probe);
        if (var <= 1e-14)
            continue;
        double ratio = dirichlet_p(g, 2.0, probe) / var;
        if (ratio < worst) {
            worst = ratio;
            worst_g = probe;
        }
    }
    report.worst_probe_ratio = worst;
    if (worst < report.lambda * (1.0 - 1e-6)) {
        report.lambda = worst;
        report.witness = worst_g;
        report.method = GapMethod::variational_refine;
    }
    return report;
}

}  // namespace qmix
