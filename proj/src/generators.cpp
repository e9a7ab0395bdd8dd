#include "qmix/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <unsupported/Eigen/MatrixFunctions>

#include "qmix/random_ops.hpp"

namespace qmix {

namespace {

constexpr double kTraceTol = 1e-10;
constexpr double kNullRelTol = 1e-10;
constexpr double kReversibleTol = 1e-8;

Superoperator lindblad_superoperator(const Matrix& h, const std::vector<Matrix>& ops, Index d)
{
    const cplx i1(0.0, 1.0);
    Superoperator out = Superoperator::zero(d);
    if (h.size())
        out = out + Superoperator(d, i1 * (Superoperator::left(h).matrix() - Superoperator::right(h).matrix()));
    Matrix k = Matrix::Zero(d, d);
    for (const auto& l : ops) {
        out = out + Superoperator::sandwich({{l.adjoint(), l}});
        k += l.adjoint() * l;
    }
    out = out - (Superoperator::left(k) + Superoperator::right(k)) * 0.5;
    return out;
}

Superoperator gamma_superoperator(const Matrix& root)
{
    return Superoperator::sandwich({{root, root}});
}

double scale_of(const Superoperator& s)
{
    return std::max(1.0, max_abs(s.matrix()));
}

}  // namespace

std::string family_name(Family f)
{
    switch (f) {
    case Family::generic: return "generic";
    case Family::depolarizing: return "depolarizing";
    case Family::projection: return "projection";
    case Family::davies: return "davies";
    case Family::channel_lift: return "channel_lift";
    case Family::random_unitary: return "random_unitary";
    }
    return "generic";
}

Generator Generator::from_superoperator(const Superoperator& heisenberg, Family family)
{
    Generator g;
    g.dim_ = heisenberg.dim();
    g.family_ = family;
    g.heis_ = heisenberg;
    g.schr_ = heisenberg.adjoint();
    g.classify();
    return g;
}

const Superoperator& Generator::heisenberg() const
{
    if (!heis_)
        throw std::logic_error("generator has no dense superoperator at this dimension");
    return *heis_;
}

const Superoperator& Generator::schrodinger() const
{
    if (!schr_)
        throw std::logic_error("generator has no dense superoperator at this dimension");
    return *schr_;
}

Matrix Generator::apply(const Matrix& f) const
{
    if (heis_)
        return heis_->apply(f);
    const Index d = dim_;
    Matrix id = Matrix::Identity(d, d);
    switch (family_) {
    case Family::depolarizing:
        return rate_ * (id * (f.trace() / double(d)) - f);
    case Family::projection:
        return rate_ * (id * (stationary_->sigma() * f).trace() - f);
    default:
        throw std::logic_error("generator has no action available");
    }
}

Matrix Generator::apply_adjoint(const Matrix& rho) const
{
    if (schr_)
        return schr_->apply(rho);
    const Index d = dim_;
    switch (family_) {
    case Family::depolarizing:
        return rate_ * (Matrix::Identity(d, d) * (rho.trace() / double(d)) - rho);
    case Family::projection:
        return rate_ * (stationary_->sigma() * rho.trace() - rho);
    default:
        throw std::logic_error("generator has no action available");
    }
}

const WeightedSpace& Generator::stationary() const
{
    if (!stationary_)
        throw NotPrimitiveError("generator is not primitive: " + primitivity_note_);
    return *stationary_;
}

Semigroup Generator::evolve(double t) const
{
    return Semigroup(*this, t);
}

double Generator::trace_preservation_residual() const
{
    return max_abs(apply(Matrix::Identity(dim_, dim_)));
}

double Generator::stationarity_residual() const
{
    return max_abs(apply_adjoint(stationary().sigma()));
}

double Generator::detailed_balance_residual() const
{
    const auto& space = stationary();
    if (!heis_) {
        // closed forms: probe the identity on a basis of matrix units
        double worst = 0.0;
        for (Index a = 0; a < dim_; ++a) {
            for (Index b = 0; b < dim_; ++b) {
                Matrix unit = Matrix::Zero(dim_, dim_);
                unit(a, b) = 1.0;
                Matrix lhs = space.gamma(1.0, apply(unit));
                Matrix rhs = apply_adjoint(space.gamma(1.0, unit));
                worst = std::max(worst, max_abs(lhs - rhs));
            }
        }
        return worst;
    }
    Superoperator gam = gamma_superoperator(space.half());
    return max_abs((gam * *heis_ - *schr_ * gam).matrix());
}

void Generator::classify()
{
    const Index d = dim_;
    const Superoperator& lh = *heis_;
    const Superoperator& ls = *schr_;
    double scale = scale_of(lh);
    Matrix id = Matrix::Identity(d, d);
    if (max_abs(lh.apply(id)) > kTraceTol * scale)
        throw std::invalid_argument("generator does not annihilate the identity (not trace preserving)");
    flags_.unital = max_abs(ls.apply(id)) <= kTraceTol * scale;

    Eigen::BDCSVD<Matrix> svd(ls.matrix(), Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    double top = s(0);
    Index null_dim = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) <= kNullRelTol * std::max(top, 1e-300))
            ++null_dim;
    flags_.primitive = false;
    stationary_.reset();
    if (top == 0.0)
        null_dim = s.size();
    if (null_dim != 1) {
        primitivity_note_ = "fixed-point space has dimension " + std::to_string(null_dim);
    } else {
        Matrix x = unvec(svd.matrixV().col(s.size() - 1), d);
        cplx tr = x.trace();
        if (std::abs(tr) < 1e-8) {
            primitivity_note_ = "fixed point is traceless";
        } else {
            Matrix rho = hermitian_part(x / tr);
            auto e = eig_hermitian(rho);
            if (e.values(0) <= WeightedSpace::kMinEigenvalue) {
                primitivity_note_ = "fixed point is not full rank";
            } else {
                rho /= rho.trace().real();
                stationary_.emplace(rho);
                flags_.primitive = true;
            }
        }
    }
    flags_.reversible = flags_.primitive && detailed_balance_residual() <= kReversibleTol * scale;
}

void Generator::classify_closed_form(const Matrix& sigma)
{
    stationary_.emplace(sigma);
    flags_.primitive = true;
    flags_.reversible = true;
    flags_.unital = family_ == Family::depolarizing;
}

Semigroup::Semigroup(const Generator& g, double t) : g_(&g), t_(t)
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("semigroup time must be finite and non-negative");
    if (g.has_dense())
        dense_ = expm(g.heisenberg(), t);
}

const Superoperator& Semigroup::heisenberg() const
{
    if (!dense_)
        throw std::logic_error("semigroup has no dense form at this dimension");
    return *dense_;
}

Matrix Semigroup::apply(const Matrix& f) const
{
    if (dense_)
        return dense_->apply(f);
    const Index d = g_->dim();
    double decay = std::exp(-g_->rate() * t_);
    Matrix id = Matrix::Identity(d, d);
    if (g_->family() == Family::depolarizing)
        return decay * f + (1.0 - decay) * (f.trace() / double(d)) * id;
    return decay * f + (1.0 - decay) * (g_->stationary().sigma() * f).trace() * id;
}

Matrix Semigroup::apply_adjoint(const Matrix& rho) const
{
    if (dense_) {
        Vector out = dense_->matrix().adjoint() * vec(rho);
        return unvec(out, rho.rows());
    }
    const Index d = g_->dim();
    double decay = std::exp(-g_->rate() * t_);
    if (g_->family() == Family::depolarizing)
        return decay * rho + (1.0 - decay) * (rho.trace() / double(d)) * Matrix::Identity(d, d);
    return decay * rho + (1.0 - decay) * rho.trace() * g_->stationary().sigma();
}

Generator build_lindblad(const Matrix& hamiltonian, const std::vector<Matrix>& ops)
{
    Index d = hamiltonian.size() ? hamiltonian.rows() : (ops.empty() ? 0 : ops.front().rows());
    if (d == 0)
        throw std::invalid_argument("cannot infer dimension from an empty generator");
    if (hamiltonian.size())
        require_hermitian(hamiltonian, "hamiltonian");
    for (const auto& l : ops) {
        if (l.rows() != d || l.cols() != d)
            throw std::invalid_argument("Lindblad operator dimension mismatch");
        if (!is_finite(l))
            throw std::domain_error("Lindblad operator has non-finite entries");
    }
    if (d > Generator::kDenseCeiling)
        throw std::invalid_argument("dense generators are limited to dimension 32");
    Matrix h = hamiltonian.size() ? hermitian_part(hamiltonian) : Matrix(Matrix::Zero(d, d));
    Generator g = Generator::from_superoperator(lindblad_superoperator(h, ops, d));
    g.hamiltonian_ = h;
    g.ops_ = ops;
    return g;
}

Generator build_depolarizing(Index d, double gamma)
{
    if (d < 2)
        throw std::invalid_argument("depolarizing generator needs d >= 2");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("depolarizing rate must be positive");
    Generator g;
    g.dim_ = d;
    g.family_ = Family::depolarizing;
    g.rate_ = gamma;
    g.hamiltonian_ = Matrix::Zero(d, d);
    if (d <= Generator::kDenseCeiling) {
        Vector one = vec(Matrix::Identity(d, d));
        Matrix m = gamma * (one * one.adjoint() / double(d) - Matrix::Identity(d * d, d * d));
        g.heis_ = Superoperator(d, m);
        g.schr_ = g.heis_->adjoint();
    }
    g.classify_closed_form(Matrix::Identity(d, d) / double(d));
    return g;
}

Generator build_projection(const WeightedSpace& sigma, double gamma)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("projection rate must be positive");
    const Index d = sigma.dim();
    Generator g;
    g.dim_ = d;
    g.family_ = Family::projection;
    g.rate_ = gamma;
    g.hamiltonian_ = Matrix::Zero(d, d);
    if (d <= Generator::kDenseCeiling) {
        Vector one = vec(Matrix::Identity(d, d));
        Matrix m = gamma * (one * vec(sigma.sigma()).adjoint() - Matrix::Identity(d * d, d * d));
        g.heis_ = Superoperator(d, m);
        g.schr_ = g.heis_->adjoint();
    }
    g.classify_closed_form(sigma.sigma());
    return g;
}

double flat_kms_rate(double omega, double beta)
{
    return omega >= 0.0 ? 1.0 : std::exp(beta * omega);
}

Matrix gibbs_state(const Matrix& hamiltonian, double beta)
{
    auto e = eig_hermitian(hamiltonian);
    double lo = e.values(0);
    Matrix rho = reconstruct(e, [&](double x) { return std::exp(-beta * (x - lo)); });
    return rho / rho.trace().real();
}

std::vector<DaviesComponent> davies_components(const DaviesSpec& spec)
{
    require_hermitian(spec.hamiltonian, "hamiltonian");
    if (spec.couplings.empty())
        throw std::invalid_argument("Davies generator needs at least one coupling operator");
    if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta))
        throw std::invalid_argument("beta must be finite and non-negative");
    const Index d = spec.hamiltonian.rows();
    auto e = eig_hermitian(spec.hamiltonian);
    double hnorm = e.values.cwiseAbs().maxCoeff();
    double tol = spec.bohr_tol.value_or(std::max(1e-9 * hnorm, 1e-12));

    // eigenprojectors of H, merging energies closer than tol
    std::vector<double> energies;
    std::vector<Matrix> projectors;
    for (Index i = 0; i < d; ++i) {
        Matrix v = e.vectors.col(i) * e.vectors.col(i).adjoint();
        if (!energies.empty() && e.values(i) - energies.back() <= tol) {
            projectors.back() += v;
        } else {
            energies.push_back(e.values(i));
            projectors.push_back(v);
        }
    }

    std::vector<DaviesComponent> out;
    for (std::size_t k = 0; k < spec.couplings.size(); ++k) {
        const Matrix& a = spec.couplings[k];
        if (a.rows() != d)
            throw std::invalid_argument("coupling dimension mismatch");
        require_hermitian(a, "coupling operator");
        std::vector<DaviesComponent> local;
        for (std::size_t m = 0; m < projectors.size(); ++m) {
            for (std::size_t n = 0; n < projectors.size(); ++n) {
                Matrix block = projectors[m] * a * projectors[n];
                if (max_abs(block) <= 1e-14 * std::max(1.0, max_abs(a)))
                    continue;
                double omega = energies[n] - energies[m];
                auto hit = std::find_if(local.begin(), local.end(),
                                        [&](const DaviesComponent& c) { return std::abs(c.omega - omega) <= tol; });
                if (hit == local.end())
                    local.push_back({k, omega, block});
                else
                    hit->jump += block;
            }
        }
        out.insert(out.end(), local.begin(), local.end());
    }
    return out;
}

Generator build_davies(const DaviesSpec& spec)
{
    auto comps = davies_components(spec);
    const Index d = spec.hamiltonian.rows();
    std::vector<Matrix> ops;
    for (const auto& c : comps)
        ops.push_back(std::sqrt(flat_kms_rate(c.omega, spec.beta)) * c.jump);
    Matrix drift = spec.hamiltonian_drift ? hermitian_part(spec.hamiltonian) : Matrix(Matrix::Zero(d, d));
    Generator g = build_lindblad(drift, ops);
    g.family_ = Family::davies;
    g.hamiltonian_ = hermitian_part(spec.hamiltonian);
    if (!g.primitive())
        throw NotPrimitiveError("Davies generator is not primitive: " + g.primitivity_note_);
    return g;
}

Generator lift_channel(const std::vector<Matrix>& kraus, bool lazy)
{
    if (kraus.empty())
        throw std::invalid_argument("channel needs at least one Kraus operator");
    const Index d = kraus.front().rows();
    Matrix closure = Matrix::Zero(d, d);
    std::vector<std::pair<Matrix, Matrix>> terms;
    for (const auto& k : kraus) {
        if (k.rows() != d || k.cols() != d)
            throw std::invalid_argument("Kraus operator dimension mismatch");
        closure += k.adjoint() * k;
        terms.emplace_back(k.adjoint(), k);
    }
    if (max_abs(closure - Matrix::Identity(d, d)) > 1e-10)
        throw std::invalid_argument("Kraus operators are not trace preserving");
    if (d > Generator::kDenseCeiling)
        throw std::invalid_argument("dense generators are limited to dimension 32");
    Superoperator t = Superoperator::sandwich(terms);
    if (lazy)
        t = (Superoperator::identity(d) + t) * 0.5;
    Generator g = Generator::from_superoperator(t - Superoperator::identity(d), Family::channel_lift);
    g.kraus_rank_ = numerical_rank(kraus);
    g.hamiltonian_ = Matrix::Zero(d, d);
    return g;
}

std::vector<Matrix> random_unitary_kraus(Index d, int count, std::uint64_t seed, bool reversible)
{
    if (d < 2 || count < 1)
        throw std::invalid_argument("random unitary channel needs d >= 2 and D >= 1");
    Rng rng(seed);
    std::vector<Matrix> kraus;
    double w = reversible ? 1.0 / std::sqrt(2.0 * count) : 1.0 / std::sqrt(double(count));
    for (int k = 0; k < count; ++k) {
        Matrix u = haar_unitary(d, rng);
        kraus.push_back(w * u);
        if (reversible)
            kraus.push_back(w * u.adjoint());
    }
    return kraus;
}

Generator build_random_unitary(Index d, int count, std::uint64_t seed, bool reversible, bool lazy)
{
    Generator g = lift_channel(random_unitary_kraus(d, count, seed, reversible), lazy);
    g.family_ = Family::random_unitary;
    return g;
}

Generator hat_generator(const Generator& g)
{
    const WeightedSpace& space = g.stationary();
    if (!g.has_dense()) {
        Generator copy = g;  // closed forms are reversible
        return copy;
    }
    Superoperator gam = gamma_superoperator(space.half());
    Superoperator inv = gamma_superoperator(space.inv_half());
    Generator out = Generator::from_superoperator(inv * g.schrodinger() * gam,
                                                  g.flags().reversible ? g.family() : Family::generic);
    return out;
}

Generator symmetrized(const Generator& g)
{
    Generator hat = hat_generator(g);
    return Generator::from_superoperator((g.heisenberg() + hat.heisenberg()) * 0.5);
}

double choi_min_eigenvalue(const Generator& g, double t)
{
    Superoperator schr = expm(g.schrodinger(), t);
    Matrix j = choi(schr);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(j), Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

}  // namespace qmix
