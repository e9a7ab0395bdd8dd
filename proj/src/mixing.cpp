#include "qmix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "qmix/ls_estimator.hpp"
#include "qmix/minimize.hpp"
#include "qmix/random_ops.hpp"

namespace qmix {

namespace {

constexpr double kStateTol = 1e-10;

// Gamma^{1/2} as a d^2 x d^2 matrix acting on vec(f), and its inverse.
Matrix quarter_sandwich(const WeightedSpace& space, bool inverse)
{
    const Matrix& s = inverse ? space.inv_quarter() : space.quarter();
    return Eigen::kroneckerProduct(Matrix(s.transpose()), s).eval();
}

double schatten(const Matrix& a, double p)
{
    auto e = eig_hermitian(hermitian_part(a));
    double total = 0.0;
    for (Index i = 0; i < e.values.size(); ++i)
        total += std::pow(std::abs(e.values(i)), p);
    return std::pow(total, 1.0 / p);
}

}  // namespace

double trace_norm(const Matrix& a)
{
    return schatten(a, 1.0);
}

void require_state(const Matrix& rho, const char* what)
{
    require_hermitian(rho, what);
    if (std::abs(rho.trace().real() - 1.0) > kStateTol)
        throw std::invalid_argument(std::string(what) + " must have unit trace");
    if (eig_hermitian(hermitian_part(rho)).values(0) < -kStateTol)
        throw std::invalid_argument(std::string(what) + " must be positive semidefinite");
}

double chi2_divergence(const Matrix& rho, const WeightedSpace& space)
{
    Matrix delta = hermitian_part(rho) - space.sigma();
    Matrix weighted = space.inv_quarter() * delta * space.inv_quarter();
    return std::max(0.0, (weighted * weighted).trace().real());
}

Distances distances(const Matrix& rho, const WeightedSpace& space)
{
    require_state(rho);
    Distances out;
    out.trace = trace_norm(rho - space.sigma());
    out.chi2 = chi2_divergence(rho, space);
    out.rel_ent = std::max(0.0, relative_entropy(rho, space.sigma()));
    return out;
}

Matrix evolve(const Generator& g, const Matrix& rho0, double t)
{
    if (!(t >= 0.0))
        throw std::invalid_argument("evolution time must be non-negative");
    require_state(rho0, "rho0");
    if (t == 0.0)
        return rho0;
    Semigroup sg = g.evolve(t);
    return hermitian_part(sg.apply_adjoint(rho0));
}

std::vector<Matrix> initial_state_family(const WeightedSpace& space, int haar_count, std::uint64_t seed)
{
    std::vector<Matrix> states;
    const auto& e = space.spectrum();
    for (Index i = 0; i < e.values.size(); ++i)
        states.push_back(e.vectors.col(i) * e.vectors.col(i).adjoint());
    Rng rng(seed);
    for (int k = 0; k < haar_count; ++k)
        states.push_back(random_pure_state(space.dim(), rng));
    return states;
}

double MixingCurve::domination_margin() const
{
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i) {
        double bound = chi2_bound[i];
        if (!ls_bound_a1.empty())
            bound = std::min(bound, ls_bound_a1[i]);
        if (!ls_bound_a2.empty())
            bound = std::min(bound, ls_bound_a2[i]);
        margin = std::min(margin, bound - trace_dist[i]);
    }
    return margin;
}

MixingCurve bound_curves(const Generator& g, const BoundConstants& c, const std::vector<double>& t_grid,
                         int haar_count, std::uint64_t seed)
{
    if (!(c.lambda > 0.0))
        throw std::invalid_argument("bound curves need a positive spectral gap");
    const auto& space = g.stationary();
    auto states = initial_state_family(space, haar_count, seed);
    const double inv_min = 1.0 / space.sigma_min();
    const double ls_prefactor = std::sqrt(2.0 * std::log(inv_min));
    const double a2_rate = c.alpha2 ? (c.strongly_regular ? *c.alpha2 : 0.5 * *c.alpha2) : 0.0;

    MixingCurve curve;
    curve.initial_states = static_cast<int>(states.size());
    for (double t : t_grid) {
        if (!(t >= 0.0))
            throw std::invalid_argument("time grid must be non-negative");
        Distances worst;
        std::optional<Semigroup> sg;
        if (t > 0.0)
            sg.emplace(g.evolve(t));
        for (const auto& rho0 : states) {
            Matrix rho = sg ? Matrix(hermitian_part(sg->apply_adjoint(rho0))) : rho0;
            Distances dd;
            dd.trace = trace_norm(rho - space.sigma());
            dd.chi2 = chi2_divergence(rho, space);
            dd.rel_ent = std::max(0.0, relative_entropy(rho, space.sigma()));
            worst.trace = std::max(worst.trace, dd.trace);
            worst.chi2 = std::max(worst.chi2, dd.chi2);
            worst.rel_ent = std::max(worst.rel_ent, dd.rel_ent);
        }
        curve.times.push_back(t);
        curve.trace_dist.push_back(worst.trace);
        curve.chi2.push_back(worst.chi2);
        curve.rel_ent.push_back(worst.rel_ent);
        curve.chi2_bound.push_back(std::sqrt(inv_min) * std::exp(-c.lambda * t));
        if (c.alpha1)
            curve.ls_bound_a1.push_back(ls_prefactor * std::exp(-*c.alpha1 * t));
        if (c.alpha2)
            curve.ls_bound_a2.push_back(ls_prefactor * std::exp(-a2_rate * t));
    }
    return curve;
}

double worst_trace_distance(const Generator& g, const std::vector<Matrix>& states, double t)
{
    const auto& sigma = g.stationary().sigma();
    double worst = 0.0;
    if (t == 0.0) {
        for (const auto& rho : states)
            worst = std::max(worst, trace_norm(rho - sigma));
        return worst;
    }
    Semigroup sg = g.evolve(t);
    for (const auto& rho : states)
        worst = std::max(worst, trace_norm(hermitian_part(sg.apply_adjoint(rho)) - sigma));
    return worst;
}

MixingTime mixing_time(const Generator& g, double epsilon, int haar_count, std::uint64_t seed)
{
    if (!(epsilon > 0.0))
        throw std::invalid_argument("epsilon must be positive");
    MixingTime out;
    auto states = initial_state_family(g.stationary(), haar_count, seed);
    out.states_sampled = static_cast<int>(states.size());
    out.caveat = "worst case over " + std::to_string(out.states_sampled) +
                 " sampled initial states (sigma eigenprojectors and Haar pure states); a lower bound on the "
                 "true mixing time";
    if (epsilon >= 2.0 || worst_trace_distance(g, states, 0.0) <= epsilon)
        return out;
    double lo = 0.0, hi = 1.0;
    while (worst_trace_distance(g, states, hi) > epsilon) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e8)
            throw std::runtime_error("mixing time exceeds 1e8");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (worst_trace_distance(g, states, mid) > epsilon)
            lo = mid;
        else
            hi = mid;
    }
    out.tau = hi;
    return out;
}

CrossingTimes bound_crossing_times(const BoundConstants& c, double sigma_min, double epsilon)
{
    auto crossing = [epsilon](double prefactor, double rate) {
        return prefactor <= epsilon ? 0.0 : std::log(prefactor / epsilon) / rate;
    };
    const double inv_min = 1.0 / sigma_min;
    const double ls_prefactor = std::sqrt(2.0 * std::log(inv_min));
    CrossingTimes out;
    out.chi2 = crossing(std::sqrt(inv_min), c.lambda);
    if (c.alpha1)
        out.ls_a1 = crossing(ls_prefactor, *c.alpha1);
    if (c.alpha2)
        out.ls_a2 = crossing(ls_prefactor, c.strongly_regular ? *c.alpha2 : 0.5 * *c.alpha2);
    return out;
}

DecayMargins entropy_decay_check(const Generator& g, double lambda, double alpha1, const Matrix& f0,
                                 const std::vector<double>& t_grid)
{
    const auto& space = g.stationary();
    Matrix rho0 = hermitian_part(space.gamma(1.0, f0));
    require_state(rho0, "Gamma(f0)");
    const double var0 = variance(space, f0);
    const double ent0 = ent1_closed(space, f0);
    const double step = 1e-5;

    auto density_at = [&](double t) -> Matrix {
        return t <= 0.0 ? rho0 : Matrix(hermitian_part(g.evolve(t).apply_adjoint(rho0)));
    };
    auto entropy_at = [&](double t) { return ent1_closed(space, space.gamma(-1.0, density_at(t))); };

    DecayMargins out;
    out.variance = out.entropy = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        Matrix ft = hermitian_part(space.gamma(-1.0, density_at(t)));
        double var_t = variance(space, ft);
        double ent_t = ent1_closed(space, ft);
        out.variance = std::min(out.variance, std::exp(-2.0 * lambda * t) * var0 - var_t);
        out.entropy = std::min(out.entropy, std::exp(-2.0 * alpha1 * t) * ent0 - ent_t);
        double rate = t >= step ? (entropy_at(t + step) - entropy_at(t - step)) / (2.0 * step)
                                : (entropy_at(t + step) - ent_t) / step;
        double energy = dirichlet_hat_p(g, 1.0, ft);
        double scale = std::max({1.0, std::abs(rate), std::abs(energy)});
        out.derivative_residual = std::max(out.derivative_residual, std::abs(rate + 2.0 * energy) / scale);
    }
    out.holds = out.variance >= -1e-7 && out.entropy >= -1e-7 && out.derivative_residual <= 1e-4;
    return out;
}

EntropyProduction entropy_production(const Generator& g, const Matrix& rho)
{
    require_state(rho);
    const auto& space = g.stationary();
    auto e = eig_hermitian(hermitian_part(rho));
    if (e.values(0) <= 0.0)
        throw std::domain_error("entropy production needs a full-rank state");
    Matrix log_rho = reconstruct(e, [](double x) { return std::log(x); });
    Matrix drift = g.apply_adjoint(rho);
    EntropyProduction out;
    out.entropy_rate = -(drift * log_rho).trace().real();
    out.entropy_flux = (drift * space.log_sigma()).trace().real();
    out.production = 2.0 * dirichlet_hat_p(g, 1.0, hermitian_part(space.gamma(-1.0, rho)));
    out.balance_residual = std::abs(out.production - out.entropy_rate - out.entropy_flux);
    return out;
}

PQNorm pq_norm(const LinearMap& map, const WeightedSpace& space, double p, double q, int starts, std::uint64_t seed)
{
    if (!(p >= 1.0 && q >= 1.0))
        throw std::invalid_argument("p and q must be at least 1");
    const Index d = space.dim();
    auto log_ratio = [&](const Eigen::VectorXd& x) {
        Matrix f = expm(params_to_hermitian(x, d));
        f = hermitian_part(f);
        return std::log(lp_norm(space, p, f)) - std::log(lp_norm(space, q, hermitian_part(map(f))));
    };
    PlainObjective objective = [&](const Eigen::VectorXd& x) {
        double v = log_ratio(x);
        return std::isfinite(v) ? v : 1e6;
    };
    Rng rng(seed);
    PQNorm best;
    best.value = -1.0;
    for (int k = 0; k < std::max(1, starts); ++k) {
        Eigen::VectorXd x0 = k == 0 ? Eigen::VectorXd::Zero(d * d)
                                    : Eigen::VectorXd(hermitian_to_params(random_hermitian(d, rng, 1.0)));
        auto res = minimize_simplex(objective, x0, 0.5, 4000 * int(d * d), 1e-9);
        double ratio = std::exp(-res.value);
        if (ratio > best.value) {
            best.value = ratio;
            best.witness = hermitian_part(expm(params_to_hermitian(res.x, d)));
        }
    }
    return best;
}

PQNorm pq_norm(const Generator& g, double p, double q, double t, int starts, std::uint64_t seed)
{
    Semigroup sg = g.evolve(t);
    return pq_norm([&sg](const Matrix& f) { return sg.apply(f); }, g.stationary(), p, q, starts, seed);
}

double two_to_two_distance(const Generator& g, double t)
{
    const auto& space = g.stationary();
    const Index d = g.dim();
    Semigroup sg = g.evolve(t);
    Matrix tt = sg.heisenberg().matrix();
    Matrix limit = vec(Matrix::Identity(d, d)) * vec(space.sigma()).adjoint();
    Matrix similar = quarter_sandwich(space, false) * (tt - limit) * quarter_sandwich(space, true);
    Eigen::JacobiSVD<Matrix> svd(similar);
    return svd.singularValues()(0);
}

bool is_lazy(const Generator& g)
{
    const auto& space = g.stationary();
    const Index n = g.dim() * g.dim();
    Matrix channel = g.heisenberg().matrix() + Matrix::Identity(n, n);
    Matrix similar = quarter_sandwich(space, false) * channel * quarter_sandwich(space, true);
    auto e = eig_hermitian(hermitian_part(similar));
    return e.values(0) >= -1e-10;
}

DiscreteContinuous discrete_vs_continuous(const Generator& g, int n, const Matrix& rho0)
{
    if (n < 0)
        throw std::invalid_argument("step count must be non-negative");
    require_state(rho0, "rho0");
    if (!g.flags().reversible)
        throw std::invalid_argument("discrete/continuous comparison needs a reversible channel");
    if (!is_lazy(g))
        throw std::invalid_argument("discrete/continuous comparison needs a lazy channel");
    const auto& space = g.stationary();
    const Index dd = g.dim() * g.dim();
    Matrix channel_adj = (g.heisenberg().matrix() + Matrix::Identity(dd, dd)).adjoint();
    Vector v = vec(rho0);
    for (int k = 0; k < n; ++k)
        v = channel_adj * v;
    DiscreteContinuous out;
    out.chi2_discrete = chi2_divergence(hermitian_part(unvec(v, g.dim())), space);
    out.chi2_continuous = chi2_divergence(n == 0 ? rho0 : evolve(g, rho0, double(n)), space);
    out.holds = out.chi2_discrete <= out.chi2_continuous + 1e-9;
    return out;
}

double chi2_gap_bound_time(double alpha2, double lambda, double sigma_min, double c)
{
    if (!(alpha2 > 0.0 && lambda > 0.0 && c > 0.0))
        throw std::invalid_argument("chi2 gap bound needs positive alpha2, lambda and c");
    double warmup = std::log(std::log(1.0 / sigma_min)) / (2.0 * alpha2);
    return std::max(0.0, warmup) + c / lambda;
}

HypercontractivityCheck hypercontractivity_check(const Generator& g, double alpha2, const std::vector<double>& times,
                                                 int probes, std::uint64_t seed)
{
    const auto& space = g.stationary();
    Rng rng(seed);
    std::vector<Matrix> fs{Matrix::Identity(g.dim(), g.dim())};
    for (int k = 0; k < probes; ++k)
        fs.push_back(k % 2 == 0 ? random_positive(g.dim(), rng, 1.5) : random_hermitian(g.dim(), rng));
    HypercontractivityCheck out;
    out.probes = static_cast<int>(fs.size());
    for (double t : times) {
        double pt = 1.0 + std::exp(2.0 * alpha2 * t);
        Semigroup sg = g.evolve(t);
        for (const auto& f : fs) {
            double ratio = lp_norm(space, pt, hermitian_part(sg.apply(f))) / lp_norm(space, 2.0, f);
            out.worst_ratio = std::max(out.worst_ratio, ratio);
        }
    }
    return out;
}

ThermalWeightBound thermal_weight_bound(const Matrix& hamiltonian, double beta)
{
    require_hermitian(hamiltonian, "hamiltonian");
    auto e = eig_hermitian(hermitian_part(hamiltonian));
    const double d = double(hamiltonian.rows());
    WeightedSpace space(gibbs_state(hamiltonian, beta));
    double op_norm = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
    double spread = e.values(e.values.size() - 1) - e.values(0);
    return {1.0 / space.sigma_min(), d * std::exp(beta * op_norm), d * std::exp(beta * spread)};
}

}  // namespace qmix
