#include "qmix/ls_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qmix/random_ops.hpp"

namespace qmix {

namespace {

constexpr double kEntropyFloor = 1e-10;

struct Evaluated {
    double value;
    Matrix grad_f;  // gradient with respect to f in the trace pairing
};

Evaluated ratio_p2(const Generator& g, const WeightedSpace& space, const Matrix& f, bool want_grad)
{
    Matrix u = hermitian_part(space.gamma(0.5, f));
    auto eu = eig_hermitian(u);
    if (eu.values(0) <= 0.0)
        return {std::numeric_limits<double>::infinity(), {}};
    double u2logu = 0.0, norm2 = 0.0;
    for (Index i = 0; i < eu.values.size(); ++i) {
        double x = eu.values(i);
        u2logu += x * x * std::log(x);
        norm2 += x * x;
    }
    Matrix u2 = u * u;
    double ent = u2logu - 0.5 * (u2 * space.log_sigma()).trace().real() - 0.5 * norm2 * std::log(norm2);
    if (!(ent > kEntropyFloor * norm2))
        return {std::numeric_limits<double>::infinity(), {}};

    Matrix lf = g.apply(f);
    Matrix wf = space.gamma(1.0, f);
    double energy = -(wf * lf).trace().real();
    double ratio = energy / ent;
    if (!want_grad)
        return {ratio, {}};

    Matrix grad_energy = -hermitian_part(space.gamma(1.0, lf) + g.apply_adjoint(wf));
    Matrix ulogu = reconstruct(eu, [](double x) { return x * std::log(x); });
    Matrix grad_u = 2.0 * ulogu - 0.5 * anticommutator(u, space.log_sigma()) - std::log(norm2) * u;
    Matrix grad_ent = hermitian_part(space.gamma(0.5, grad_u));
    return {ratio, (grad_energy - ratio * grad_ent) / ent};
}

Evaluated ratio_p1(const Generator& g, const WeightedSpace& space, const Matrix& f, bool use_hat, bool want_grad)
{
    Matrix w = hermitian_part(space.gamma(1.0, f));
    auto ew = eig_hermitian(w);
    if (ew.values(0) <= 0.0)
        return {std::numeric_limits<double>::infinity(), {}};
    double total = ew.values.sum();
    double wlogw = 0.0;
    for (Index i = 0; i < ew.values.size(); ++i)
        wlogw += ew.values(i) * std::log(ew.values(i));
    Matrix log_w = reconstruct(ew, [](double x) { return std::log(x); });
    Matrix x = log_w - space.log_sigma();
    double ent = wlogw - (w * space.log_sigma()).trace().real() - total * std::log(total);
    if (!(ent > kEntropyFloor * total))
        return {std::numeric_limits<double>::infinity(), {}};

    Matrix a = use_hat ? hermitian_part(g.apply_adjoint(w)) : hermitian_part(space.gamma(1.0, g.apply(f)));
    double energy = -0.5 * (a * x).trace().real();
    double ratio = energy / ent;
    if (!want_grad)
        return {ratio, {}};

    Matrix direct = use_hat ? space.gamma(1.0, g.apply(x)) : g.apply_adjoint(space.gamma(1.0, x));
    Matrix through_log = space.gamma(1.0, frechet(ew, log_divided_differences(ew.values), a));
    Matrix grad_energy = -0.5 * hermitian_part(direct + through_log);
    Matrix grad_ent = hermitian_part(space.gamma(1.0, x - std::log(total) * Matrix::Identity(w.rows(), w.cols())));
    return {ratio, (grad_energy - ratio * grad_ent) / ent};
}

Eigen::VectorXd grad_to_params(const Matrix& grad_h)
{
    const Index d = grad_h.rows();
    Eigen::VectorXd out(d * d);
    Index k = 0;
    for (Index i = 0; i < d; ++i)
        out(k++) = grad_h(i, i).real();
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            out(k++) = 2.0 * grad_h(i, j).real();
            out(k++) = 2.0 * grad_h(i, j).imag();
        }
    return out;
}

Matrix normalised_exp(const Matrix& h, double p, const WeightedSpace& space)
{
    Matrix f = matrix_function(h, [](double x) { return std::exp(x); });
    return f / lp_norm(space, p, f);
}

std::vector<Eigen::VectorXd> starting_points(const Generator& g, const GapReport& gap, const Budget& budget)
{
    const Index d = g.dim();
    const auto& space = g.stationary();
    std::vector<Eigen::VectorXd> starts;
    Matrix gw = hermitian_part(gap.witness);
    gw -= (gw.trace() / double(d)) * Matrix::Identity(d, d);
    double gn = gw.norm();
    if (gn > 0.0) {
        gw /= gn;
        for (double eps : {1e-2, -1e-2, 1e-1, -1e-1})
            starts.push_back(hermitian_to_params(eps * gw));
    }
    const Matrix& basis = space.spectrum().vectors;
    auto spike = [&](Index j, double amp) {
        Vector v = basis.col(j);
        return hermitian_to_params(amp * v * v.adjoint());
    };
    for (Index j = 0; j < std::min<Index>(d, 6); ++j)
        starts.push_back(spike(j, 1.5));
    for (Index j = 0; j < std::min<Index>(d, 4); ++j)
        starts.push_back(spike(d - 1 - j, -1.5));
    Rng rng(budget.seed);
    std::uniform_real_distribution<double> scale(0.2, 2.0);
    while (static_cast<int>(starts.size()) < budget.restarts)
        starts.push_back(hermitian_to_params(random_hermitian(d, rng, scale(rng))));
    if (static_cast<int>(starts.size()) > budget.restarts)
        starts.resize(static_cast<std::size_t>(std::max(budget.restarts, 1)));
    return starts;
}

}  // namespace

Eigen::VectorXd hermitian_to_params(const Matrix& h)
{
    const Index d = h.rows();
    Eigen::VectorXd x(d * d);
    Index k = 0;
    for (Index i = 0; i < d; ++i)
        x(k++) = h(i, i).real();
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            x(k++) = h(i, j).real();
            x(k++) = h(i, j).imag();
        }
    return x;
}

Matrix params_to_hermitian(const Eigen::VectorXd& x, Index d)
{
    if (x.size() != d * d)
        throw std::invalid_argument("parameter vector has the wrong length");
    Matrix h(d, d);
    Index k = 0;
    for (Index i = 0; i < d; ++i)
        h(i, i) = x(k++);
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            double re = x(k++);
            double im = x(k++);
            h(i, j) = cplx(re, im);
            h(j, i) = cplx(re, -im);
        }
    return h;
}

SmoothObjective ls_ratio_objective(const Generator& g, int p, bool use_hat)
{
    if (p != 1 && p != 2)
        throw std::invalid_argument("Log-Sobolev estimation supports p = 1 and p = 2");
    const WeightedSpace* space = &g.stationary();
    const Generator* gen = &g;
    const Index d = g.dim();
    return [=](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        Matrix h = params_to_hermitian(x, d);
        auto eh = eig_hermitian(h);
        Matrix f = reconstruct(eh, [](double v) { return std::exp(v); });
        Evaluated ev = p == 2 ? ratio_p2(*gen, *space, f, grad != nullptr)
                              : ratio_p1(*gen, *space, f, use_hat, grad != nullptr);
        if (grad && std::isfinite(ev.value)) {
            Matrix grad_h = frechet(eh, exp_divided_differences(eh.values), ev.grad_f);
            *grad = grad_to_params(grad_h);
        }
        return ev.value;
    };
}

LSReport estimate_alpha(const Generator& g, int p, bool use_hat, const Budget& budget, const GapReport* gap)
{
    const WeightedSpace& space = g.stationary();
    GapReport local_gap;
    if (!gap) {
        local_gap = spectral_gap(g);
        gap = &local_gap;
    }
    SmoothObjective objective = ls_ratio_objective(g, p, use_hat);
    auto starts = starting_points(g, *gap, budget);

    MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& x0 : starts) {
        double v0 = objective(x0, nullptr);
        if (!std::isfinite(v0))
            continue;
        MinimizeResult run = minimize_bfgs(objective, x0, budget.max_iter);
        if (!run.converged && std::isfinite(run.value))
            run = minimize_bfgs(objective, run.x, budget.max_iter);
        if (std::isfinite(run.value) && run.value < best.value)
            best = run;
    }
    if (!std::isfinite(best.value))
        throw std::runtime_error("Log-Sobolev optimizer found no admissible witness");
    for (int polish = 0; polish < 2; ++polish) {
        MinimizeResult run = minimize_bfgs(objective, best.x, budget.max_iter);
        if (std::isfinite(run.value) && run.value <= best.value) {
            bool improved = run.value < best.value * (1.0 - 1e-12);
            best = run;
            if (!improved)
                break;
        }
    }

    LSReport report;
    report.p = p;
    report.use_hat = use_hat;
    report.restarts = static_cast<int>(starts.size());
    report.converged = best.converged;
    Matrix h = params_to_hermitian(best.x, g.dim());
    report.witness = normalised_exp(h, p, space);
    double energy = p == 2 || !use_hat ? dirichlet_p(g, p, report.witness) : dirichlet_hat_p(g, p, report.witness);
    try {
        report.witness_entropy = ent_p(space, p, report.witness);
        report.alpha_estimate = energy / report.witness_entropy;
    } catch (const std::domain_error&) {
        // witness too close to singular for the gated functionals; keep the optimizer's ratio
        report.witness_entropy = energy / best.value;
        report.alpha_estimate = best.value;
    }
    report.witness_min_eig = eig_hermitian(report.witness).values(0);

    AnalyticBounds& b = report.analytic_bounds;
    const auto& flags = g.flags();
    b.gap_upper = gap->lambda;
    b.gap_upper_applies = flags.reversible || flags.unital;
    if (g.family() == Family::depolarizing && p == 2)
        b.closed_form = depolarizing_alpha2(g.dim(), g.rate());
    if (p == 2 && flags.unital)
        b.unital_lower = unital_alpha2_lower(g, gap->lambda);
    if (p == 2 && flags.unital && flags.reversible && g.kraus_rank() && *g.kraus_rank() >= 2)
        b.expander_upper = expander_alpha2_upper(*g.kraus_rank(), g.dim());
    return report;
}

double depolarizing_alpha2(Index d, double gamma)
{
    if (d < 2)
        throw std::invalid_argument("depolarizing constant needs d >= 2");
    if (d == 2)
        return gamma;
    double dd = double(d);
    return 2.0 * gamma * (1.0 - 2.0 / dd) / std::log(dd - 1.0);
}

double unital_alpha2_lower(const Generator& g, double lambda)
{
    if (!g.flags().unital)
        throw std::invalid_argument("unital lower bound needs a unital generator");
    if (!g.primitive())
        throw NotPrimitiveError("unital lower bound needs a primitive generator");
    if (g.dim() == 2)
        return lambda;
    double dd = double(g.dim());
    return 2.0 * (1.0 - 2.0 / dd) * lambda / std::log(dd - 1.0);
}

double expander_alpha2_upper(int kraus_count, Index d)
{
    if (d <= 1)
        throw std::invalid_argument("expander bound needs d >= 2");
    if (kraus_count < 2)
        throw std::invalid_argument("expander bound needs D >= 2");
    double dd = double(d);
    return std::log(double(kraus_count)) * (4.0 + std::log(std::log(dd))) / (2.0 * std::log(0.75 * dd));
}

PartialOrderVerdict partial_order_verdict(double alpha1, double alpha2, double lambda, bool asserted)
{
    PartialOrderVerdict v;
    v.alpha1 = alpha1;
    v.alpha2 = alpha2;
    v.lambda = lambda;
    v.alpha1_le_lambda_asserted = asserted;
    v.ok_alpha2_le_2alpha1 = alpha2 <= 2.0 * alpha1 * (1.0 + v.slack);
    v.ok_alpha1_le_lambda = !asserted || alpha1 <= lambda * (1.0 + v.slack);
    return v;
}

PartialOrderVerdict partial_order_verdict(const Generator& g, const Budget& budget)
{
    GapReport gap = spectral_gap(g);
    LSReport a1 = estimate_alpha(g, 1, true, budget, &gap);
    LSReport a2 = estimate_alpha(g, 2, true, budget, &gap);
    bool asserted = g.flags().reversible || g.flags().unital;
    return partial_order_verdict(a1.alpha_estimate, a2.alpha_estimate, gap.lambda, asserted);
}

}  // namespace qmix
