#include "qmix/minimize.hpp"

#include <cmath>
#include <memory>

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace qmix {

namespace {

struct SmoothContext {
    const SmoothObjective* objective;
    double wall;
    int evaluations = 0;
};

Eigen::Map<const Eigen::VectorXd> view(const gsl_vector* v)
{
    return {v->data, static_cast<Eigen::Index>(v->size)};
}

void copy_out(const Eigen::VectorXd& src, gsl_vector* dst)
{
    for (std::size_t i = 0; i < dst->size; ++i)
        gsl_vector_set(dst, i, src(static_cast<Eigen::Index>(i)));
}

double guarded(SmoothContext* ctx, const gsl_vector* x, gsl_vector* g)
{
    ++ctx->evaluations;
    Eigen::VectorXd xe = view(x);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(xe.size());
    double value = (*ctx->objective)(xe, g ? &grad : nullptr);
    if (!std::isfinite(value) || !grad.allFinite()) {
        value = ctx->wall;
        grad.setZero();
    }
    if (g)
        copy_out(grad, g);
    return value;
}

double smooth_f(const gsl_vector* x, void* params)
{
    return guarded(static_cast<SmoothContext*>(params), x, nullptr);
}

void smooth_df(const gsl_vector* x, void* params, gsl_vector* g)
{
    guarded(static_cast<SmoothContext*>(params), x, g);
}

void smooth_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g)
{
    *f = guarded(static_cast<SmoothContext*>(params), x, g);
}

struct PlainContext {
    const PlainObjective* objective;
    int evaluations = 0;
};

double plain_f(const gsl_vector* x, void* params)
{
    auto* ctx = static_cast<PlainContext*>(params);
    ++ctx->evaluations;
    double v = (*ctx->objective)(view(x));
    return std::isfinite(v) ? v : GSL_POSINF;
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

VectorPtr make_vector(const Eigen::VectorXd& src)
{
    VectorPtr v(gsl_vector_alloc(static_cast<std::size_t>(src.size())));
    copy_out(src, v.get());
    return v;
}

struct SilenceGsl {
    gsl_error_handler_t* previous;
    SilenceGsl() : previous(gsl_set_error_handler_off()) {}
    ~SilenceGsl() { gsl_set_error_handler(previous); }
};

}  // namespace

MinimizeResult minimize_bfgs(const SmoothObjective& objective, const Eigen::VectorXd& x0, int max_iter,
                             double grad_tol, double initial_step, double wall)
{
    SilenceGsl silence;
    SmoothContext ctx{&objective, wall};
    gsl_multimin_function_fdf fn;
    fn.n = static_cast<std::size_t>(x0.size());
    fn.f = smooth_f;
    fn.df = smooth_df;
    fn.fdf = smooth_fdf;
    fn.params = &ctx;

    VectorPtr start = make_vector(x0);
    std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> solver(
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, fn.n),
        gsl_multimin_fdfminimizer_free);
    gsl_multimin_fdfminimizer_set(solver.get(), &fn, start.get(), initial_step, 0.1);

    MinimizeResult result;
    int status = GSL_CONTINUE;
    int iter = 0;
    while (iter < max_iter) {
        ++iter;
        status = gsl_multimin_fdfminimizer_iterate(solver.get());
        if (status != GSL_SUCCESS)
            break;
        double scale = std::max(1.0, std::abs(solver->f));
        status = gsl_multimin_test_gradient(solver->gradient, grad_tol * scale);
        if (status == GSL_SUCCESS)
            break;
    }
    double gnorm = gsl_blas_dnrm2(solver->gradient);
    result.x = view(solver->x);
    result.value = solver->f;
    result.iterations = iter;
    result.evaluations = ctx.evaluations;
    // A stalled line search at a tiny gradient is a converged point as far as the ratio can tell.
    result.converged = status == GSL_SUCCESS ||
                       (status == GSL_ENOPROG && gnorm <= 1e-5 * std::max(1.0, std::abs(solver->f)));
    return result;
}

MinimizeResult minimize_simplex(const PlainObjective& objective, const Eigen::VectorXd& x0, double step,
                                int max_evaluations, double size_tol)
{
    SilenceGsl silence;
    PlainContext ctx{&objective};
    gsl_multimin_function fn;
    fn.n = static_cast<std::size_t>(x0.size());
    fn.f = plain_f;
    fn.params = &ctx;

    VectorPtr start = make_vector(x0);
    VectorPtr steps = make_vector(Eigen::VectorXd::Constant(x0.size(), step));
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, fn.n), gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(solver.get(), &fn, start.get(), steps.get());

    MinimizeResult result;
    int status = GSL_CONTINUE;
    int iter = 0;
    while (ctx.evaluations < max_evaluations) {
        ++iter;
        status = gsl_multimin_fminimizer_iterate(solver.get());
        if (status != GSL_SUCCESS)
            break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), size_tol);
        if (status == GSL_SUCCESS)
            break;
    }
    result.x = view(solver->x);
    result.value = solver->fval;
    result.iterations = iter;
    result.evaluations = ctx.evaluations;
    result.converged = status == GSL_SUCCESS;
    return result;
}

Eigen::VectorXd numeric_gradient(const PlainObjective& objective, const Eigen::VectorXd& x, double h)
{
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double keep = probe(i);
        probe(i) = keep + h;
        double up = objective(probe);
        probe(i) = keep - h;
        double down = objective(probe);
        probe(i) = keep;
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

}  // namespace qmix
