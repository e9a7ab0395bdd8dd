#include "qmix/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "qmix/dirichlet_gap.hpp"
#include "qmix/random_ops.hpp"

namespace qmix {

namespace {

constexpr double kConvexTol = 1e-8;
constexpr double kSymmetryTol = 1e-8;
constexpr int kMaxOrder = 6;

double binomial(int n, int k)
{
    double out = 1.0;
    for (int i = 1; i <= k; ++i)
        out = out * double(n - k + i) / double(i);
    return out;
}

// Difference of order m centred at index c with the given stride (1 for even m, 2 for odd m).
double centred_difference(const std::vector<double>& h, Index c, int m, int stride)
{
    double total = 0.0;
    for (int k = 0; k <= m; ++k) {
        Index idx = c + stride * (m - 2 * k) / 2;
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        total += sign * binomial(m, k) * h[static_cast<std::size_t>(idx)];
    }
    return total;
}

struct ProfileStats {
    double scale = 0.0;
    double min_second = 0.0;
    double asymmetry = 0.0;
    int cm_order = kMaxOrder;
    bool convex = true;
    bool symmetric = true;
};

ProfileStats analyse(const std::vector<double>& h)
{
    ProfileStats st;
    const Index n = static_cast<Index>(h.size());
    for (double v : h)
        st.scale = std::max(st.scale, std::abs(v));
    double scale = std::max(st.scale, 1e-300);
    st.min_second = std::numeric_limits<double>::infinity();
    for (Index i = 1; i + 1 < n; ++i) {
        double second = h[i - 1] - 2.0 * h[i] + h[i + 1];
        st.min_second = std::min(st.min_second, second / scale);
    }
    st.convex = st.min_second >= -kConvexTol;
    for (Index i = 0; i < n; ++i)
        st.asymmetry = std::max(st.asymmetry, std::abs(h[i] - h[n - 1 - i]) / scale);
    st.symmetric = st.asymmetry <= kSymmetryTol;

    // (-1)^m h^(m)(1) >= 0 at the symmetry point; even orders are also required on the whole grid.
    const Index c = (n - 1) / 2;
    st.cm_order = 0;
    for (int m = 1; m <= kMaxOrder; ++m) {
        double tol = std::ldexp(1e-11, m) * scale;
        bool even = m % 2 == 0;
        int stride = even ? 1 : 2;
        if (c - stride * m / 2 < 0 || c + stride * m / 2 >= n)
            break;
        double centre = centred_difference(h, c, m, stride);
        bool ok = (even ? centre : -centre) >= -tol;
        if (ok && even) {
            for (Index i = m / 2; i + m / 2 < n && ok; ++i)
                ok = centred_difference(h, i, m, 1) >= -tol;
        }
        if (!ok)
            break;
        st.cm_order = m;
    }
    return st;
}

std::vector<double> sample_h(const Semigroup& sg, const WeightedSpace& space, const EigenDecomposition& ge,
                             const std::vector<double>& grid)
{
    std::vector<double> out;
    out.reserve(grid.size());
    for (double s : grid)
        out.push_back(h_functional(sg, space, ge, s));
    return out;
}

std::vector<double> make_grid(int grid_n)
{
    if (grid_n < 7 || grid_n % 2 == 0)
        throw std::invalid_argument("grid size must be odd and at least 7");
    std::vector<double> grid(static_cast<std::size_t>(grid_n));
    for (int i = 0; i < grid_n; ++i)
        grid[static_cast<std::size_t>(i)] = 2.0 * double(i) / double(grid_n - 1);
    return grid;
}

}  // namespace

double h_functional(const Semigroup& semigroup, const WeightedSpace& space, const EigenDecomposition& g_eig,
                    double s)
{
    if (!(s >= 0.0 && s <= 2.0))
        throw std::invalid_argument("h(s) is defined for s in [0, 2]");
    Matrix left = reconstruct(g_eig, [s](double x) { return std::pow(x, 2.0 - s); });
    Matrix right = reconstruct(g_eig, [s](double x) { return std::pow(x, s); });
    Matrix a = space.gamma(0.5 * s, left);
    Matrix b = space.gamma(-0.5 * s, right);
    return (a * semigroup.apply(b)).trace().real();
}

double h_functional(const Generator& gen, const Matrix& g, double t, double s)
{
    require_hermitian(g, "g");
    auto ge = eig_hermitian(g);
    if (ge.values(0) <= 0.0)
        throw std::domain_error("h(s) needs a positive definite probe");
    if (!(t > 0.0))
        throw std::invalid_argument("h(s) needs t > 0");
    Semigroup sg = gen.evolve(t);
    return h_functional(sg, gen.stationary(), ge, s);
}

std::vector<Matrix> regularity_probes(const WeightedSpace& space, int count, std::uint64_t seed)
{
    const Index d = space.dim();
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Matrix> out;
    for (int k = 0; k < count; ++k) {
        switch (k % 3) {
        case 0:
            out.push_back(random_positive(d, rng, 0.3 + 2.2 * unit(rng)));
            break;
        case 1: {
            double eps = unit(rng) < 0.5 ? 1e-3 : 1e-2;
            out.push_back(eps * Matrix::Identity(d, d) + random_pure_state(d, rng));
            break;
        }
        default: {
            double scale = 0.3 + 2.7 * unit(rng);
            RealVector diag(d);
            for (Index i = 0; i < d; ++i)
                diag(i) = std::exp(scale * normal(rng));
            const Matrix& v = space.spectrum().vectors;
            out.push_back(hermitian_part(v * diag.cast<cplx>().asDiagonal() * v.adjoint()));
        }
        }
    }
    return out;
}

RegularityProfile regularity_profile_for(const Generator& gen, const Matrix& f, double t, int grid_n)
{
    const auto& space = gen.stationary();
    auto grid = make_grid(grid_n);
    Semigroup sg = gen.evolve(t);
    Matrix g = hermitian_part(space.gamma(0.5, f));
    auto ge = eig_hermitian(g);
    if (ge.values(0) <= 0.0)
        throw std::domain_error("regularity probe must be positive definite");
    RegularityProfile prof;
    prof.s_grid = grid;
    prof.h_values = sample_h(sg, space, ge, grid);
    prof.t = t;
    prof.g = g;
    auto st = analyse(prof.h_values);
    double norm2 = (g * g).trace().real();
    double scale = std::max(st.scale, 1e-300);
    prof.verdicts = {st.convex, st.symmetric, st.cm_order};
    prof.min_second_difference = st.min_second;
    prof.max_asymmetry = st.asymmetry;
    prof.endpoint_residual =
        std::max(std::abs(prof.h_values.front() - norm2), std::abs(prof.h_values.back() - norm2)) / scale;
    prof.probes_evaluated = 1;
    return prof;
}

RegularityProfile regularity_profile(const Generator& gen, int probes, const std::vector<double>& times,
                                     int grid_n, std::uint64_t seed)
{
    const auto& space = gen.stationary();
    auto fs = regularity_probes(space, probes, seed);
    RegularityProfile agg;
    agg.min_second_difference = std::numeric_limits<double>::infinity();
    bool have_worst = false;
    bool worst_failed = false;
    for (double t : times) {
        for (const auto& f : fs) {
            RegularityProfile one;
            try {
                one = regularity_profile_for(gen, f, t, grid_n);
            } catch (const std::exception&) {
                ++agg.numerical_failures;
                continue;
            }
            ++agg.probes_evaluated;
            agg.verdicts.convex = agg.verdicts.convex && one.verdicts.convex;
            agg.verdicts.symmetric = agg.verdicts.symmetric && one.verdicts.symmetric;
            agg.verdicts.completely_monotone_to_order =
                std::min(agg.verdicts.completely_monotone_to_order, one.verdicts.completely_monotone_to_order);
            agg.max_asymmetry = std::max(agg.max_asymmetry, one.max_asymmetry);
            agg.endpoint_residual = std::max(agg.endpoint_residual, one.endpoint_residual);
            bool failed = !one.verdicts.convex || !one.verdicts.symmetric ||
                          one.verdicts.completely_monotone_to_order < kMaxOrder;
            bool take = !have_worst || (failed && !worst_failed) ||
                        (failed == worst_failed && one.min_second_difference < agg.min_second_difference);
            agg.min_second_difference = std::min(agg.min_second_difference, one.min_second_difference);
            if (take) {
                agg.s_grid = one.s_grid;
                agg.h_values = one.h_values;
                agg.t = one.t;
                agg.g = one.g;
                have_worst = true;
                worst_failed = failed;
            }
        }
    }
    return agg;
}

double weak_coefficient(double p)
{
    return p <= 2.0 ? 1.0 : 1.0 / (p - 1.0);
}

RegularityMarginValues regularity_margins(const Generator& gen, double p, const Matrix& f)
{
    const auto& space = gen.stationary();
    Matrix fn = f / lp_norm(space, p, f);
    double ep = dirichlet_p(gen, p, fn);
    Matrix lifted = power_operator(space, 2.0, p, fn);
    double e2 = dirichlet_p(gen, 2.0, lifted);
    double scale = std::max(1.0, std::abs(ep));
    double printed = p <= 2.0 ? 1.0 : p - 1.0;
    return {(ep - weak_coefficient(p) * e2) / scale, (ep - 2.0 / p * e2) / scale, (ep - printed * e2) / scale};
}

DirectRegularityReport direct_regularity_check(const Generator& gen, const std::vector<double>& p_grid, int probes,
                                               std::uint64_t seed)
{
    const auto& space = gen.stationary();
    auto fs = regularity_probes(space, probes, seed);
    DirectRegularityReport report;
    report.worst_weak = std::numeric_limits<double>::infinity();
    report.worst_strong = std::numeric_limits<double>::infinity();
    for (double p : p_grid) {
        RegularityMargin m;
        m.p = p;
        m.weak = m.strong = m.weak_as_printed = std::numeric_limits<double>::infinity();
        for (const auto& f : fs) {
            auto v = regularity_margins(gen, p, f);
            if (v.weak < m.weak) {
                m.weak = v.weak;
                m.worst_weak_probe = f;
            }
            if (v.strong < m.strong) {
                m.strong = v.strong;
                m.worst_strong_probe = f;
            }
            m.weak_as_printed = std::min(m.weak_as_printed, v.weak_as_printed);
        }
        report.worst_weak = std::min(report.worst_weak, m.weak);
        report.worst_strong = std::min(report.worst_strong, m.strong);
        report.margins.push_back(std::move(m));
    }
    report.weak_violation = report.worst_weak < -report.violation_threshold;
    report.strong_violation = report.worst_strong < -report.violation_threshold;
    return report;
}

std::string scan_mode_name(ScanMode m)
{
    switch (m) {
    case ScanMode::generic: return "generic";
    case ScanMode::reversible: return "reversible";
    case ScanMode::classical: return "classical";
    case ScanMode::mixed: return "mixed";
    }
    return "mixed";
}

std::string regularity_status(bool h_evidence, bool direct_violation)
{
    if (direct_violation)
        return "violated-direct";
    return h_evidence ? "h-evidence" : "inconclusive-h / regular-direct";
}

ScanMode parse_scan_mode(const std::string& name)
{
    for (ScanMode m : {ScanMode::generic, ScanMode::reversible, ScanMode::classical, ScanMode::mixed})
        if (scan_mode_name(m) == name)
            return m;
    throw std::invalid_argument("unknown scan mode: " + name);
}

ScanRecord scan_instance(std::uint64_t seed, std::uint64_t index, const std::vector<Index>& dims,
                         const ScanOptions& options)
{
    if (dims.empty())
        throw std::invalid_argument("scan needs at least one dimension");
    Rng rng = substream(seed, index);
    ScanRecord rec;
    rec.index = index;
    rec.seed = seed;
    rec.dim = dims[index % dims.size()];
    const std::uint64_t round = index / dims.size();

    ScanMode mode = options.mode;
    if (mode == ScanMode::mixed) {
        const ScanMode cycle[] = {ScanMode::generic, ScanMode::reversible, ScanMode::classical};
        mode = cycle[round % 3];
    }
    std::optional<Generator> gen;
    switch (mode) {
    case ScanMode::generic:
        rec.construction = "generic_lindblad";
        gen = random_lindblad(rec.dim, 2, rng);
        break;
    case ScanMode::reversible: {
        const char* names[] = {"davies", "projection", "unital_channel", "symmetrized_generic"};
        std::uint64_t kind = options.mode == ScanMode::mixed ? round / 3 : round;
        rec.construction = std::string("reversible_") + names[kind % 4];
        gen = random_reversible(rec.dim, kind, rng);
        break;
    }
    case ScanMode::classical: {
        rec.construction = "classical_cycle";
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(rec.dim, rec.dim);
        for (Index i = 0; i < rec.dim; ++i) {
            rates(i, (i + 1) % rec.dim) += 0.5 + unit(rng);
            rates(i, (i + rec.dim - 1) % rec.dim) += 0.05 * unit(rng);
        }
        gen = embedded_classical(rates);
        break;
    }
    case ScanMode::mixed:
        break;
    }
    rec.reversible = gen->flags().reversible;
    rec.primitive = gen->primitive();
    rec.superoperator = gen->heisenberg().matrix();
    if (!rec.primitive)
        return rec;
    auto report = direct_regularity_check(*gen, options.p_grid, options.probes, rng());
    rec.worst_weak = report.worst_weak;
    rec.worst_strong = report.worst_strong;
    rec.weak_violation = report.weak_violation;
    rec.strong_violation = report.strong_violation;
    for (const auto& m : report.margins)
        if (m.strong == report.worst_strong)
            rec.worst_probe = m.worst_strong_probe;
    if (options.with_profile) {
        auto prof = regularity_profile(*gen, 6, {0.1, 1.0}, 51, rng());
        rec.h_convex = prof.verdicts.convex;
    }
    return rec;
}

ScanReport conjecture_scan(int n_instances, const std::vector<Index>& dims, std::uint64_t seed,
                           const ScanOptions& options)
{
    ScanReport report;
    for (int i = 0; i < n_instances; ++i) {
        auto rec = scan_instance(seed, static_cast<std::uint64_t>(i), dims, options);
        if (rec.weak_violation)
            ++report.weak_violations;
        if (rec.strong_violation) {
            if (rec.reversible)
                ++report.strong_violations_reversible;
            else
                ++report.strong_violations_nonreversible;
        }
        report.records.push_back(std::move(rec));
    }
    return report;
}

}  // namespace qmix
