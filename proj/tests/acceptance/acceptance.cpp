// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qmix/commands.hpp"
#include "qmix/random_ops.hpp"

using namespace qmix;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(a + (b - a) * i / (n - 1));
    return out;
}

Budget budget(int restarts, std::uint64_t seed = 1)
{
    Budget b;
    b.restarts = restarts;
    b.seed = seed;
    return b;
}

Outcome depolarizing_table()
{
    auto r = experiment_depolarizing_table(budget(8));
    double worst = 0.0;
    for (const auto& row : r.detail)
        worst = std::max(worst, row["rel_error"].get<double>());
    return {r.pass, fmt("max rel err %.2e (tol 1e-3), d=2..8", worst)};
}

Outcome depolarizing_gap()
{
    double worst = 0.0;
    for (Index d = 2; d <= 8; ++d)
        worst = std::max(worst, std::abs(spectral_gap(build_depolarizing(d, 1.0)).lambda - 1.0));
    return {worst <= 1e-10, fmt("max |lambda - 1| %.2e (tol 1e-10)", worst)};
}

Outcome tensor_qubit()
{
    auto r = experiment_tensor_qubit(budget(8), true);
    std::string d;
    for (const auto& row : r.detail)
        d += "N=" + std::to_string(row["qubits"].get<int>()) + " est " + fmt("%.6f", row["estimate"].get<double>()) + "; ";
    return {r.pass, d + "tol 2e-2 / 5e-2"};
}

Outcome ordering()
{
    int failures = 0;
    double worst_21 = 0.0, worst_1l = 0.0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        Rng rng = substream(99, i);
        Generator g = random_reversible(Index(2 + i % 2), i, rng);
        GapReport gap = spectral_gap(g);
        double a1 = estimate_alpha(g, 1, true, budget(6, i + 1), &gap).alpha_estimate;
        double a2 = estimate_alpha(g, 2, true, budget(6, i + 1), &gap).alpha_estimate;
        worst_21 = std::max(worst_21, a2 / (2.0 * a1));
        worst_1l = std::max(worst_1l, a1 / gap.lambda);
        if (a2 > 2.0 * a1 * (1.0 + 1e-3) || a1 > gap.lambda * (1.0 + 1e-3))
            ++failures;
    }
    return {failures == 0, std::to_string(failures) + "/50 failures; max a2/(2 a1) " + fmt("%.4f", worst_21) +
                               ", max a1/lambda " + fmt("%.4f", worst_1l)};
}

Outcome regularity_evidence()
{
    struct Case {
        std::string name;
        Generator g;
    };
    std::vector<Case> cases;
    for (Index d = 2; d <= 4; ++d)
        cases.push_back({"depolarizing d=" + std::to_string(d), build_depolarizing(d, 1.0)});
    for (Index d = 2; d <= 4; ++d) {
        Rng rng = substream(500, std::uint64_t(d));
        cases.push_back({"projection d=" + std::to_string(d), build_projection(WeightedSpace(random_density(d, rng, 0.05)), 1.0)});
    }
    DaviesSpec qubit;
    qubit.hamiltonian = Matrix::Zero(2, 2);
    qubit.hamiltonian(0, 0) = -0.5;
    qubit.hamiltonian(1, 1) = 0.5;
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    qubit.couplings = {x};
    qubit.beta = 1.0;
    cases.push_back({"davies d=2", build_davies(qubit)});
    Rng rng = substream(501, 0);
    cases.push_back({"davies d=3", random_reversible(3, ReversibleKind::davies, rng)});

    bool pass = true;
    double floor = 0.0;
    std::string failed;
    for (const auto& c : cases) {
        auto prof = regularity_profile(c.g, 100, {0.1, 1.0, 3.0});
        floor = std::min(floor, prof.min_second_difference);
        bool ok = prof.min_second_difference >= -1e-8 && prof.numerical_failures == 0 && prof.strong_evidence();
        if (!ok)
            failed += " " + c.name;
        pass = pass && ok;
    }
    return {pass, std::to_string(cases.size()) + " generators x 100 probes x 3 times; min second difference " +
                      fmt("%.2e", floor) + (failed.empty() ? "" : "; failed:" + failed)};
}

Outcome mixing_domination()
{
    double worst = 1e300;
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng = substream(600, i);
        Generator g = random_reversible(Index(2 + i % 3), i, rng);
        GapReport gap = spectral_gap(g);
        BoundConstants c;
        c.lambda = gap.lambda;
        c.alpha1 = estimate_alpha(g, 1, true, budget(6, i + 1), &gap).alpha_estimate;
        auto curve = bound_curves(g, c, linspace(0.0, 8.0 / gap.lambda, 41));
        worst = std::min(worst, curve.domination_margin());
    }
    Generator big = build_depolarizing(64, 1.0);
    GapReport gap = spectral_gap(big);
    BoundConstants c;
    c.lambda = gap.lambda;
    c.alpha1 = estimate_alpha(big, 1, true, budget(4), &gap).alpha_estimate;
    auto curve = bound_curves(big, c, linspace(0.0, 12.0, 61));
    worst = std::min(worst, curve.domination_margin());
    auto cross = bound_crossing_times(c, big.stationary().sigma_min(), 0.01);
    bool domination = worst >= -1e-7;
    bool ls_first = cross.ls_a1 && *cross.ls_a1 < cross.chi2;
    std::string d = "min(bound) - trace distance " + fmt("%.3e", worst) + " (slack 1e-7); d=64 alpha1 est " +
                    fmt("%.4f", *c.alpha1) + ", crossing LS " + fmt("%.3f", cross.ls_a1.value_or(NAN)) + " vs chi2 " +
                    fmt("%.3f", cross.chi2) + (ls_first ? "" : " (LS crossing not earlier)");
    return {domination && ls_first, d};
}

Outcome identity_suite()
{
    const int n = 50;
    int failures = 0;
    std::vector<std::string> bad;
    auto check = [&](bool ok, const char* what) {
        if (!ok) {
            ++failures;
            if (bad.size() < 5)
                bad.push_back(what);
        }
    };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (int k = 0; k < n; ++k) {
        Rng rng = substream(700, std::uint64_t(k));
        Index d = 2 + k % 4;
        WeightedSpace space(random_density(d, rng, 0.02));
        Matrix f = random_positive(d, rng, 1.2);
        Matrix h = random_hermitian(d, rng);
        Matrix rho = random_density(d, rng);
        double dr = relative_entropy(rho, space.sigma());

        check(rel(ent_p(space, 2.0, power_operator(space, 2.0, 1.0, f)), 0.5 * ent_p(space, 1.0, f)) <= 1e-8, "ent item 1");
        check(rel(ent_p(space, 2.0, gamma_power(space, -0.5, matrix_power(rho, 0.5))), 0.5 * dr) <= 1e-8, "ent item 2");
        check(rel(ent_p(space, 1.0, gamma_power(space, -1.0, rho)), dr) <= 1e-8, "ent item 3");
        for (double p : {1.5, 3.0}) {
            Matrix g = power_operator(space, 2.0, p, f);
            double rhs = (2.0 / p) * inner(space, g, op_relative_entropy(space, 2.0, g));
            check(rel(entropy_pairing(space, p, f), rhs) <= 1e-8, "ent item 4");
        }

        check(max_abs(power_operator(space, 2.5, 2.5, f) - f) <= 1e-8 * max_abs(f), "power identity");
        check(rel(std::pow(lp_norm(space, 3.0, power_operator(space, 3.0, 1.5, f)), 3.0),
                  std::pow(lp_norm(space, 1.5, f), 1.5)) <= 1e-8,
              "power norm");
        Matrix chain = power_operator(space, 2.0, 3.0, power_operator(space, 3.0, 1.5, f));
        check(max_abs(chain - power_operator(space, 2.0, 1.5, f)) <= 1e-8 * max_abs(chain), "power composition");

        Matrix g2 = random_hermitian(d, rng);
        check(std::abs(inner(space, h, g2)) <= lp_norm(space, 3.0, h) * lp_norm(space, 1.5, g2) * (1 + 1e-12), "holder");
        check(lp_norm(space, 1.0, h) <= lp_norm(space, 2.0, h) * (1 + 1e-12) &&
                  lp_norm(space, 2.0, h) <= lp_norm(space, 4.0, h) * (1 + 1e-12),
              "norm ordering");

        double norm = lp_norm(space, 3.0, f);
        Matrix witness = power_operator(space, 1.5, 3.0, f) / std::pow(norm, 2.0);
        check(rel(lp_norm(space, 1.5, witness), 1.0) <= 1e-8 && rel(inner(space, witness, f), norm) <= 1e-8, "duality witness");

        ExponentPath path{[](double t) { return 1.0 + std::exp(2.0 * t); }, [](double t) { return 2.0 * std::exp(2.0 * t); }};
        auto nd = norm_derivative_check(space, f, path, 0.2);
        check(std::abs(nd.lhs - nd.rhs) <= 1e-4 * (1.0 + std::abs(nd.rhs)), "norm derivative");
    }
    std::string d = std::to_string(failures) + " failures over " + std::to_string(n) + " instances x 12 identities";
    for (const auto& b : bad)
        d += "; " + b;
    return {failures == 0, d};
}

Outcome expander()
{
    auto r = experiment_expander(budget(8));
    std::string d;
    for (const auto& row : r.detail)
        d += "d=" + std::to_string(row["d"].get<int>()) + " " + fmt("%.4f", row["lower"].get<double>()) + " <= " +
             fmt("%.4f", row["estimate"].get<double>()) + " <= " + fmt("%.4f", row["upper"].get<double>()) + "; ";
    return {r.pass, d};
}

Outcome discrete_continuous()
{
    int failures = 0, checks = 0;
    double worst = -1e300;
    for (std::uint64_t i = 0; i < 20; ++i) {
        Generator g = build_random_unitary(3, 2, 800 + i, true, true);
        if (!g.primitive() || !is_lazy(g)) {
            ++failures;
            continue;
        }
        Rng rng = substream(801, i);
        Matrix rho = random_pure_state(3, rng);
        for (int n = 1; n <= 10; ++n) {
            auto dc = discrete_vs_continuous(g, n, rho);
            worst = std::max(worst, dc.chi2_discrete - dc.chi2_continuous);
            ++checks;
            if (dc.chi2_discrete > dc.chi2_continuous + 1e-9)
                ++failures;
        }
    }
    return {failures == 0, std::to_string(checks) + " comparisons, " + std::to_string(failures) +
                               " failures; max discrete - continuous " + fmt("%.3e", worst)};
}

Outcome entropy_production_check()
{
    auto r = experiment_davies_qubit();
    return {r.pass, "balance " + fmt("%.2e", r.detail["max_balance_residual"].get<double>()) + ", two-route " +
                        fmt("%.2e", r.detail["max_two_route_residual"].get<double>()) + " (tol 1e-8), 50 states"};
}

}  // namespace

int main()
{
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"depolarizing alpha2 table", depolarizing_table},
        {"depolarizing gap", depolarizing_gap},
        {"tensor-product qubit", tensor_qubit},
        {"ordering suite", ordering},
        {"regularity evidence", regularity_evidence},
        {"mixing-bound domination", mixing_domination},
        {"identity suite", identity_suite},
        {"expander bound", expander},
        {"discrete/continuous chi2", discrete_continuous},
        {"entropy production", entropy_production_check},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu %s: %s (%s) [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass)
            ++failed;
    }
    return failed == 0 ? 0 : 1;
}
