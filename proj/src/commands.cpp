#include "qmix/commands.hpp"

#include "qmix/random_ops.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>

namespace qmix {

namespace {

using Clock = std::chrono::steady_clock;

void report_error(std::ostream& err, const std::string& kind, const std::string& where, const std::string& message)
{
    json e = {{"error", kind}, {"message", message}};
    if (!where.empty())
        e["where"] = where;
    err << e.dump() << '\n';
}

json unavailable(const std::string& reason)
{
    return {{"value", nullptr}, {"reason", reason}};
}

// Loads a generator, mapping failures onto the exit-code contract.
std::optional<Generator> load_or_report(const std::string& path, std::ostream& err, int& code)
{
    try {
        Generator g = load_generator(path);
        if (!g.primitive()) {
            report_error(err, "not_primitive", path, "generator has no unique full-rank stationary state");
            code = kExitNotPrimitive;
            return std::nullopt;
        }
        return g;
    } catch (const SpecError& e) {
        report_error(err, "malformed_spec", e.where(), e.message());
        code = kExitMalformed;
    } catch (const NotPrimitiveError& e) {
        report_error(err, "not_primitive", path, e.what());
        code = kExitNotPrimitive;
    } catch (const std::exception& e) {
        report_error(err, "malformed_spec", path, e.what());
        code = kExitMalformed;
    }
    return std::nullopt;
}

json provenance(std::uint64_t seed, Clock::time_point start)
{
    double wall = std::chrono::duration<double>(Clock::now() - start).count();
    return {{"seed", seed}, {"version", kVersion}, {"wall_time", wall}};
}

bool write_text(const std::string& path, const std::string& text, std::ostream& err)
{
    std::ofstream f(path);
    if (!f) {
        report_error(err, "io", path, "cannot open output file");
        return false;
    }
    f << text;
    return static_cast<bool>(f);
}

Budget with_seed(Budget b, std::uint64_t seed)
{
    b.seed = seed;
    return b;
}

double relative_error(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

}  // namespace

json analysis_payload(const Generator& g, const AnalyzeOptions& o, bool& violation)
{
    violation = false;
    json report;
    report["generator"] = flags_to_json(g);
    report["sigma_min"] = g.stationary().sigma_min();

    std::optional<GapReport> gap;
    if (o.skip.count("gap")) {
        report["gap"] = unavailable("skipped");
    } else {
        try {
            gap = spectral_gap(g, 200, o.seed);
            report["gap"] = gap_to_json(*gap);
        } catch (const std::exception& e) {
            report["gap"] = unavailable(e.what());
        }
    }

    std::optional<LSReport> a1, a2;
    if (o.skip.count("ls")) {
        report["ls"] = {{"alpha1", unavailable("skipped")}, {"alpha2", unavailable("skipped")}};
    } else {
        const GapReport* gp = gap ? &*gap : nullptr;
        Budget b = with_seed(o.budget, o.seed);
        try {
            a1 = estimate_alpha(g, 1, true, b, gp);
            report["ls"]["alpha1"] = ls_to_json(*a1);
        } catch (const std::exception& e) {
            report["ls"]["alpha1"] = unavailable(e.what());
        }
        try {
            a2 = estimate_alpha(g, 2, true, b, gp);
            report["ls"]["alpha2"] = ls_to_json(*a2);
        } catch (const std::exception& e) {
            report["ls"]["alpha2"] = unavailable(e.what());
        }
    }

    if (o.skip.count("regularity")) {
        report["regularity"] = unavailable("skipped");
    } else {
        try {
            auto profile = regularity_profile(g, o.regularity_probes, {0.1, 1.0, 3.0}, 101, o.seed);
            auto direct = direct_regularity_check(g, kDefaultPGrid, o.regularity_probes, o.seed);
            report["regularity"] = profile_to_json(profile);
            report["regularity"]["direct"] = direct_regularity_to_json(direct);
            report["regularity"]["weak_status"] = regularity_status(profile.weak_evidence(), direct.weak_violation);
            report["regularity"]["strong_status"] = regularity_status(profile.strong_evidence(), direct.strong_violation);
            if (direct.weak_violation || (g.flags().reversible && direct.strong_violation))
                violation = true;
        } catch (const std::exception& e) {
            report["regularity"] = unavailable(e.what());
        }
    }

    if (gap && a1 && a2) {
        bool asserted = g.flags().reversible || g.flags().unital;
        auto v = partial_order_verdict(a1->alpha_estimate, a2->alpha_estimate, gap->lambda, asserted);
        report["verdicts"] = verdict_to_json(v);
        if (!v.ok_alpha2_le_2alpha1 || (asserted && !v.ok_alpha1_le_lambda))
            violation = true;
    } else {
        report["verdicts"] = unavailable("needs gap, alpha1 and alpha2");
    }
    return report;
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err)
{
    auto start = Clock::now();
    int code = kExitOk;
    auto g = load_or_report(o.spec_path, err, code);
    if (!g)
        return code;
    bool violation = false;
    json report = analysis_payload(*g, o, violation);
    report["provenance"] = provenance(o.seed, start);
    std::string text = report.dump(2) + "\n";
    if (o.out_path.empty())
        out << text;
    else if (!write_text(o.out_path, text, err))
        return kExitMalformed;
    return violation ? kExitVerdict : kExitOk;
}

int cmd_mixing(const MixingOptions& o, std::ostream& out, std::ostream& err)
{
    auto start = Clock::now();
    if (!(o.epsilon > 0.0) || !(o.t_max > 0.0) || o.grid_n < 2) {
        report_error(err, "malformed_arguments", "", "need epsilon > 0, t_max > 0 and grid_n >= 2");
        return kExitMalformed;
    }
    int code = kExitOk;
    auto g = load_or_report(o.spec_path, err, code);
    if (!g)
        return code;

    Budget b = with_seed(o.budget, o.seed);
    auto gap = spectral_gap(*g, 200, o.seed);
    BoundConstants c;
    c.lambda = gap.lambda;
    c.alpha1 = estimate_alpha(*g, 1, true, b, &gap).alpha_estimate;
    c.alpha2 = estimate_alpha(*g, 2, true, b, &gap).alpha_estimate;
    c.strongly_regular = g->flags().reversible && !direct_regularity_check(*g, kDefaultPGrid, 12, o.seed).strong_violation;

    std::vector<double> grid(static_cast<std::size_t>(o.grid_n));
    for (int i = 0; i < o.grid_n; ++i)
        grid[static_cast<std::size_t>(i)] = o.t_max * double(i) / double(o.grid_n - 1);
    auto curve = bound_curves(*g, c, grid, o.haar_states, o.seed);
    auto tau = mixing_time(*g, o.epsilon, o.haar_states, o.seed);
    auto crossing = bound_crossing_times(c, g->stationary().sigma_min(), o.epsilon);

    if (!o.out_csv.empty() && !write_text(o.out_csv, curve_to_csv(curve), err))
        return kExitMalformed;
    if (!o.out_json.empty() && !write_text(o.out_json, curve_to_json(curve).dump(2) + "\n", err))
        return kExitMalformed;

    json summary = {{"epsilon", o.epsilon},
                    {"tau_mix", tau.tau},
                    {"states_sampled", tau.states_sampled},
                    {"caveat", tau.caveat},
                    {"lambda", c.lambda},
                    {"alpha1", *c.alpha1},
                    {"alpha2", *c.alpha2},
                    {"strongly_regular", c.strongly_regular},
                    {"crossing",
                     {{"chi2", crossing.chi2},
                      {"ls_a1", crossing.ls_a1 ? json(*crossing.ls_a1) : json(nullptr)},
                      {"ls_a2", crossing.ls_a2 ? json(*crossing.ls_a2) : json(nullptr)}}},
                    {"domination_margin", curve.domination_margin()},
                    {"provenance", provenance(o.seed, start)}};
    out << summary.dump(2) << '\n';
    return curve.domination_margin() >= -1e-7 ? kExitOk : kExitVerdict;
}

Generator tensor_qubit_depolarizing(int n_qubits, double gamma)
{
    if (n_qubits < 1)
        throw std::invalid_argument("need at least one qubit");
    Matrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    z << 1, 0, 0, -1;
    const Index d = Index(1) << n_qubits;
    std::vector<Matrix> ops;
    for (int site = 0; site < n_qubits; ++site) {
        for (const Matrix* pauli : {&x, &y, &z}) {
            Matrix op = Matrix::Identity(1, 1);
            for (int k = 0; k < n_qubits; ++k) {
                const Matrix factor = k == site ? *pauli : Matrix(Matrix::Identity(2, 2));
                Matrix next(op.rows() * 2, op.cols() * 2);
                for (Index i = 0; i < op.rows(); ++i)
                    for (Index j = 0; j < op.cols(); ++j)
                        next.block(2 * i, 2 * j, 2, 2) = op(i, j) * factor;
                op = next;
            }
            ops.push_back(std::sqrt(gamma / 4.0) * op);
        }
    }
    return build_lindblad(Matrix::Zero(d, d), ops);
}

ExperimentResult experiment_depolarizing_table(const Budget& budget)
{
    ExperimentResult r{"depolarizing_table", true, json::array()};
    for (Index d = 2; d <= 8; ++d) {
        auto g = build_depolarizing(d, 1.0);
        auto est = estimate_alpha(g, 2, true, budget);
        double exact = depolarizing_alpha2(d, 1.0);
        double rel = relative_error(est.alpha_estimate, exact);
        bool ok = rel <= 1e-3;
        r.pass = r.pass && ok;
        r.detail.push_back({{"d", d}, {"estimate", est.alpha_estimate}, {"closed_form", exact}, {"rel_error", rel}, {"pass", ok}});
    }
    return r;
}

ExperimentResult experiment_tensor_qubit(const Budget& budget, bool include_three_qubits)
{
    ExperimentResult r{"tensor_qubit", true, json::array()};
    std::vector<std::pair<int, double>> cases{{2, 2e-2}};
    if (include_three_qubits)
        cases.push_back({3, 5e-2});
    for (auto [n, tol] : cases) {
        Budget b = budget;
        if (n == 3) {
            b.restarts *= 2;
            b.max_iter *= 2;
        }
        auto g = tensor_qubit_depolarizing(n, 1.0);
        auto est = estimate_alpha(g, 2, true, b);
        bool ok = std::abs(est.alpha_estimate - 1.0) <= tol;
        r.pass = r.pass && ok;
        r.detail.push_back({{"qubits", n}, {"estimate", est.alpha_estimate}, {"target", 1.0}, {"tolerance", tol}, {"pass", ok}});
    }
    return r;
}

ExperimentResult experiment_expander(const Budget& budget)
{
    ExperimentResult r{"expander", true, json::array()};
    const int unitaries = 2;
    for (Index d : {Index(4), Index(8), Index(16)}) {
        auto g = build_random_unitary(d, unitaries, 1000 + std::uint64_t(d), true, false);
        auto gap = spectral_gap(g);
        auto est = estimate_alpha(g, 2, true, budget, &gap);
        double upper = expander_alpha2_upper(unitaries, d);
        double lower = unital_alpha2_lower(g, gap.lambda);
        bool ok = est.alpha_estimate <= upper && est.alpha_estimate >= lower * (1.0 - 1e-3);
        r.pass = r.pass && ok;
        r.detail.push_back({{"d", d},
                            {"D", unitaries},
                            {"kraus_rank", g.kraus_rank() ? json(*g.kraus_rank()) : json(nullptr)},
                            {"lambda", gap.lambda},
                            {"estimate", est.alpha_estimate},
                            {"upper", upper},
                            {"lower", lower},
                            {"pass", ok}});
    }
    return r;
}

ExperimentResult experiment_davies_qubit()
{
    ExperimentResult r{"davies_qubit", true, json::object()};
    const double omega = 1.0, beta = 1.0;
    DaviesSpec spec;
    spec.hamiltonian = Matrix::Zero(2, 2);
    spec.hamiltonian(0, 0) = omega / 2.0;
    spec.hamiltonian(1, 1) = -omega / 2.0;
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    spec.couplings = {x};
    spec.beta = beta;
    auto g = build_davies(spec);
    const auto& sigma = g.stationary().sigma();
    double z = std::exp(-beta * omega / 2.0) + std::exp(beta * omega / 2.0);
    double pop_err = std::max(std::abs(sigma(0, 0).real() - std::exp(-beta * omega / 2.0) / z),
                              std::abs(sigma(1, 1).real() - std::exp(beta * omega / 2.0) / z));

    Rng rng(2024);
    double worst_balance = 0.0, worst_two_route = 0.0, min_production = 1e300;
    for (int k = 0; k < 50; ++k) {
        Matrix rho = random_density(2, rng, 1e-3);
        auto ep = entropy_production(g, rho);
        worst_balance = std::max(worst_balance, ep.balance_residual);
        double direct = -(g.apply_adjoint(rho) * (matrix_log(rho) - g.stationary().log_sigma())).trace().real();
        worst_two_route = std::max(worst_two_route, std::abs(ep.production - direct));
        min_production = std::min(min_production, ep.production);
    }
    auto weights = thermal_weight_bound(spec.hamiltonian, beta);
    r.pass = pop_err <= 1e-9 && worst_balance <= 1e-8 && worst_two_route <= 1e-8 && min_production >= -1e-12;
    r.detail = {{"population_error", pop_err},
                {"states", 50},
                {"max_balance_residual", worst_balance},
                {"max_two_route_residual", worst_two_route},
                {"min_production", min_production},
                {"inverse_sigma_min", weights.inverse_sigma_min},
                {"weight_bound_literal", weights.literal_bound},
                {"weight_bound_shifted", weights.shifted_bound}};
    return r;
}

std::vector<std::string> reproduce_targets()
{
    return {"depolarizing_table", "tensor_qubit", "expander", "davies_qubit"};
}

int cmd_reproduce(const std::string& target, const Budget& budget, std::ostream& out, std::ostream& err)
{
    auto start = Clock::now();
    ExperimentResult r;
    try {
        if (target == "depolarizing_table")
            r = experiment_depolarizing_table(budget);
        else if (target == "tensor_qubit")
            r = experiment_tensor_qubit(budget, true);
        else if (target == "expander")
            r = experiment_expander(budget);
        else if (target == "davies_qubit")
            r = experiment_davies_qubit();
        else {
            report_error(err, "malformed_arguments", "target", "unknown target '" + target + "'");
            return kExitMalformed;
        }
    } catch (const std::exception& e) {
        report_error(err, "experiment_failed", target, e.what());
        return kExitVerdict;
    }
    json report = {{"target", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"provenance", provenance(budget.seed, start)}};
    out << report.dump(2) << '\n';
    return r.pass ? kExitOk : kExitVerdict;
}

int cmd_scan(const ScanCommandOptions& o, std::ostream& out, std::ostream& err)
{
    auto start = Clock::now();
    if (o.dims.empty() || o.n < 0 || o.jobs < 1) {
        report_error(err, "malformed_arguments", "", "need at least one dimension, n >= 0 and jobs >= 1");
        return kExitMalformed;
    }
    for (Index d : o.dims)
        if (d < 2) {
            report_error(err, "malformed_arguments", "dims", "dimensions must be at least 2");
            return kExitMalformed;
        }

    int done = 0;
    if (!o.out_jsonl.empty() && std::filesystem::exists(o.out_jsonl)) {
        std::ifstream in(o.out_jsonl);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty())
                ++done;
    }
    std::ofstream file;
    if (!o.out_jsonl.empty()) {
        file.open(o.out_jsonl, std::ios::app);
        if (!file) {
            report_error(err, "io", o.out_jsonl, "cannot open output file");
            return kExitMalformed;
        }
    }
    std::ostream& sink = o.out_jsonl.empty() ? out : file;

    int weak = 0, strong_rev = 0, strong_nonrev = 0;
    for (int next = done; next < o.n;) {
        int batch = std::min(o.jobs, o.n - next);
        std::vector<std::future<ScanRecord>> work;
        for (int k = 0; k < batch; ++k)
            work.push_back(std::async(o.jobs > 1 ? std::launch::async : std::launch::deferred, [&, idx = next + k] {
                return scan_instance(o.seed, std::uint64_t(idx), o.dims, o.scan);
            }));
        for (auto& w : work) {
            ScanRecord rec;
            try {
                rec = w.get();
            } catch (const std::exception& e) {
                report_error(err, "scan_instance_failed", std::to_string(next), e.what());
                return kExitVerdict;
            }
            weak += rec.weak_violation;
            strong_rev += rec.strong_violation && rec.reversible;
            strong_nonrev += rec.strong_violation && !rec.reversible;
            sink << scan_record_to_json(rec).dump() << '\n';
            sink.flush();
            ++next;
        }
    }
    if (!o.out_jsonl.empty()) {
        json summary = {{"instances", o.n},
                        {"resumed_from", done},
                        {"weak_violations", weak},
                        {"strong_violations_reversible", strong_rev},
                        {"strong_violations_nonreversible", strong_nonrev},
                        {"provenance", provenance(o.seed, start)}};
        out << summary.dump(2) << '\n';
    }
    return (weak > 0 || strong_rev > 0) ? kExitVerdict : kExitOk;
}

}  // namespace qmix
