#include "qmix/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace qmix {

namespace {

const json& require_field(const json& spec, const std::string& field)
{
    auto it = spec.find(field);
    if (it == spec.end())
        throw SpecError(field, "missing required field");
    return *it;
}

double number_field(const json& spec, const std::string& field)
{
    const json& v = require_field(spec, field);
    if (!v.is_number())
        throw SpecError(field, "expected a number");
    return v.get<double>();
}

std::int64_t integer_field(const json& spec, const std::string& field)
{
    const json& v = require_field(spec, field);
    if (!v.is_number_integer())
        throw SpecError(field, "expected an integer");
    return v.get<std::int64_t>();
}

std::vector<Matrix> matrix_list(const json& spec, const std::string& field)
{
    const json& v = require_field(spec, field);
    if (!v.is_array())
        throw SpecError(field, "expected a list of matrices");
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < v.size(); ++k)
        out.push_back(matrix_from_json(v[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

// Rewraps std::invalid_argument from a builder as a field-level diagnostic.
template <typename Fn>
Generator build_or_report(const std::string& family, Fn&& fn)
{
    try {
        return fn();
    } catch (const NotPrimitiveError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SpecError(family, e.what());
    }
}

std::string fmt(double x)
{
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

json optional_vector(const std::vector<double>& v)
{
    return v.empty() ? json(nullptr) : json(v);
}

}  // namespace

json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field)
{
    if (!j.is_array() || j.empty())
        throw SpecError(field, "expected a non-empty array of rows");
    const std::size_t n = j.size();
    Matrix m(static_cast<Index>(n), static_cast<Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != n)
            throw SpecError(field + "[" + std::to_string(r) + "]", "expected a row of length " + std::to_string(n));
        for (std::size_t c = 0; c < n; ++c) {
            const json& entry = row[c];
            std::string where = field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
            if (entry.is_number()) {
                m(Index(r), Index(c)) = cplx(entry.get<double>(), 0.0);
            } else if (entry.is_array() && entry.size() == 2 && entry[0].is_number() && entry[1].is_number()) {
                m(Index(r), Index(c)) = cplx(entry[0].get<double>(), entry[1].get<double>());
            } else {
                throw SpecError(where, "expected [re, im]");
            }
        }
    }
    if (!is_finite(m))
        throw SpecError(field, "non-finite entry");
    return m;
}

json parse_json_text(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw SpecError("line " + std::to_string(line) + ", column " + std::to_string(column), "invalid JSON");
    }
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw SpecError(path, "cannot open file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_json_text(buffer.str());
}

Generator generator_from_json(const json& spec)
{
    if (!spec.is_object())
        throw SpecError("$", "generator spec must be a JSON object");
    const json& fam = require_field(spec, "family");
    if (!fam.is_string())
        throw SpecError("family", "expected a string");
    const std::string family = fam.get<std::string>();

    if (family == "generic") {
        Matrix h = matrix_from_json(require_field(spec, "hamiltonian"), "hamiltonian");
        auto ops = spec.contains("lindblad_ops") ? matrix_list(spec, "lindblad_ops") : std::vector<Matrix>{};
        return build_or_report(family, [&] { return build_lindblad(h, ops); });
    }
    if (family == "depolarizing") {
        auto d = integer_field(spec, "dim");
        double gamma = number_field(spec, "gamma");
        if (d < 2)
            throw SpecError("dim", "must be at least 2");
        if (!(gamma > 0.0))
            throw SpecError("gamma", "must be positive");
        return build_or_report(family, [&] { return build_depolarizing(Index(d), gamma); });
    }
    if (family == "projection") {
        Matrix sigma = matrix_from_json(require_field(spec, "sigma"), "sigma");
        double gamma = number_field(spec, "gamma");
        if (!(gamma > 0.0))
            throw SpecError("gamma", "must be positive");
        std::optional<WeightedSpace> space;
        try {
            space.emplace(sigma);
        } catch (const std::exception& e) {
            throw SpecError("sigma", e.what());
        }
        return build_or_report(family, [&] { return build_projection(*space, gamma); });
    }
    if (family == "davies") {
        DaviesSpec ds;
        ds.hamiltonian = matrix_from_json(require_field(spec, "hamiltonian"), "hamiltonian");
        ds.couplings = matrix_list(spec, "couplings");
        ds.beta = number_field(spec, "beta");
        if (!(ds.beta >= 0.0))
            throw SpecError("beta", "must be non-negative");
        if (spec.contains("bohr_tol"))
            ds.bohr_tol = number_field(spec, "bohr_tol");
        if (spec.contains("hamiltonian_drift"))
            ds.hamiltonian_drift = spec.at("hamiltonian_drift").get<bool>();
        return build_or_report(family, [&] { return build_davies(ds); });
    }
    if (family == "channel") {
        auto kraus = matrix_list(spec, "kraus");
        bool lazy = false;
        if (spec.contains("lazy")) {
            if (!spec.at("lazy").is_boolean())
                throw SpecError("lazy", "expected a boolean");
            lazy = spec.at("lazy").get<bool>();
        }
        return build_or_report(family, [&] { return lift_channel(kraus, lazy); });
    }
    if (family == "random_unitary") {
        auto d = integer_field(spec, "dim");
        auto count = integer_field(spec, "D");
        auto seed = integer_field(spec, "seed");
        if (d < 2)
            throw SpecError("dim", "must be at least 2");
        if (count < 1)
            throw SpecError("D", "must be at least 1");
        bool reversible = spec.value("reversible", true);
        bool lazy = spec.value("lazy", false);
        return build_or_report(family, [&] {
            return build_random_unitary(Index(d), int(count), std::uint64_t(seed), reversible, lazy);
        });
    }
    throw SpecError("family", "unknown family '" + family + "'");
}

Generator load_generator(const std::string& path)
{
    return generator_from_json(read_json_file(path));
}

json flags_to_json(const Generator& g)
{
    json out = {{"family", family_name(g.family())},
                {"dim", g.dim()},
                {"flags",
                 {{"unital", g.flags().unital},
                  {"reversible", g.flags().reversible},
                  {"primitive", g.flags().primitive}}}};
    if (g.kraus_rank())
        out["kraus_rank"] = *g.kraus_rank();
    return out;
}

json gap_to_json(const GapReport& gap)
{
    return {{"lambda", gap.lambda},
            {"method", gap_method_name(gap.method)},
            {"residual", gap.residual},
            {"worst_probe_ratio", gap.worst_probe_ratio},
            {"witness", matrix_to_json(gap.witness)}};
}

json ls_to_json(const LSReport& ls)
{
    json bounds = json::object();
    const auto& b = ls.analytic_bounds;
    bounds["closed_form"] = b.closed_form ? json(*b.closed_form) : json(nullptr);
    bounds["unital_lower"] = b.unital_lower ? json(*b.unital_lower) : json(nullptr);
    bounds["expander_upper"] = b.expander_upper ? json(*b.expander_upper) : json(nullptr);
    bounds["gap_upper"] = b.gap_upper;
    bounds["gap_upper_applies"] = b.gap_upper_applies;
    return {{"p", ls.p},
            {"use_hat", ls.use_hat},
            {"alpha_estimate", ls.alpha_estimate},
            {"is_upper_bound", true},
            {"witness", matrix_to_json(ls.witness)},
            {"witness_min_eig", ls.witness_min_eig},
            {"witness_entropy", ls.witness_entropy},
            {"restarts", ls.restarts},
            {"converged", ls.converged},
            {"analytic_bounds", bounds}};
}

json profile_to_json(const RegularityProfile& p)
{
    return {{"convex", p.verdicts.convex},
            {"symmetric", p.verdicts.symmetric},
            {"completely_monotone_to_order", p.verdicts.completely_monotone_to_order},
            {"weak_evidence", p.weak_evidence()},
            {"strong_evidence", p.strong_evidence()},
            {"min_second_difference", p.min_second_difference},
            {"max_asymmetry", p.max_asymmetry},
            {"endpoint_residual", p.endpoint_residual},
            {"probes_evaluated", p.probes_evaluated},
            {"numerical_failures", p.numerical_failures},
            {"worst_probe", {{"t", p.t}, {"s", p.s_grid}, {"h", p.h_values}}}};
}

json direct_regularity_to_json(const DirectRegularityReport& r)
{
    json margins = json::array();
    for (const auto& m : r.margins)
        margins.push_back({{"p", m.p}, {"weak", m.weak}, {"strong", m.strong}, {"weak_as_printed", m.weak_as_printed}});
    return {{"margins", margins},
            {"worst_weak", r.worst_weak},
            {"worst_strong", r.worst_strong},
            {"weak_violation", r.weak_violation},
            {"strong_violation", r.strong_violation},
            {"threshold", r.violation_threshold}};
}

json verdict_to_json(const PartialOrderVerdict& v)
{
    return {{"alpha1", v.alpha1},
            {"alpha2", v.alpha2},
            {"lambda", v.lambda},
            {"alpha2_le_2alpha1", v.ok_alpha2_le_2alpha1},
            {"alpha1_le_lambda", v.ok_alpha1_le_lambda},
            {"alpha1_le_lambda_asserted", v.alpha1_le_lambda_asserted},
            {"slack", v.slack}};
}

json scan_record_to_json(const ScanRecord& rec)
{
    json out = {{"index", rec.index},
                {"seed", rec.seed},
                {"dim", rec.dim},
                {"construction", rec.construction},
                {"reversible", rec.reversible},
                {"primitive", rec.primitive},
                {"worst_weak", rec.worst_weak},
                {"worst_strong", rec.worst_strong},
                {"weak_violation", rec.weak_violation},
                {"strong_violation", rec.strong_violation},
                {"h_convex", rec.h_convex}};
    if (rec.weak_violation || rec.strong_violation) {
        out["superoperator"] = matrix_to_json(rec.superoperator);
        out["worst_probe"] = matrix_to_json(rec.worst_probe);
    }
    return out;
}

json curve_to_json(const MixingCurve& c)
{
    return {{"t", c.times},
            {"trace_dist", c.trace_dist},
            {"chi2", c.chi2},
            {"rel_ent", c.rel_ent},
            {"chi2_bound", c.chi2_bound},
            {"ls_bound_a1", optional_vector(c.ls_bound_a1)},
            {"ls_bound_a2", optional_vector(c.ls_bound_a2)},
            {"initial_states", c.initial_states}};
}

std::string curve_to_csv(const MixingCurve& c)
{
    std::ostringstream os;
    os << "t,trace_dist,chi2,rel_ent,chi2_bound,ls_bound_a1,ls_bound_a2\n";
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        os << fmt(c.times[i]) << ',' << fmt(c.trace_dist[i]) << ',' << fmt(c.chi2[i]) << ',' << fmt(c.rel_ent[i])
           << ',' << fmt(c.chi2_bound[i]) << ',' << (c.ls_bound_a1.empty() ? "" : fmt(c.ls_bound_a1[i])) << ','
           << (c.ls_bound_a2.empty() ? "" : fmt(c.ls_bound_a2[i])) << '\n';
    }
    return os.str();
}

}  // namespace qmix
