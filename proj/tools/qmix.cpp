#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "qmix/commands.hpp"

namespace {

// Returns the explicit seed, or draws one and logs it so the run can be repeated.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed)
{
    if (seed)
        return *seed;
    std::random_device rd;
    std::uint64_t s = (std::uint64_t(rd()) << 32) | rd();
    std::cerr << qmix::json{{"event", "seed_selected"}, {"seed", s}}.dump() << '\n';
    return s;
}

std::vector<qmix::Index> parse_dims(const std::string& text)
{
    std::vector<qmix::Index> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        dims.push_back(std::stoll(item));
    return dims;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Log-Sobolev and mixing-time analysis of quantum Markov semigroups"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qmix::kVersion);

    std::optional<std::uint64_t> seed;
    qmix::Budget budget;
    auto add_budget = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Seed for every random choice");
        sub->add_option("--restarts", budget.restarts, "Optimizer restarts per constant");
        sub->add_option("--max-iter", budget.max_iter, "Iterations per optimizer run");
    };

    qmix::AnalyzeOptions analyze;
    std::vector<std::string> skip;
    auto* an = app.add_subcommand("analyze", "Gap, log-Sobolev constants, regularity and ordering verdicts");
    an->add_option("spec", analyze.spec_path, "Generator spec (JSON)")->required();
    an->add_option("-o,--out", analyze.out_path, "Report path (default stdout)");
    an->add_option("--skip", skip, "Parts to skip: gap, ls, regularity")
        ->check(CLI::IsMember({"gap", "ls", "regularity"}));
    an->add_option("--regularity-probes", analyze.regularity_probes, "Probes for the regularity checks");
    add_budget(an);

    qmix::MixingOptions mixing;
    auto* mx = app.add_subcommand("mixing", "Empirical trace distance against the mixing-time bounds");
    mx->add_option("spec", mixing.spec_path, "Generator spec (JSON)")->required();
    mx->add_option("--epsilon", mixing.epsilon, "Target trace distance");
    mx->add_option("--t-max", mixing.t_max, "Last time on the grid");
    mx->add_option("--grid-n", mixing.grid_n, "Number of grid points");
    mx->add_option("--csv", mixing.out_csv, "Curve CSV path");
    mx->add_option("--json", mixing.out_json, "Curve JSON path");
    mx->add_option("--haar-states", mixing.haar_states, "Haar-random pure initial states");
    add_budget(mx);

    std::string target;
    auto* rp = app.add_subcommand("reproduce", "Rerun one of the reference experiments");
    rp->add_option("target", target, "Experiment")
        ->required()
        ->check(CLI::IsMember(qmix::reproduce_targets()));
    add_budget(rp);

    qmix::ScanCommandOptions scan;
    std::string dims = "2,3";
    std::string mode = "mixed";
    auto* sc = app.add_subcommand("scan", "Random search for regularity violations (JSON lines, resumable)");
    sc->add_option("--dims", dims, "Comma-separated dimensions");
    sc->add_option("-n", scan.n, "Number of instances");
    sc->add_option("-o,--out", scan.out_jsonl, "JSONL output (appended; existing lines are skipped)");
    sc->add_option("--jobs", scan.jobs, "Instances evaluated concurrently");
    sc->add_option("--mode", mode, "generic, reversible, classical or mixed")
        ->check(CLI::IsMember({"generic", "reversible", "classical", "mixed"}));
    sc->add_option("--probes", scan.scan.probes, "Probes per instance");
    sc->add_flag("--profile", scan.scan.with_profile, "Also sample the h(s) profile");
    sc->add_option("--seed", seed, "Seed for every random choice");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        std::cerr << qmix::json{{"error", "malformed_arguments"}, {"message", e.what()}}.dump() << '\n';
        return qmix::kExitMalformed;
    }

    try {
        if (*an) {
            analyze.seed = resolve_seed(seed);
            analyze.budget = budget;
            analyze.skip.insert(skip.begin(), skip.end());
            return qmix::cmd_analyze(analyze, std::cout, std::cerr);
        }
        if (*mx) {
            mixing.seed = resolve_seed(seed);
            mixing.budget = budget;
            return qmix::cmd_mixing(mixing, std::cout, std::cerr);
        }
        if (*rp) {
            budget.seed = resolve_seed(seed);
            return qmix::cmd_reproduce(target, budget, std::cout, std::cerr);
        }
        scan.seed = resolve_seed(seed);
        scan.dims = parse_dims(dims);
        scan.scan.mode = qmix::parse_scan_mode(mode);
        return qmix::cmd_scan(scan, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << qmix::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
        return qmix::kExitMalformed;
    }
}
