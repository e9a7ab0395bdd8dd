#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qmix/io.hpp"

namespace qmix {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitMalformed = 1, kExitNotPrimitive = 2, kExitVerdict = 3 };

struct AnalyzeOptions {
    std::string spec_path;
    std::string out_path;  // empty: stdout
    Budget budget;
    std::uint64_t seed = 1;
    std::set<std::string> skip;  // any of gap, ls, regularity
    int regularity_probes = 12;
};

struct MixingOptions {
    std::string spec_path;
    std::string out_csv;
    std::string out_json;
    double epsilon = 0.01;
    double t_max = 10.0;
    int grid_n = 101;
    Budget budget;
    std::uint64_t seed = 1;
    int haar_states = 50;
};

struct ScanCommandOptions {
    std::vector<Index> dims{2, 3};
    int n = 100;
    std::uint64_t seed = 1;
    std::string out_jsonl;
    int jobs = 1;
    ScanOptions scan;
};

// Each command writes its payload and returns an exit code; errors go to `err` as one JSON object per line.
int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err);
int cmd_mixing(const MixingOptions& o, std::ostream& out, std::ostream& err);
int cmd_reproduce(const std::string& target, const Budget& budget, std::ostream& out, std::ostream& err);
int cmd_scan(const ScanCommandOptions& o, std::ostream& out, std::ostream& err);

// Report without provenance; identical inputs and seed give an identical payload.
json analysis_payload(const Generator& g, const AnalyzeOptions& o, bool& violation);

struct ExperimentResult {
    std::string name;
    bool pass = false;
    json detail;
};

ExperimentResult experiment_depolarizing_table(const Budget& budget);
ExperimentResult experiment_tensor_qubit(const Budget& budget, bool include_three_qubits);
ExperimentResult experiment_expander(const Budget& budget);
ExperimentResult experiment_davies_qubit();

// Tensor-summed qubit depolarizing generator on n qubits.
Generator tensor_qubit_depolarizing(int n_qubits, double gamma);

std::vector<std::string> reproduce_targets();

}  // namespace qmix
