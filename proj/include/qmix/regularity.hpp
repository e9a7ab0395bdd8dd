#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmix/generators.hpp"

namespace qmix {

// h(s) = tr[sigma^{s/4} g^{2-s} sigma^{s/4} T_t(sigma^{-s/4} g^s sigma^{-s/4})]
double h_functional(const Generator& gen, const Matrix& g, double t, double s);
double h_functional(const Semigroup& semigroup, const WeightedSpace& space, const EigenDecomposition& g_eig,
                    double s);

struct RegularityVerdicts {
    bool convex = true;
    bool symmetric = true;
    int completely_monotone_to_order = 6;
};

struct RegularityProfile {
    // worst probe
    std::vector<double> s_grid;
    std::vector<double> h_values;
    double t = 0.0;
    Matrix g;
    // aggregated over all probes and times
    RegularityVerdicts verdicts;
    double min_second_difference = 0.0;  // relative to max |h|
    double max_asymmetry = 0.0;          // relative to max |h|
    double endpoint_residual = 0.0;      // max |h(0) - ||f||^2|, |h(2) - ||f||^2|, relative
    int probes_evaluated = 0;
    int numerical_failures = 0;

    bool weak_evidence() const { return verdicts.convex; }
    bool strong_evidence() const
    {
        return verdicts.symmetric && verdicts.completely_monotone_to_order >= 6;
    }
};

struct ProbeSet {
    int gaussian = 0;
    int near_singular = 0;
    int commuting = 0;  // diagonal in the eigenbasis of sigma
};

// Positive probes f: exp of Gaussian Hermitian, eps*1 + projector, and sigma-commuting exponentials.
std::vector<Matrix> regularity_probes(const WeightedSpace& space, int count, std::uint64_t seed);

RegularityProfile regularity_profile(const Generator& gen, int probes, const std::vector<double>& times,
                                     int grid_n = 101, std::uint64_t seed = 11);
// Profile of one probe f (not g) at one time.
RegularityProfile regularity_profile_for(const Generator& gen, const Matrix& f, double t, int grid_n = 101);

struct RegularityMargin {
    double p = 2.0;
    double weak = 0.0;             // E_p(f) - c_weak(p) E_2(I_{2,p} f), worst over probes
    double strong = 0.0;           // E_p(f) - (2/p) E_2(I_{2,p} f)
    double weak_as_printed = 0.0;  // p >= 2 coefficient (p - 1) taken literally
    Matrix worst_weak_probe, worst_strong_probe;
};

struct DirectRegularityReport {
    std::vector<RegularityMargin> margins;
    double worst_weak = 0.0;
    double worst_strong = 0.0;
    bool weak_violation = false;
    bool strong_violation = false;
    double violation_threshold = 1e-8;
};

inline const std::vector<double> kDefaultPGrid = {1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0};

// Coefficient in the weak condition: 1 for p <= 2, 1/(p-1) for p >= 2.
double weak_coefficient(double p);

struct RegularityMarginValues {
    double weak, strong, weak_as_printed;
};
// Margins for one probe, relative to max(1, E_p(f)); f is normalised to ||f||_{p,sigma} = 1 first.
RegularityMarginValues regularity_margins(const Generator& gen, double p, const Matrix& f);

DirectRegularityReport direct_regularity_check(const Generator& gen, const std::vector<double>& p_grid = kDefaultPGrid,
                                               int probes = 24, std::uint64_t seed = 13);

// Combines the two kinds of evidence: "h-evidence", "inconclusive-h / regular-direct" or "violated-direct".
std::string regularity_status(bool h_evidence, bool direct_violation);

enum class ScanMode { generic, reversible, classical, mixed };
std::string scan_mode_name(ScanMode m);
ScanMode parse_scan_mode(const std::string& name);

struct ScanRecord {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    Index dim = 0;
    std::string construction;
    bool reversible = false;
    bool primitive = true;
    double worst_weak = 0.0;
    double worst_strong = 0.0;
    bool weak_violation = false;
    bool strong_violation = false;
    bool h_convex = true;
    Matrix superoperator;  // Heisenberg-picture generator, for reproduction
    Matrix worst_probe;
};

struct ScanOptions {
    ScanMode mode = ScanMode::mixed;
    int probes = 24;
    bool with_profile = false;
    std::vector<double> p_grid = kDefaultPGrid;
};

// Instance `index` of a seeded scan; fully determined by (seed, index, dims, options).
ScanRecord scan_instance(std::uint64_t seed, std::uint64_t index, const std::vector<Index>& dims,
                         const ScanOptions& options);

struct ScanReport {
    std::vector<ScanRecord> records;
    int weak_violations = 0;
    int strong_violations_reversible = 0;
    int strong_violations_nonreversible = 0;
};

ScanReport conjecture_scan(int n_instances, const std::vector<Index>& dims, std::uint64_t seed,
                           const ScanOptions& options = {});

}  // namespace qmix
