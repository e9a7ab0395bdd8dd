#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmix/lp_space.hpp"
#include "qmix/operator_core.hpp"

namespace qmix {

class NotPrimitiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Family { generic, depolarizing, projection, davies, channel_lift, random_unitary };

std::string family_name(Family f);

struct GeneratorFlags {
    bool unital = false;
    bool reversible = false;
    bool primitive = false;
};

class Semigroup;
struct DaviesSpec;

// Liouvillian in the Heisenberg picture, L(f) = i[H,f] + sum_k L_k^dag f L_k - 1/2 {L_k^dag L_k, f}.
// Small dimensions carry dense superoperators; the depolarizing and projection families also
// act through closed forms so that they scale past the dense ceiling.
class Generator {
public:
    static constexpr Index kDenseCeiling = 32;

    static Generator from_superoperator(const Superoperator& heisenberg, Family family = Family::generic);

    Index dim() const { return dim_; }
    Family family() const { return family_; }
    const GeneratorFlags& flags() const { return flags_; }
    bool primitive() const { return flags_.primitive; }
    bool has_dense() const { return heis_.has_value(); }

    const Superoperator& heisenberg() const;
    const Superoperator& schrodinger() const;

    Matrix apply(const Matrix& f) const;
    Matrix apply_adjoint(const Matrix& rho) const;

    // Throws NotPrimitiveError when no unique full-rank fixed point exists.
    const WeightedSpace& stationary() const;

    const Matrix& hamiltonian() const { return hamiltonian_; }
    const std::vector<Matrix>& lindblad_ops() const { return ops_; }
    std::optional<int> kraus_rank() const { return kraus_rank_; }
    double rate() const { return rate_; }

    Semigroup evolve(double t) const;

    // Residual of L*(sigma) = 0, of Gamma o L = L* o Gamma and of L(1) = 0 (max-abs entries).
    double stationarity_residual() const;
    double detailed_balance_residual() const;
    double trace_preservation_residual() const;

private:
    friend Generator build_lindblad(const Matrix&, const std::vector<Matrix>&);
    friend Generator build_depolarizing(Index, double);
    friend Generator build_projection(const WeightedSpace&, double);
    friend Generator build_davies(const DaviesSpec&);
    friend Generator build_random_unitary(Index, int, std::uint64_t, bool, bool);
    friend Generator lift_channel(const std::vector<Matrix>&, bool);
    friend Generator hat_generator(const Generator&);
    friend class Semigroup;

    void classify();
    void classify_closed_form(const Matrix& sigma);

    Index dim_ = 0;
    Family family_ = Family::generic;
    GeneratorFlags flags_;
    std::optional<Superoperator> heis_, schr_;
    std::optional<WeightedSpace> stationary_;
    Matrix hamiltonian_;
    std::vector<Matrix> ops_;
    std::optional<int> kraus_rank_;
    double rate_ = 0.0;  // closed-form families only
    std::string primitivity_note_;
};

// T_t = exp(t L) with its Schrodinger-picture adjoint.
class Semigroup {
public:
    Semigroup(const Generator& g, double t);
    Matrix apply(const Matrix& f) const;
    Matrix apply_adjoint(const Matrix& rho) const;
    double time() const { return t_; }
    const Superoperator& heisenberg() const;

private:
    const Generator* g_;
    double t_;
    std::optional<Superoperator> dense_;
};

Generator build_lindblad(const Matrix& hamiltonian, const std::vector<Matrix>& ops);
Generator build_depolarizing(Index d, double gamma);
Generator build_projection(const WeightedSpace& sigma, double gamma);

enum class RateModel { flat_kms };

struct DaviesSpec {
    Matrix hamiltonian;
    std::vector<Matrix> couplings;
    double beta = 1.0;
    std::optional<double> bohr_tol;  // default 1e-9 * ||H||
    RateModel rate_model = RateModel::flat_kms;
    // Adds i[H, f]; the result then no longer satisfies the detailed-balance identity.
    bool hamiltonian_drift = false;
};

double flat_kms_rate(double omega, double beta);

struct DaviesComponent {
    std::size_t coupling;
    double omega;
    Matrix jump;  // S_k(omega)
};

std::vector<DaviesComponent> davies_components(const DaviesSpec& spec);
Matrix gibbs_state(const Matrix& hamiltonian, double beta);
Generator build_davies(const DaviesSpec& spec);

// L = T - id for T(f) = sum_k K_k^dag f K_k; lazy replaces T by (id + T)/2.
Generator lift_channel(const std::vector<Matrix>& kraus, bool lazy = false);

// D Haar unitaries with weight 1/D; `reversible` symmetrizes to {U_k, U_k^dag} with weight 1/2D.
std::vector<Matrix> random_unitary_kraus(Index d, int count, std::uint64_t seed, bool reversible = true);
Generator build_random_unitary(Index d, int count, std::uint64_t seed, bool reversible = true,
                               bool lazy = false);

Generator hat_generator(const Generator& g);
// (L + L_hat)/2, reversible with respect to the stationary state of g.
Generator symmetrized(const Generator& g);

// Smallest eigenvalue of the Choi matrix of exp(t L*) (non-negative iff completely positive).
double choi_min_eigenvalue(const Generator& g, double t);

}  // namespace qmix
