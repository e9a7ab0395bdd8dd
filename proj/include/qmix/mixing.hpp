#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmix/dirichlet_gap.hpp"
#include "qmix/generators.hpp"

namespace qmix {

struct Distances {
    double trace = 0.0;    // ||rho - sigma||_tr
    double chi2 = 0.0;
    double rel_ent = 0.0;  // D(rho || sigma)
};

double trace_norm(const Matrix& a);
double chi2_divergence(const Matrix& rho, const WeightedSpace& space);
Distances distances(const Matrix& rho, const WeightedSpace& space);

// Validates a density matrix: Hermitian, unit trace (1e-10), spectrum above -1e-10.
void require_state(const Matrix& rho, const char* what = "rho");

// rho_t = exp(t L*)(rho0).
Matrix evolve(const Generator& g, const Matrix& rho0, double t);

// Eigenprojectors of sigma followed by `haar_count` Haar-random pure states.
std::vector<Matrix> initial_state_family(const WeightedSpace& space, int haar_count, std::uint64_t seed);

struct BoundConstants {
    double lambda = 0.0;
    std::optional<double> alpha1;
    std::optional<double> alpha2;
    bool strongly_regular = false;  // alpha2 rate is alpha2 instead of alpha2 / 2
};

struct MixingCurve {
    std::vector<double> times;
    std::vector<double> trace_dist;  // worst case over the sampled initial states
    std::vector<double> chi2;
    std::vector<double> rel_ent;
    std::vector<double> chi2_bound;
    std::vector<double> ls_bound_a1;  // empty when alpha1 is not supplied
    std::vector<double> ls_bound_a2;  // empty when alpha2 is not supplied
    int initial_states = 0;

    // Smallest of min(bounds) - trace_dist over the grid.
    double domination_margin() const;
};

MixingCurve bound_curves(const Generator& g, const BoundConstants& c, const std::vector<double>& t_grid,
                         int haar_count = 50, std::uint64_t seed = 5);

// Worst sampled trace distance at time t.
double worst_trace_distance(const Generator& g, const std::vector<Matrix>& states, double t);

struct MixingTime {
    double tau = 0.0;
    int states_sampled = 0;
    std::string caveat;
};

MixingTime mixing_time(const Generator& g, double epsilon, int haar_count = 50, std::uint64_t seed = 5);

struct CrossingTimes {
    double chi2 = 0.0;
    std::optional<double> ls_a1;
    std::optional<double> ls_a2;
};

// First t where each bound curve reaches epsilon.
CrossingTimes bound_crossing_times(const BoundConstants& c, double sigma_min, double epsilon);

struct DecayMargins {
    double variance = 0.0;       // min over grid of e^{-2 lambda t} Var(f) - Var(f_t)
    double entropy = 0.0;        // min over grid of e^{-2 alpha1 t} Ent1(f) - Ent1(f_t)
    double derivative_residual = 0.0;  // max |d/dt Ent1(f_t) + 2 E_hat_1(f_t)|, relative
    bool holds = true;
};

// f0 is a relative density Gamma^{-1}(rho0); it evolves under the hat generator.
DecayMargins entropy_decay_check(const Generator& g, double lambda, double alpha1, const Matrix& f0,
                                 const std::vector<double>& t_grid);

struct EntropyProduction {
    double production = 0.0;       // 2 E_hat_1(Gamma^{-1} rho)
    double entropy_rate = 0.0;     // -tr[L*(rho) log rho]
    double entropy_flux = 0.0;     // tr[L*(rho) log sigma]
    double balance_residual = 0.0; // |production - entropy_rate - entropy_flux|
};

EntropyProduction entropy_production(const Generator& g, const Matrix& rho);

struct PQNorm {
    double value = 0.0;  // lower bound on the true norm
    Matrix witness;
    bool lower_bound = true;
};

// max ||map(f)||_{q,sigma} / ||f||_{p,sigma} over positive f; starts include f = 1.
PQNorm pq_norm(const LinearMap& map, const WeightedSpace& space, double p, double q, int starts = 8,
               std::uint64_t seed = 3);
PQNorm pq_norm(const Generator& g, double p, double q, double t, int starts = 8, std::uint64_t seed = 3);

// ||T_t - T_inf||_{(2,sigma) -> (2,sigma)}, exact through a singular value decomposition.
double two_to_two_distance(const Generator& g, double t);

struct DiscreteContinuous {
    double chi2_discrete = 0.0;
    double chi2_continuous = 0.0;
    bool holds = true;
};

// g must be the lift T - id of a lazy reversible channel.
DiscreteContinuous discrete_vs_continuous(const Generator& g, int n, const Matrix& rho0);
bool is_lazy(const Generator& g);

// t = max(0, log log(1/sigma_min) / (2 alpha2)) + c / lambda.
double chi2_gap_bound_time(double alpha2, double lambda, double sigma_min, double c);

struct HypercontractivityCheck {
    double worst_ratio = 0.0;  // max ||T_t f||_{p(t)} / ||f||_2
    int probes = 0;
};

HypercontractivityCheck hypercontractivity_check(const Generator& g, double alpha2, const std::vector<double>& times,
                                                 int probes = 20, std::uint64_t seed = 17);

struct ThermalWeightBound {
    double inverse_sigma_min = 0.0;
    double literal_bound = 0.0;  // d exp(beta ||H||)
    double shifted_bound = 0.0;  // d exp(beta (E_max - E_min))
};

ThermalWeightBound thermal_weight_bound(const Matrix& hamiltonian, double beta);

}  // namespace qmix
