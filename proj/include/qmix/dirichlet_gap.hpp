#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "qmix/generators.hpp"

namespace qmix {

using LinearMap = std::function<Matrix(const Matrix&)>;

// Generic Dirichlet form -p/(2(p-1)) <I_{q,p}(f), action(f)>_sigma with its p = 1 and p = 2 closed forms.
double dirichlet_form(const WeightedSpace& space, const LinearMap& action, double p, const Matrix& f);

double dirichlet_p(const Generator& g, double p, const Matrix& f);
double dirichlet_hat_p(const Generator& g, double p, const Matrix& f);

// L_hat(f) = Gamma^{-1}(L*(Gamma(f))) evaluated without forming the superoperator.
Matrix apply_hat(const Generator& g, const Matrix& f);

enum class GapMethod { eigen_symmetrization, lanczos_symmetrization, variational_refine };
std::string gap_method_name(GapMethod m);

struct GapReport {
    double lambda = 0.0;
    Matrix witness;
    GapMethod method = GapMethod::eigen_symmetrization;
    double residual = 0.0;
    double worst_probe_ratio = 0.0;  // smallest E_2/Var over the validation probes
};

// Variational ratio E_2(g) / Var_sigma(g).
double gap_ratio(const Generator& g, const Matrix& witness);

GapReport spectral_gap(const Generator& g, int validation_probes = 200, std::uint64_t seed = 7);

}  // namespace qmix
