#include <doctest.h>

#include <cmath>

#include "qmix/dirichlet_gap.hpp"
#include "qmix/random_ops.hpp"

using namespace qmix;

namespace {

// Dense route: eigenvalues of Gamma^{1/2} o (L + L_hat)/2 o Gamma^{-1/2}, which is Hermitian on vec space.
double dense_symmetrized_gap(const Generator& g)
{
    const WeightedSpace& space = g.stationary();
    Superoperator q = Superoperator::sandwich({{space.quarter(), space.quarter()}});
    Superoperator qi = Superoperator::sandwich({{space.inv_quarter(), space.inv_quarter()}});
    Generator sym = symmetrized(g);
    Matrix k = (q * sym.heisenberg() * qi).matrix();
    auto ev = eig_hermitian(hermitian_part(k)).values;
    // ev is ascending; the top eigenvalue is 0 for the identity
    return -ev(ev.size() - 2);
}

}  // namespace

TEST_CASE("Dirichlet forms vanish on constants")
{
    Rng rng(60);
    Generator g = random_lindblad(3, 2, rng);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        CHECK(std::abs(dirichlet_p(g, p, Matrix::Identity(3, 3))) <= 1e-12);
        CHECK(std::abs(dirichlet_hat_p(g, p, 2.0 * Matrix::Identity(3, 3))) <= 1e-12);
    }
}

TEST_CASE("depolarizing Dirichlet form is gamma times the variance")
{
    Rng rng(61);
    for (int k = 0; k < 50; ++k) {
        Index d = 2 + k % 3;
        double gamma = 0.5 + k * 0.05;
        Generator g = build_depolarizing(d, gamma);
        Matrix f = random_hermitian(d, rng);
        double expect = gamma * variance(g.stationary(), f);
        CHECK(std::abs(dirichlet_p(g, 2.0, f) - expect) <= 1e-10 * (1.0 + expect));
    }
}

TEST_CASE("Dirichlet forms: invariants on random generators")
{
    int failures = 0;
    for (std::uint64_t i = 0; i < 30; ++i) {
        Rng rng = substream(62, i);
        Generator g = random_lindblad(2 + i % 3, 2, rng);
        Index d = g.dim();
        Matrix f = random_positive(d, rng);
        Matrix h = random_hermitian(d, rng);
        for (double p : {1.0, 1.5, 2.0, 3.0}) {
            if (dirichlet_p(g, p, f) < -1e-10)
                ++failures;
            if (dirichlet_hat_p(g, p, f) < -1e-10)
                ++failures;
        }
        // E_2 and its hat agree on every primitive generator
        if (std::abs(dirichlet_p(g, 2.0, h) - dirichlet_hat_p(g, 2.0, h)) > 1e-10 * (1.0 + std::abs(dirichlet_p(g, 2.0, h))))
            ++failures;
        // E_2 is shift invariant
        double e2 = dirichlet_p(g, 2.0, h);
        if (std::abs(dirichlet_p(g, 2.0, h + 3.0 * Matrix::Identity(d, d)) - e2) > 1e-9 * (1.0 + std::abs(e2)))
            ++failures;
        // p -> 1 continuity
        double e1 = dirichlet_p(g, 1.0, f);
        if (std::abs(dirichlet_p(g, 1.0 + 1e-4, f) - e1) > 1e-3 * (1.0 + std::abs(e1)))
            ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("reversible generators have equal hat forms")
{
    for (std::uint64_t i = 0; i < 12; ++i) {
        Rng rng = substream(63, i);
        Generator g = random_reversible(3, i, rng);
        Matrix f = random_positive(3, rng);
        for (double p : {1.0, 2.0, 3.0}) {
            double a = dirichlet_p(g, p, f), b = dirichlet_hat_p(g, p, f);
            CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)));
        }
    }
}

TEST_CASE("unital non-reversible forms are non-negative")
{
    Generator g = build_random_unitary(3, 2, 3, false);
    Rng rng(64);
    for (int k = 0; k < 20; ++k) {
        Matrix f = random_positive(3, rng);
        CHECK(dirichlet_p(g, 1.0, f) >= -1e-12);
        CHECK(dirichlet_hat_p(g, 1.0, f) >= -1e-12);
    }
}

TEST_CASE("Dirichlet form input validation")
{
    Generator g = build_depolarizing(2, 1.0);
    Matrix neg = Matrix::Identity(2, 2);
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(dirichlet_p(g, 1.0, neg), std::domain_error);
    CHECK_THROWS_AS(dirichlet_p(g, 0.5, Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("spectral gap of closed-form families")
{
    for (Index d = 2; d <= 8; ++d) {
        auto r = spectral_gap(build_depolarizing(d, 1.0));
        CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.worst_probe_ratio >= r.lambda * (1.0 - 1e-8));
    }
    auto big = spectral_gap(build_depolarizing(40, 2.0), 20);
    CHECK(big.method == GapMethod::lanczos_symmetrization);
    CHECK(big.lambda == doctest::Approx(2.0).epsilon(1e-8));

    Rng rng(65);
    Generator proj = build_projection(WeightedSpace(random_density(4, rng)), 0.7);
    CHECK(spectral_gap(proj).lambda == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("spectral gap matches an independent dense route")
{
    for (std::uint64_t i = 0; i < 10; ++i) {
        Rng rng = substream(66, i);
        Generator g = i % 2 ? random_lindblad(3, 2, rng) : random_reversible(3, i, rng);
        auto r = spectral_gap(g);
        double ref = dense_symmetrized_gap(g);
        CHECK(r.lambda == doctest::Approx(ref).epsilon(1e-8));
        CHECK(gap_ratio(g, r.witness) == doctest::Approx(r.lambda).epsilon(1e-6));
        CHECK(r.worst_probe_ratio >= r.lambda * (1.0 - 1e-8));

        // Var <= E_2 / lambda on random probes
        int bad = 0;
        for (int k = 0; k < 200; ++k) {
            Matrix f = random_hermitian(3, rng);
            if (r.lambda * variance(g.stationary(), f) > dirichlet_p(g, 2.0, f) * (1.0 + 1e-8) + 1e-12)
                ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("qubit Davies gap")
{
    DaviesSpec spec;
    spec.hamiltonian = Matrix::Zero(2, 2);
    spec.hamiltonian(0, 0) = -0.5;
    spec.hamiltonian(1, 1) = 0.5;
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    spec.couplings = {x};
    spec.beta = 1.0;
    Generator g = build_davies(spec);
    CHECK(spectral_gap(g).lambda == doctest::Approx(dense_symmetrized_gap(g)).epsilon(1e-10));
}
