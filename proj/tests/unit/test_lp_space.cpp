#include <doctest.h>

#include <cmath>

#include "qmix/lp_space.hpp"
#include "qmix/random_ops.hpp"

using namespace qmix;

namespace {

WeightedSpace random_space(Index d, Rng& rng) { return WeightedSpace(random_density(d, rng, 0.02)); }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("weighted space validates sigma")
{
    Matrix half = Matrix::Identity(2, 2) * 0.4;
    CHECK_THROWS_AS(WeightedSpace{half}, std::invalid_argument);
    Matrix singular = Matrix::Zero(2, 2);
    singular(0, 0) = 1.0;
    CHECK_THROWS_AS(WeightedSpace{singular}, std::invalid_argument);
    Matrix nonherm = Matrix::Identity(2, 2) * 0.5;
    nonherm(0, 1) = 0.1;
    CHECK_THROWS(WeightedSpace{nonherm});
}

TEST_CASE("gamma powers")
{
    Rng rng(21);
    WeightedSpace space = random_space(3, rng);
    Matrix f = random_hermitian(3, rng);
    CHECK(max_abs(gamma_power(space, 0.0, f) - f) <= 1e-14);
    Matrix back = gamma_power(space, -0.7, gamma_power(space, 0.7, f));
    CHECK(max_abs(back - f) <= 1e-10);
    Matrix direct = space.sigma() * f * space.sigma();
    CHECK(max_abs(gamma_power(space, 2.0, f) - direct) <= 1e-12);

    WeightedSpace flat(Matrix::Identity(4, 4) / 4.0);
    Matrix g = random_hermitian(4, rng);
    CHECK(max_abs(gamma_power(flat, 1.0, g) - g / 4.0) <= 1e-14);
}

TEST_CASE("weighted norms: examples")
{
    Rng rng(22);
    WeightedSpace space = random_space(3, rng);
    for (double p : {1.0, 1.5, 2.0, 4.0})
        CHECK(lp_norm(space, p, Matrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-12));

    WeightedSpace flat(Matrix::Identity(2, 2) / 2.0);
    Matrix f = Matrix::Zero(2, 2);
    f(0, 0) = 2.0;
    CHECK(lp_norm(flat, 2.0, f) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(lp_norm(flat, 0.5, f), std::invalid_argument);
}

TEST_CASE("weighted norms: invariants")
{
    Rng rng(23);
    int failures = 0;
    for (int k = 0; k < 100; ++k) {
        Index d = 2 + k % 4;
        WeightedSpace space = random_space(d, rng);
        Matrix f = random_hermitian(d, rng, 1.5);
        Matrix g = random_hermitian(d, rng, 1.5);
        double prev = 0.0;
        for (double p : {1.0, 1.3, 2.0, 3.0, 5.0}) {
            double n = lp_norm(space, p, f);
            if (n < prev * (1.0 - 1e-12))
                ++failures;  // non-decreasing in p
            prev = n;
        }
        // Holder pairing
        for (double p : {1.5, 2.0, 3.0}) {
            double q = p / (p - 1.0);
            double lhs = std::abs(inner(space, f, g));
            if (lhs > lp_norm(space, p, f) * lp_norm(space, q, g) * (1.0 + 1e-12) + 1e-14)
                ++failures;
        }
        // homogeneity and triangle inequality
        if (rel(lp_norm(space, 2.5, -3.0 * f), 3.0 * lp_norm(space, 2.5, f)) > 1e-12)
            ++failures;
        if (lp_norm(space, 1.7, f + g) > lp_norm(space, 1.7, f) + lp_norm(space, 1.7, g) + 1e-12)
            ++failures;
        // unitary invariance when the unitary commutes with sigma
        const auto& e = space.spectrum();
        std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
        Matrix diag = Matrix::Zero(d, d);
        for (Index i = 0; i < d; ++i)
            diag(i, i) = std::polar(1.0, angle(rng));
        Matrix u = e.vectors * diag * e.vectors.adjoint();
        if (rel(lp_norm(space, 3.0, u * f * u.adjoint()), lp_norm(space, 3.0, f)) > 1e-10)
            ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("inner product and variance")
{
    Rng rng(24);
    WeightedSpace space = random_space(3, rng);
    Matrix one = Matrix::Identity(3, 3);
    CHECK(inner(space, one, one) == doctest::Approx(1.0));
    Matrix f = random_hermitian(3, rng);
    CHECK(inner(space, f, f) == doctest::Approx(std::pow(lp_norm(space, 2.0, f), 2)).epsilon(1e-12));
    CHECK(std::abs(variance(space, 2.5 * one)) <= 1e-14);
    CHECK(variance(space, f + 4.0 * one) == doctest::Approx(variance(space, f)).epsilon(1e-10));
    CHECK(variance(space, f) >= 0.0);

    WeightedSpace flat(Matrix::Identity(2, 2) / 2.0);
    Matrix z = Matrix::Zero(2, 2);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    CHECK(variance(flat, z) == doctest::Approx(1.0));
}

TEST_CASE("power operator")
{
    Rng rng(25);
    for (int k = 0; k < 30; ++k) {
        Index d = 2 + k % 3;
        WeightedSpace space = random_space(d, rng);
        Matrix f = random_positive(d, rng);
        CHECK(max_abs(power_operator(space, 2.7, 2.7, f) - f) <= 1e-9 * max_abs(f));

        double p = 1.0 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        double q = 1.0 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        // ||I_{p,q} f||_p^p = ||f||_q^q
        double lhs = std::pow(lp_norm(space, p, power_operator(space, p, q, f)), p);
        double rhs = std::pow(lp_norm(space, q, f), q);
        CHECK(rel(lhs, rhs) <= 1e-9);
        // homogeneity of degree q/p
        Matrix scaled = power_operator(space, p, q, 2.0 * f);
        CHECK(max_abs(scaled - std::pow(2.0, q / p) * power_operator(space, p, q, f)) <=
              1e-9 * max_abs(scaled));
        // composition I_{r,p} o I_{p,q} = I_{r,q}
        double r = 2.2;
        Matrix chain = power_operator(space, r, p, power_operator(space, p, q, f));
        CHECK(max_abs(chain - power_operator(space, r, q, f)) <= 1e-8 * max_abs(chain));
    }
    WeightedSpace flat(Matrix::Identity(3, 3) / 3.0);
    Matrix f = random_positive(3, rng);
    // sigma = 1/d: the weights cancel and I_{p,q}(f) = f^{q/p}
    Matrix expect = matrix_power(f, 1.5);
    CHECK(max_abs(power_operator(flat, 2.0, 3.0, f) - expect) <= 1e-10 * max_abs(expect));
}

TEST_CASE("entropy operator is the exponent derivative of the power operator")
{
    Rng rng(26);
    for (int k = 0; k < 10; ++k) {
        WeightedSpace space = random_space(3, rng);
        Matrix f = random_positive(3, rng);
        for (double p : {1.0, 1.5, 2.0, 3.0}) {
            const double h = 1e-5;
            // one-sided second-order stencil so that the exponent stays >= 1
            Matrix fd = -p * (-3.0 * power_operator(space, p, p, f) + 4.0 * power_operator(space, p + h, p, f) -
                              power_operator(space, p + 2.0 * h, p, f)) /
                        (2.0 * h);
            Matrix sp = op_relative_entropy(space, p, f);
            CHECK(max_abs(fd - sp) <= 1e-6 * (1.0 + max_abs(sp)));
        }
    }
    WeightedSpace space = random_space(2, rng);
    CHECK_THROWS_AS(op_relative_entropy(space, 2.0, -Matrix::Identity(2, 2)), std::domain_error);
}

TEST_CASE("relative entropies vanish on constants")
{
    Rng rng(27);
    WeightedSpace space = random_space(4, rng);
    for (double p : {1.0, 1.5, 2.0, 3.0})
        CHECK(std::abs(ent_p(space, p, 3.0 * Matrix::Identity(4, 4))) <= 1e-12);
}

TEST_CASE("relative entropy identities")
{
    Rng rng(28);
    for (int k = 0; k < 50; ++k) {
        Index d = 2 + k % 4;
        WeightedSpace space = random_space(d, rng);
        Matrix f = random_positive(d, rng, 1.2);
        CHECK(ent_p(space, 1.0, f) >= -1e-12);
        CHECK(ent_p(space, 2.0, f) >= -1e-12);
        CHECK(rel(ent2_closed(space, f), ent_p(space, 2.0, f)) <= 1e-9);
        CHECK(rel(ent_p(space, 2.0, power_operator(space, 2.0, 1.0, f)), 0.5 * ent_p(space, 1.0, f)) <= 1e-9);

        Matrix rho = random_density(d, rng);
        double dr = relative_entropy(rho, space.sigma());
        CHECK(rel(ent_p(space, 1.0, gamma_power(space, -1.0, rho)), dr) <= 1e-9);
        Matrix root = matrix_power(rho, 0.5);
        CHECK(rel(ent_p(space, 2.0, gamma_power(space, -0.5, root)), 0.5 * dr) <= 1e-9);

        for (double p : {1.5, 2.0, 3.0, 4.0}) {
            Matrix g = power_operator(space, 2.0, p, f);
            double lhs = entropy_pairing(space, p, f);
            double rhs = (2.0 / p) * inner(space, g, op_relative_entropy(space, 2.0, g));
            CHECK(rel(lhs, rhs) <= 1e-9);
        }
    }
}

TEST_CASE("entropy near p = 1 is continuous")
{
    Rng rng(29);
    WeightedSpace space = random_space(3, rng);
    Matrix f = random_positive(3, rng);
    double e1 = ent_p(space, 1.0, f);
    CHECK(std::abs(ent_p(space, 1.0 + 1e-4, f) - e1) <= 1e-3 * (1.0 + e1));
    CHECK(std::abs(ent_p(space, 1.0 + 1e-7, f) - e1) <= 1e-6 * (1.0 + e1));
}

TEST_CASE("entropy of commuting operators reduces to the classical formula")
{
    RealVector w(3);
    w << 0.5, 0.3, 0.2;
    RealVector x(3);
    x << 2.0, 0.5, 1.1;
    Matrix sigma = Matrix::Zero(3, 3), f = Matrix::Zero(3, 3);
    for (Index i = 0; i < 3; ++i) {
        sigma(i, i) = w(i);
        f(i, i) = x(i);
    }
    WeightedSpace space(sigma);
    double mean = (w.array() * x.array()).sum();
    double classical = (w.array() * x.array() * x.array().log()).sum() - mean * std::log(mean);
    CHECK(ent_p(space, 1.0, f) == doctest::Approx(classical).epsilon(1e-12));
}

TEST_CASE("norm derivative along an exponent path")
{
    Rng rng(30);
    WeightedSpace space = random_space(3, rng);
    Matrix f = random_positive(3, rng);
    ExponentPath path{[](double t) { return 1.0 + std::exp(2.0 * t); },
                      [](double t) { return 2.0 * std::exp(2.0 * t); }};
    auto nd = norm_derivative_check(space, f, path, 0.3);
    CHECK(std::abs(nd.lhs - nd.rhs) <= 1e-6 * (1.0 + std::abs(nd.rhs)));
    ExponentPath flat{[](double) { return 2.0; }, [](double) { return 0.0; }};
    nd = norm_derivative_check(space, f, flat, 0.0);
    CHECK(std::abs(nd.lhs) <= 1e-8);
    CHECK(nd.rhs == 0.0);
}

TEST_CASE("duality: the power operator is the norming functional")
{
    Rng rng(31);
    WeightedSpace space = random_space(3, rng);
    Matrix f = random_positive(3, rng);
    for (double p : {1.5, 2.0, 3.0}) {
        double q = p / (p - 1.0);
        double norm = lp_norm(space, p, f);
        Matrix witness = power_operator(space, q, p, f) / std::pow(norm, p / q);
        CHECK(lp_norm(space, q, witness) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(inner(space, witness, f) == doctest::Approx(norm).epsilon(1e-10));
        double best = 0.0;
        for (int k = 0; k < 200; ++k) {
            Matrix g = random_hermitian(3, rng);
            best = std::max(best, std::abs(inner(space, g, f)) / lp_norm(space, q, g));
        }
        CHECK(best <= norm * (1.0 + 1e-12));
    }
}

TEST_CASE("relative entropy of states")
{
    Rng rng(32);
    Matrix sigma = random_density(3, rng);
    CHECK(std::abs(relative_entropy(sigma, sigma)) <= 1e-12);
    Matrix rho = random_density(3, rng);
    CHECK(relative_entropy(rho, sigma) > 0.0);
    Matrix pure = random_pure_state(3, rng);
    CHECK(std::isfinite(relative_entropy(pure, sigma)));
}
