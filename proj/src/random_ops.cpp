#include "qmix/random_ops.hpp"

#include <cmath>

namespace qmix {

Rng substream(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
    return Rng(seq);
}

Matrix ginibre(Index d, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) {
            double re = normal(rng);
            double im = normal(rng);
            g(i, j) = cplx(re, im) / std::sqrt(2.0);
        }
    return g;
}

Matrix haar_unitary(Index d, Rng& rng)
{
    Eigen::HouseholderQR<Matrix> qr(ginibre(d, rng));
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < d; ++i) {
        double mag = std::abs(r(i, i));
        cplx phase = mag > 0.0 ? r(i, i) / mag : cplx(1.0, 0.0);
        q.col(i) *= phase;
    }
    return q;
}

Matrix random_hermitian(Index d, Rng& rng, double scale)
{
    Matrix g = ginibre(d, rng);
    return scale * hermitian_part(g);
}

Matrix random_positive(Index d, Rng& rng, double scale)
{
    return matrix_function(random_hermitian(d, rng, scale), [](double x) { return std::exp(x); });
}

Matrix random_density(Index d, Rng& rng, double floor)
{
    Matrix g = ginibre(d, rng);
    Matrix w = g * g.adjoint();
    w /= w.trace().real();
    double mix = std::min(1.0, floor * double(d));
    Matrix rho = (1.0 - mix) * w + mix * Matrix::Identity(d, d) / double(d);
    return hermitian_part(rho);
}

Matrix random_pure_state(Index d, Rng& rng)
{
    Vector psi = haar_unitary(d, rng).col(0);
    return psi * psi.adjoint();
}

Generator random_lindblad(Index d, int n_ops, Rng& rng)
{
    Matrix h = random_hermitian(d, rng);
    std::vector<Matrix> ops;
    for (int k = 0; k < n_ops; ++k)
        ops.push_back(ginibre(d, rng) / std::sqrt(double(d)));
    return build_lindblad(h, ops);
}

Generator random_reversible(Index d, ReversibleKind kind, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (kind) {
    case ReversibleKind::davies: {
        DaviesSpec spec;
        spec.hamiltonian = random_hermitian(d, rng);
        spec.couplings = {random_hermitian(d, rng)};
        if (unit(rng) < 0.5)
            spec.couplings.push_back(random_hermitian(d, rng));
        spec.beta = 2.0 * unit(rng);
        return build_davies(spec);
    }
    case ReversibleKind::projection:
        return build_projection(WeightedSpace(random_density(d, rng, 0.02)), 0.5 + 1.5 * unit(rng));
    case ReversibleKind::unital_channel: {
        std::uniform_int_distribution<std::uint64_t> seeds;
        int count = 2 + static_cast<int>(unit(rng) * 2.0);
        return build_random_unitary(d, count, seeds(rng), true, unit(rng) < 0.5);
    }
    case ReversibleKind::symmetrized_generic:
        return symmetrized(random_lindblad(d, 2, rng));
    }
    throw std::invalid_argument("unknown reversible construction");
}

Generator random_reversible(Index d, std::uint64_t index, Rng& rng)
{
    return random_reversible(d, kReversibleKinds[index % 4], rng);
}

Generator embedded_classical(const Eigen::MatrixXd& rates)
{
    const Index n = rates.rows();
    if (rates.cols() != n)
        throw std::invalid_argument("rate matrix must be square");
    std::vector<Matrix> ops;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            if (i == j || rates(i, j) == 0.0)
                continue;
            if (rates(i, j) < 0.0)
                throw std::invalid_argument("transition rates must be non-negative");
            Matrix jump = Matrix::Zero(n, n);
            jump(j, i) = std::sqrt(rates(i, j));
            ops.push_back(jump);
        }
    return build_lindblad(Matrix::Zero(n, n), ops);
}

}  // namespace qmix
