#pragma once

#include <cstdint>
#include <random>

#include "qmix/generators.hpp"
#include "qmix/operator_core.hpp"

namespace qmix {

using Rng = std::mt19937_64;

// Derives an independent stream for item `index` of a seeded batch.
Rng substream(std::uint64_t seed, std::uint64_t index);

Matrix ginibre(Index d, Rng& rng);
Matrix haar_unitary(Index d, Rng& rng);
Matrix random_hermitian(Index d, Rng& rng, double scale = 1.0);
// exp(scale * H) for Gaussian Hermitian H.
Matrix random_positive(Index d, Rng& rng, double scale = 1.0);
// Full-rank density matrix; the smallest eigenvalue is pushed above `floor`.
Matrix random_density(Index d, Rng& rng, double floor = 1e-3);
Matrix random_pure_state(Index d, Rng& rng);

// Generic Lindblad generator: Gaussian Hamiltonian and `n_ops` Ginibre jump operators.
Generator random_lindblad(Index d, int n_ops, Rng& rng);

enum class ReversibleKind { davies, projection, unital_channel, symmetrized_generic };
inline constexpr ReversibleKind kReversibleKinds[] = {ReversibleKind::davies, ReversibleKind::projection,
                                                     ReversibleKind::unital_channel,
                                                     ReversibleKind::symmetrized_generic};

Generator random_reversible(Index d, ReversibleKind kind, Rng& rng);
// Cycles through the reversible constructions with `index`.
Generator random_reversible(Index d, std::uint64_t index, Rng& rng);

// Classical Markov generator with rates q(i -> j) embedded through jumps sqrt(q)|j><i|.
Generator embedded_classical(const Eigen::MatrixXd& rates);

}  // namespace qmix
