// Seeded samplers for unitaries, states and catalogs used by property
// commands and tests.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "contextua/contexts.hpp"

namespace contextua {

using Rng = std::mt19937_64;

ComplexMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng);

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
ComplexMatrix random_unitary(std::size_t dim, Rng& rng);

/// Self-adjoint matrix with i.i.d. Gaussian entries.
ComplexMatrix random_hermitian(std::size_t dim, Rng& rng);

/// Full-rank density matrix G G^dagger / tr(G G^dagger).
DensityMatrix random_density(std::size_t dim, Rng& rng);

/// Random self-adjoint matrix rescaled to unit trace (generically indefinite).
ComplexMatrix random_hermitian_trace_one(std::size_t dim, Rng& rng);

/// Maximal context given by the columns of a unitary.
Context basis_context(const ComplexMatrix& unitary);

/// count bases from independent Haar unitaries; count >= dim + 1 is
/// informationally complete with probability one.
std::vector<Context> random_basis_catalog(std::size_t dim, std::size_t count, Rng& rng);

/// The computational basis plus the Fourier-type bases of a prime dimension
/// (dim + 1 mutually unbiased bases).
std::vector<Context> mutually_unbiased_bases(std::size_t prime_dim);

}  // namespace contextua
