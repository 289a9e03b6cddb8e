#pragma once

#include <string>
#include <vector>

#include "q2ma/hamiltonian.hpp"
#include "q2ma/numerics.hpp"

namespace q2ma {

// Eigensystem of H together with the conjugate eigensystem of H~ = conj(H).
// Column i of `vectors` solves H v = E_i v; conj_vectors.col(i) is its
// entrywise conjugate and solves H~ v = E_i v at the same energy, so the two
// bases stay paired even through degeneracies.
struct EigenSystem {
    Hamiltonian source;
    std::size_t n = 0;
    Eigen::Index N = 0;      // 2^n
    RealVector energies;     // ascending
    Matrix vectors;          // columns phi_i (deterministic basis)
    Matrix conj_vectors;     // columns conj(phi_i)
};

EigenSystem build_eigensystem(const Hamiltonian& h);

// (1/sqrt N) sum_x |x>|x>, which equals (1/sqrt N) sum_i |phi_i>|conj phi_i>
// by completeness; both forms are compared at build time.
Vector infinite_temperature_state(const EigenSystem& es);

// ----- kicks -----

enum class KickKind { single_unitary, uniform_family };

// Kick acting on the second register, symmetric in the computational basis.
// amplitudes[t](k, i) = <phi_k| K_t |conj phi_i>; transition_weight(i, k) is
// the average of |amplitudes[t](k, i)|^2 over t and is a symmetric stochastic
// table (rows sum to 1).
struct KickModel {
    KickKind kind = KickKind::single_unitary;
    std::vector<Matrix> operators;
    std::vector<Matrix> amplitudes;
    RealMatrix transition_weight;
    std::string label;
};

// One flip operator per spin, weights averaged uniformly.
KickModel build_uniform_flip_kick(const EigenSystem& es);

// One Hadamard reflection (X + Z)/sqrt(2) per spin, weights averaged
// uniformly. Unlike plain flips this family commutes with no product of
// Pauli X, so it connects chains on Hamiltonians with a global flip symmetry.
KickModel build_uniform_hadamard_kick(const EigenSystem& es);

// Single explicit unitary (must be symmetric: K = K^T).
KickModel build_single_kick(const EigenSystem& es, const Matrix& k, const std::string& label);

// Convenience single-unitary kicks.
KickModel build_flip_kick(const EigenSystem& es, std::size_t spin);
KickModel build_identity_kick(const EigenSystem& es);

}  // namespace q2ma
