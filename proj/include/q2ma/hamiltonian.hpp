#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "q2ma/numerics.hpp"

namespace q2ma {

inline constexpr std::size_t k_max_qubits = 5;

struct Hamiltonian {
    std::size_t n = 0;           // qubit count, 1..5
    Matrix matrix;               // 2^n x 2^n, Hermitian
    double coupling_scale = 1;   // J, the natural energy unit of the instance
    std::string label;
};

// ----- builders -----

// J * sum_<i,i+1> Z_i Z_{i+1}; periodic adds the wrap bond for n > 2.
Hamiltonian build_ising(std::size_t n, double coupling, bool periodic);

// J * sum Z_i Z_{i+1} + h * sum X_i on an open chain.
Hamiltonian build_transverse_ising(std::size_t n, double coupling, double field);

// Seed-deterministic random Hermitian. two_local: all 1- and 2-qubit Pauli
// terms with iid coefficients uniform in [-J, J] (complex Hermitian in
// general); otherwise a dense GUE-style matrix scaled by J.
Hamiltonian build_random_hermitian(std::size_t n, std::uint64_t seed, bool two_local,
                                   double coupling = 1.0);

// Diagonal Hamiltonian from an explicit energy list (power-of-two length).
Hamiltonian build_diagonal(const std::vector<double>& energies);

// Entrywise complex conjugate; same spectrum, conjugated eigenvectors.
Hamiltonian time_reversal_conjugate(const Hamiltonian& h);

// ----- spectrum normalization -----

// Order-preserving affine map taking the spectrum into (0, 1) with the given
// relative margin on both sides; a spectrum of zero span maps to 0.5.
struct NormalizedSpectrum {
    double raw_min = 0;
    double raw_max = 0;
    double margin = 0;
    bool degenerate = false;  // span below 1e-12: everything maps to 0.5
    double scale = 0;
    double offset = 0;

    double map(double energy) const { return degenerate ? 0.5 : scale * energy + offset; }
};

NormalizedSpectrum normalize_spectrum(const RealVector& energies, double margin = 0.1);
NormalizedSpectrum normalize_spectrum(const Hamiltonian& h, double margin = 0.1);

// ----- single-qubit operators (building blocks, exposed for tests) -----

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

// op acting on qubit `target` of an n-qubit register; qubit 0 is the most
// significant bit of the basis index.
Matrix embed_single_qubit(const Matrix& op, std::size_t n, std::size_t target);

}  // namespace q2ma
