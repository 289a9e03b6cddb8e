#include "q2ma/hamiltonian.hpp"

#include <cmath>
#include <random>

namespace q2ma {

namespace {

void check_qubits(std::size_t n) {
    if (n < 1 || n > k_max_qubits)
        throw SizeOutOfRange("qubit count " + std::to_string(n) + " outside [1, " +
                             std::to_string(k_max_qubits) + "]");
}

Eigen::Index dim_of(std::size_t n) { return Eigen::Index(1) << n; }

// spin value +-1 of qubit `q` in basis index x (qubit 0 = most significant bit)
int spin(Eigen::Index x, std::size_t n, std::size_t q) {
    return ((x >> (n - 1 - q)) & 1) ? -1 : 1;
}

void finalize(Hamiltonian& h) {
    double defect = hermiticity_defect(h.matrix);
    if (defect > tol().hermiticity)
        throw NonHermitianInput(h.label + ": Hermiticity defect " + std::to_string(defect));
}

}  // namespace

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix embed_single_qubit(const Matrix& op, std::size_t n, std::size_t target) {
    check_qubits(n);
    if (target >= n) throw DimensionMismatch("target qubit out of range");
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t q = 0; q < n; ++q)
        out = tensor_product(out, q == target ? op : Matrix(Matrix::Identity(2, 2)));
    return out;
}

Hamiltonian build_ising(std::size_t n, double coupling, bool periodic) {
    check_qubits(n);
    const Eigen::Index dim = dim_of(n);
    RealVector diag = RealVector::Zero(dim);
    for (Eigen::Index x = 0; x < dim; ++x) {
        double e = 0;
        for (std::size_t q = 0; q + 1 < n; ++q) e += spin(x, n, q) * spin(x, n, q + 1);
        if (periodic && n > 2) e += spin(x, n, n - 1) * spin(x, n, 0);
        diag[x] = coupling * e;
    }
    Hamiltonian h;
    h.n = n;
    h.matrix = diag.cast<Complex>().asDiagonal();
    h.coupling_scale = coupling;
    h.label = "ising-n" + std::to_string(n) + (periodic ? "-periodic" : "-open");
    finalize(h);
    return h;
}

Hamiltonian build_transverse_ising(std::size_t n, double coupling, double field) {
    check_qubits(n);
    const Eigen::Index dim = dim_of(n);
    Matrix m = Matrix::Zero(dim, dim);
    for (Eigen::Index x = 0; x < dim; ++x) {
        double e = 0;
        for (std::size_t q = 0; q + 1 < n; ++q) e += spin(x, n, q) * spin(x, n, q + 1);
        m(x, x) = coupling * e;
    }
    // X on qubit q flips bit (n-1-q) of the basis index
    for (Eigen::Index x = 0; x < dim; ++x)
        for (std::size_t q = 0; q < n; ++q) m(x ^ (Eigen::Index(1) << (n - 1 - q)), x) += field;
    Hamiltonian h;
    h.n = n;
    h.matrix = std::move(m);
    h.coupling_scale = coupling;
    h.label = "tfim-n" + std::to_string(n);
    finalize(h);
    return h;
}

Hamiltonian build_random_hermitian(std::size_t n, std::uint64_t seed, bool two_local,
                                   double coupling) {
    check_qubits(n);
    const Eigen::Index dim = dim_of(n);
    std::mt19937_64 rng(seed);
    auto uniform_pm = [&rng, coupling]() {
        return coupling * (2.0 * uniform_double(rng) - 1.0);
    };

    Hamiltonian h;
    h.n = n;
    h.coupling_scale = coupling;
    if (two_local) {
        Matrix m = Matrix::Zero(dim, dim);
        const Matrix paulis[3] = {pauli_x(), pauli_y(), pauli_z()};
        // every 1-qubit term, in a fixed (qubit, pauli) order
        for (std::size_t q = 0; q < n; ++q)
            for (int p = 0; p < 3; ++p) m += uniform_pm() * embed_single_qubit(paulis[p], n, q);
        // every 2-qubit term, in a fixed (pair, pauli, pauli) order
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                for (int p = 0; p < 3; ++p)
                    for (int r = 0; r < 3; ++r) {
                        Matrix term = embed_single_qubit(paulis[p], n, a) *
                                      embed_single_qubit(paulis[r], n, b);
                        m += uniform_pm() * term;
                    }
        h.matrix = std::move(m);
        h.label = "random2local-n" + std::to_string(n) + "-s" + std::to_string(seed);
    } else {
        Matrix g(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j)
                g(i, j) = Complex(2.0 * uniform_double(rng) - 1.0,
                                  2.0 * uniform_double(rng) - 1.0);
        h.matrix = coupling * 0.5 * (g + Matrix(g.adjoint()));
        h.label = "randomdense-n" + std::to_string(n) + "-s" + std::to_string(seed);
    }
    finalize(h);
    return h;
}

Hamiltonian build_diagonal(const std::vector<double>& energies) {
    std::size_t n = 0;
    while ((std::size_t(1) << n) < energies.size()) ++n;
    if (energies.size() < 2 || (std::size_t(1) << n) != energies.size())
        throw SizeOutOfRange("diagonal model needs a power-of-two energy list");
    check_qubits(n);
    RealVector diag(static_cast<Eigen::Index>(energies.size()));
    for (std::size_t i = 0; i < energies.size(); ++i) diag[static_cast<Eigen::Index>(i)] = energies[i];
    Hamiltonian h;
    h.n = n;
    h.matrix = diag.cast<Complex>().asDiagonal();
    h.coupling_scale = 1.0;
    h.label = "diag-n" + std::to_string(n);
    finalize(h);
    return h;
}

Hamiltonian time_reversal_conjugate(const Hamiltonian& h) {
    Hamiltonian out = h;
    out.matrix = h.matrix.conjugate();
    finalize(out);
    return out;
}

NormalizedSpectrum normalize_spectrum(const RealVector& energies, double margin) {
    if (energies.size() < 1) throw DimensionMismatch("empty spectrum");
    if (!(margin > 0.0 && margin < 0.5))
        throw std::invalid_argument("margin must lie in (0, 0.5)");
    NormalizedSpectrum ns;
    ns.raw_min = energies.minCoeff();
    ns.raw_max = energies.maxCoeff();
    ns.margin = margin;
    const double span = ns.raw_max - ns.raw_min;
    if (span < 1e-12) {
        ns.degenerate = true;
        return ns;
    }
    // E -> (E - E_min + margin*span) / (span * (1 + 2*margin))
    ns.scale = 1.0 / (span * (1.0 + 2.0 * margin));
    ns.offset = (margin * span - ns.raw_min) * ns.scale;
    return ns;
}

NormalizedSpectrum normalize_spectrum(const Hamiltonian& h, double margin) {
    return normalize_spectrum(hermitian_eigendecomposition(h.matrix).values, margin);
}

}  // namespace q2ma
