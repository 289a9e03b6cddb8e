#include "q2ma/spectral.hpp"

#include <cmath>

namespace q2ma {

EigenSystem build_eigensystem(const Hamiltonian& h) {
    EigenSystem es;
    es.source = h;
    es.n = h.n;
    es.N = h.matrix.rows();
    EigenDecomposition ed = hermitian_eigendecomposition(h.matrix);
    es.energies = std::move(ed.values);
    es.vectors = std::move(ed.vectors);
    es.conj_vectors = es.vectors.conjugate();

    // conjugate columns solve the conjugate problem at the same energies
    Matrix conj_h = h.matrix.conjugate();
    double scale = std::max(1.0, es.energies.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < es.N; ++i) {
        double residual =
            (conj_h * es.conj_vectors.col(i) - es.energies[i] * es.conj_vectors.col(i)).norm();
        if (residual > tol().eigen_residual * scale)
            throw Error("conjugate eigenpair residual " + std::to_string(residual));
    }
    return es;
}

Vector infinite_temperature_state(const EigenSystem& es) {
    const Eigen::Index N = es.N;
    const double amp = 1.0 / std::sqrt(static_cast<double>(N));
    Vector diagonal_form = Vector::Zero(N * N);
    for (Eigen::Index x = 0; x < N; ++x) diagonal_form[x * N + x] = amp;

    Vector paired_form = Vector::Zero(N * N);
    for (Eigen::Index i = 0; i < N; ++i)
        paired_form += amp * tensor_product(Vector(es.vectors.col(i)),
                                            Vector(es.conj_vectors.col(i)));

    double deviation = (diagonal_form - paired_form).cwiseAbs().maxCoeff();
    if (deviation > tol().pairing)
        throw Error("paired completeness identity deviates by " + std::to_string(deviation));
    return diagonal_form;
}

namespace {

void check_kick_operator(const Matrix& k, bool expect_hermitian, const std::string& label) {
    if (k.rows() != k.cols()) throw DimensionMismatch(label + ": kick must be square");
    double u = unitarity_defect(k);
    if (u > tol().kick_unitarity)
        throw Error(label + ": kick unitarity defect " + std::to_string(u));
    double sym = (k - k.transpose()).cwiseAbs().maxCoeff();
    if (sym > tol().kick_symmetry)
        throw AsymmetricKick(label + ": kick symmetry defect " + std::to_string(sym));
    if (expect_hermitian) {
        double herm = hermiticity_defect(k);
        if (herm > tol().kick_unitarity)
            throw Error(label + ": flip kick expected Hermitian, defect " + std::to_string(herm));
    }
}

KickModel assemble(const EigenSystem& es, KickKind kind, std::vector<Matrix> operators,
                   std::string label) {
    const Eigen::Index N = es.N;
    KickModel km;
    km.kind = kind;
    km.label = std::move(label);
    km.operators = std::move(operators);

    const bool expect_hermitian = kind == KickKind::uniform_family;
    km.amplitudes.reserve(km.operators.size());
    km.transition_weight = RealMatrix::Zero(N, N);
    for (const Matrix& k : km.operators) {
        if (k.rows() != N) throw DimensionMismatch(km.label + ": kick dimension mismatch");
        check_kick_operator(k, expect_hermitian, km.label);
        // amp(k, i) = <phi_k| K |conj phi_i>
        Matrix amp = es.vectors.adjoint() * k * es.conj_vectors;
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j < N; ++j)
                km.transition_weight(i, j) += std::norm(amp(j, i));
        km.amplitudes.push_back(std::move(amp));
    }
    km.transition_weight /= static_cast<double>(km.operators.size());

    // stochastic rows: sum_k |<phi_k|K|conj phi_i>|^2 = 1 by unitarity
    for (Eigen::Index i = 0; i < N; ++i) {
        double row = km.transition_weight.row(i).sum();
        if (std::abs(row - 1.0) > tol().row_sum)
            throw Error(km.label + ": amplitude row " + std::to_string(i) + " sums to " +
                        std::to_string(row));
    }
    // paired amplitude symmetry: |amp(j, i)| = |amp(i, j)| for symmetric kicks
    double asym = (km.transition_weight - km.transition_weight.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol().pairing)
        throw AsymmetricKick(km.label + ": transition weights asymmetric by " +
                             std::to_string(asym));
    return km;
}

}  // namespace

KickModel build_uniform_flip_kick(const EigenSystem& es) {
    std::vector<Matrix> flips;
    flips.reserve(es.n);
    for (std::size_t q = 0; q < es.n; ++q) flips.push_back(embed_single_qubit(pauli_x(), es.n, q));
    return assemble(es, KickKind::uniform_family, std::move(flips), "uniform-flips");
}

KickModel build_uniform_hadamard_kick(const EigenSystem& es) {
    const Matrix hadamard = (pauli_x() + pauli_z()) / std::sqrt(2.0);
    std::vector<Matrix> ops;
    ops.reserve(es.n);
    for (std::size_t q = 0; q < es.n; ++q) ops.push_back(embed_single_qubit(hadamard, es.n, q));
    return assemble(es, KickKind::uniform_family, std::move(ops), "uniform-hadamards");
}

KickModel build_single_kick(const EigenSystem& es, const Matrix& k, const std::string& label) {
    std::vector<Matrix> ops;
    ops.push_back(k);
    return assemble(es, KickKind::single_unitary, std::move(ops), label);
}

KickModel build_flip_kick(const EigenSystem& es, std::size_t spin) {
    return build_single_kick(es, embed_single_qubit(pauli_x(), es.n, spin),
                             "flip-q" + std::to_string(spin));
}

KickModel build_identity_kick(const EigenSystem& es) {
    return build_single_kick(es, Matrix::Identity(es.N, es.N), "identity");
}

}  // namespace q2ma
