#pragma once

#include "q2ma/metropolis.hpp"
#include "q2ma/spectral.hpp"

namespace q2ma {

// Layout: register 1 (dim N) x register 2 (dim N) x kick register x ancilla
// (dim 2), row-major. Single-unitary kicks have a trivial kick register
// (dim 1), giving the plain 2 N^2 layout; the uniform-flip family carries an
// n-dimensional kick register so the averaged transition table is realized by
// an actual unitary.
struct WalkSpace {
    std::size_t n = 0;
    Eigen::Index N = 0;
    Eigen::Index kick_dim = 1;
    Eigen::Index dim = 0;  // 2 * kick_dim * N^2

    Eigen::Index index(Eigen::Index r1, Eigen::Index r2, Eigen::Index k,
                       Eigen::Index b) const {
        return ((r1 * N + r2) * kick_dim + k) * 2 + b;
    }
};

WalkSpace make_walk_space(const EigenSystem& es, const KickModel& kick);

// Applies the walk-step unitaries to vectors without materializing matrices.
// U_X = (basis change) rotation (basis change)^dag . controlled-kick . prep;
// U_Y = S_0 U_X with S_0 swapping the two registers on ancilla |0>.
class WalkBuild {
  public:
    WalkBuild(const EigenSystem& es, const KickModel& kick, double beta);

    const WalkSpace& space() const { return space_; }
    double beta() const { return beta_; }
    const RealVector& stationary() const { return pi_; }

    Vector apply_u_x(const Vector& v) const;
    Vector apply_u_x_adjoint(const Vector& v) const;
    Vector apply_u_y(const Vector& v) const;
    Vector apply_u_y_adjoint(const Vector& v) const;
    Vector apply_swap0(const Vector& v) const;
    Vector project_paired(const Vector& v) const;  // Lambda_1
    Vector apply_walk(const Vector& v) const;      // (2 Lambda_2 - 1)(2 Lambda_1 - 1)

    // |i> = |phi_i>|conj phi_i>|0_K>|0>
    Vector paired_basis_vector(Eigen::Index i) const;
    Vector embed_paired(const Vector& coefficients) const;
    Vector cets_embedded() const;

    // R(j, i) = <j| U_X^dag U_Y |i> on the paired basis.
    Matrix restricted_operator() const;

  private:
    void to_eigen_basis(Vector& v) const;
    void from_eigen_basis(Vector& v) const;
    void apply_prep(Vector& v) const;
    void apply_kick(Vector& v, bool adjoint) const;
    void apply_rotation(Vector& v, bool adjoint) const;

    WalkSpace space_;
    Matrix vectors_;       // phi columns
    Matrix conj_vectors_;  // conj(phi) columns
    std::vector<Matrix> kicks_;
    RealMatrix sqrt_accept_;  // sqrt(z_ik)
    RealMatrix sqrt_reject_;  // sqrt(1 - z_ik)
    RealMatrix prep_;         // kick-register preparation, |0> -> uniform
    RealVector pi_;
    double beta_ = 0;
};

// Eigensystem of the restricted operator: orthonormal columns (descending
// eigenvalue), principal angles theta_k = arccos(lambda_k), phase gap
// 2 theta_1, and how far the restricted matrix was from real-symmetric.
struct RestrictedSpectrum {
    RealVector values;  // descending; values[0] ~ 1
    RealMatrix basis;   // column k belongs to values[k]
    RealVector theta;
    double delta_min = 0;
    double symmetry_residual = 0;
};

RestrictedSpectrum restricted_spectrum(const Matrix& restricted);

// Full dense build: unitaries, projectors, W, restricted spectrum, stationary
// paired state, and the complete eigenphase list of W. Verifies that every
// restricted eigenvalue has its +-2 theta eigenphase pair (BlockMismatch).
struct WalkOperator {
    WalkSpace space;
    double beta = 0;
    Matrix u_x, u_y, lambda1, lambda2, w;
    Matrix restricted;
    RestrictedSpectrum spectrum;
    Vector cets;
    double fixed_point_residual = 0;
    std::vector<double> eigenphases;  // sorted, in (-pi, pi]
};

WalkOperator build_walk(const EigenSystem& es, const KickModel& kick, double beta);

// Light route for larger spaces: no dense matrices, no full spectrum.
struct WalkSummary {
    double delta_min = 0;
    double fixed_point_residual = 0;
    RealVector restricted_eigenvalues;  // descending
    double symmetry_residual = 0;
};

WalkSummary summarize_walk(const EigenSystem& es, const KickModel& kick, double beta);

// Dense one-off builders.
Matrix build_u_x(const EigenSystem& es, const KickModel& kick, double beta);
Matrix build_u_y(const EigenSystem& es, const KickModel& kick, double beta);
Matrix build_projector_lambda1(const EigenSystem& es, const KickModel& kick);
Matrix build_swap0(const WalkSpace& space);

// Phase gap versus classical gap: delta_min >= 2 sqrt(delta) - slack.
struct GapCheck {
    double delta_min = 0;
    double two_sqrt_delta = 0;
    double ratio = 0;
    bool pass = false;
};

GapCheck verify_gap_inequality(double delta_min, double delta);

// Max deviation between the restricted operator's eigenvalue multiset and the
// chain's (both sorted descending by real part); imaginary parts count.
double similarity_check(const Matrix& restricted, const MetropolisChain& chain);

// Smallest distance between two phases on the circle.
double circle_distance(double a, double b);

}  // namespace q2ma
