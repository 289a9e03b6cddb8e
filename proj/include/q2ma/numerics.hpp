#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "q2ma/errors.hpp"
#include "q2ma/tolerances.hpp"

namespace q2ma {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Dense-only regime: largest total dimension any routine will accept.
inline constexpr Eigen::Index k_max_dimension = 4096;

// ----- checks -----

// max_ij |m(i,j) - conj(m(j,i))|
double hermiticity_defect(const Matrix& m);
bool is_hermitian(const Matrix& m, double tolerance);

// max_ij |(U^dag U - I)(i,j)|
double unitarity_defect(const Matrix& u);
bool is_unitary(const Matrix& u, double tolerance);

// ----- eigendecomposition -----

// Eigenvalues ascending; within each degenerate cluster (spread below
// tol().degeneracy_cluster) columns are ordered lexicographically by amplitude
// magnitudes; each column's first component with magnitude > tol().phase_floor
// is made real positive. Output is identical for identical input bytes.
struct EigenDecomposition {
    RealVector values;  // ascending
    Matrix vectors;     // column k pairs with values[k]
};

EigenDecomposition hermitian_eigendecomposition(const Matrix& m);

// exp(scale * m) for Hermitian m via its eigendecomposition; output symmetrized.
Matrix matrix_exponential_hermitian(const Matrix& m, double scale);

// ----- tensor algebra -----

Matrix tensor_product(const Matrix& a, const Matrix& b);
Vector tensor_product(const Vector& a, const Vector& b);

// Trace out every register not listed in `keep` (ascending register indices,
// register 0 is the most significant factor). dims are the register dimensions.
Matrix partial_trace(const Matrix& rho, const std::vector<Eigen::Index>& dims,
                     const std::vector<Eigen::Index>& keep);

// ----- state helpers -----

inline Matrix density(const Vector& psi) { return psi * psi.adjoint(); }

// (1/2) ||a - b||_1 for Hermitian a, b.
double trace_distance(const Matrix& a, const Matrix& b);

// |<a|b>|^2
double state_fidelity(const Vector& a, const Vector& b);

// ----- deterministic sampling -----

// 53-bit uniform in [0,1) from a raw 64-bit generator; identical on every
// platform for a given seed, unlike distribution objects.
template <typename Rng>
double uniform_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ----- small statistics -----

// Least-squares slope of y against x.
double linear_fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace q2ma
