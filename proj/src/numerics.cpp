#include "q2ma/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace q2ma {

double hermiticity_defect(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("hermiticity check needs a square matrix");
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double tolerance) {
    return hermiticity_defect(m) <= tolerance;
}

double unitarity_defect(const Matrix& u) {
    if (u.rows() != u.cols()) throw DimensionMismatch("unitarity check needs a square matrix");
    Matrix gram = u.adjoint() * u;
    gram -= Matrix::Identity(u.rows(), u.cols());
    return gram.cwiseAbs().maxCoeff();
}

bool is_unitary(const Matrix& u, double tolerance) {
    return unitarity_defect(u) <= tolerance;
}

namespace {

// Magnitude-lexicographic order used inside degenerate clusters.
bool magnitude_less(const Matrix& vecs, Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
        double ma = std::abs(vecs(r, a));
        double mb = std::abs(vecs(r, b));
        if (ma != mb) return ma < mb;
    }
    return false;
}

void order_degenerate_clusters(RealVector& values, Matrix& vectors) {
    const Eigen::Index n = values.size();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && values[stop] - values[start] < tol().degeneracy_cluster) ++stop;
        if (stop - start > 1) {
            std::vector<Eigen::Index> order(stop - start);
            std::iota(order.begin(), order.end(), start);
            std::stable_sort(order.begin(), order.end(),
                             [&](Eigen::Index a, Eigen::Index b) { return magnitude_less(vectors, a, b); });
            Matrix block(vectors.rows(), stop - start);
            RealVector vals(stop - start);
            for (Eigen::Index k = 0; k < stop - start; ++k) {
                block.col(k) = vectors.col(order[k]);
                vals[k] = values[order[k]];
            }
            vectors.middleCols(start, stop - start) = block;
            values.segment(start, stop - start) = vals;
        }
        start = stop;
    }
}

void fix_column_phases(Matrix& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            double mag = std::abs(vectors(r, c));
            if (mag > tol().phase_floor) {
                vectors.col(c) *= std::conj(vectors(r, c)) / mag;
                break;
            }
        }
    }
}

}  // namespace

EigenDecomposition hermitian_eigendecomposition(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("eigendecomposition needs a square matrix");
    if (m.rows() < 1 || m.rows() > k_max_dimension)
        throw SizeOutOfRange("dimension " + std::to_string(m.rows()) + " outside [1, " +
                             std::to_string(k_max_dimension) + "]");
    double defect = hermiticity_defect(m);
    if (defect > tol().hermiticity)
        throw NonHermitianInput("Hermiticity defect " + std::to_string(defect));

    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) throw Error("eigensolver failed to converge");

    EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
    order_degenerate_clusters(out.values, out.vectors);
    fix_column_phases(out.vectors);

    double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < out.values.size(); ++k) {
        double residual = (m * out.vectors.col(k) - out.values[k] * out.vectors.col(k)).norm();
        if (residual > tol().eigen_residual * scale)
            throw Error("eigenpair residual " + std::to_string(residual) + " at index " +
                        std::to_string(k));
    }
    return out;
}

Matrix matrix_exponential_hermitian(const Matrix& m, double scale) {
    EigenDecomposition ed = hermitian_eigendecomposition(m);
    RealVector weights = (scale * ed.values.array()).exp().matrix();
    Matrix out = ed.vectors * weights.asDiagonal() * ed.vectors.adjoint();
    return 0.5 * (out + Matrix(out.adjoint()));
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
    if (a.rows() * b.rows() > k_max_dimension || a.cols() * b.cols() > k_max_dimension)
        throw SizeOutOfRange("tensor product exceeds the dense dimension cap");
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector tensor_product(const Vector& a, const Vector& b) {
    if (a.size() * b.size() > k_max_dimension)
        throw SizeOutOfRange("tensor product exceeds the dense dimension cap");
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

Matrix partial_trace(const Matrix& rho, const std::vector<Eigen::Index>& dims,
                     const std::vector<Eigen::Index>& keep) {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("partial trace needs a square matrix");
    Eigen::Index total = 1;
    for (Eigen::Index d : dims) {
        if (d < 1) throw DimensionMismatch("register dimension must be positive");
        total *= d;
    }
    if (total != rho.rows())
        throw DimensionMismatch("register dimensions do not factor the matrix dimension");
    const std::size_t r = dims.size();
    std::vector<bool> kept(r, false);
    for (Eigen::Index k : keep) {
        if (k < 0 || static_cast<std::size_t>(k) >= r)
            throw DimensionMismatch("kept register index out of range");
        if (kept[static_cast<std::size_t>(k)])
            throw DimensionMismatch("kept register listed twice");
        kept[static_cast<std::size_t>(k)] = true;
    }
    for (std::size_t k = 1; k < keep.size(); ++k)
        if (keep[k] <= keep[k - 1]) throw DimensionMismatch("kept registers must be ascending");

    Eigen::Index kept_dim = 1, traced_dim = 1;
    for (std::size_t k = 0; k < r; ++k) (kept[k] ? kept_dim : traced_dim) *= dims[k];

    // strides of each register in the full row-major index
    std::vector<Eigen::Index> stride(r, 1);
    for (std::size_t k = r - 1; k > 0; --k) stride[k - 1] = stride[k] * dims[k];

    Matrix out = Matrix::Zero(kept_dim, kept_dim);
    for (Eigen::Index a = 0; a < kept_dim; ++a) {
        for (Eigen::Index b = 0; b < kept_dim; ++b) {
            // split kept indices a, b over the kept registers
            Eigen::Index base_row = 0, base_col = 0, rest_a = a, rest_b = b;
            for (std::size_t k = 0; k < r; ++k) {
                if (!kept[k]) continue;
                Eigen::Index block = 1;
                for (std::size_t j = k + 1; j < r; ++j)
                    if (kept[j]) block *= dims[j];
                base_row += (rest_a / block) * stride[k];
                base_col += (rest_b / block) * stride[k];
                rest_a %= block;
                rest_b %= block;
            }
            Complex sum = 0;
            for (Eigen::Index t = 0; t < traced_dim; ++t) {
                Eigen::Index offset = 0, rest_t = t;
                for (std::size_t k = 0; k < r; ++k) {
                    if (kept[k]) continue;
                    Eigen::Index block = 1;
                    for (std::size_t j = k + 1; j < r; ++j)
                        if (!kept[j]) block *= dims[j];
                    offset += (rest_t / block) * stride[k];
                    rest_t %= block;
                }
                sum += rho(base_row + offset, base_col + offset);
            }
            out(a, b) = sum;
        }
    }
    if (std::abs(out.trace() - rho.trace()) > tol().trace_preservation *
                                                  std::max(1.0, std::abs(rho.trace())))
        throw Error("partial trace failed to preserve the trace");
    return out;
}

double trace_distance(const Matrix& a, const Matrix& b) {
    Matrix diff = a - b;
    diff = 0.5 * (diff + Matrix(diff.adjoint()));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(diff);
    if (solver.info() != Eigen::Success) throw Error("trace distance eigensolve failed");
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double state_fidelity(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("fidelity needs equal-length states");
    return std::norm(a.dot(b));
}

double linear_fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DimensionMismatch("slope fit needs two or more paired samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw DimensionMismatch("slope fit needs distinct x values");
    return sxy / sxx;
}

}  // namespace q2ma
