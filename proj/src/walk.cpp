#include "q2ma/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "q2ma/errors.hpp"
#include "q2ma/tolerances.hpp"

namespace q2ma {

namespace {

constexpr Eigen::Index k_max_dense_walk = 2048;

Matrix paired_matrix(const EigenSystem& es, const WalkSpace& space) {
    Matrix basis = Matrix::Zero(space.dim, es.N);
    for (Eigen::Index i = 0; i < es.N; ++i) {
        for (Eigen::Index x = 0; x < es.N; ++x) {
            for (Eigen::Index y = 0; y < es.N; ++y) {
                basis(space.index(x, y, 0, 0), i) =
                    es.vectors(x, i) * es.conj_vectors(y, i);
            }
        }
    }
    return basis;
}

template <typename Apply>
Matrix materialize(Eigen::Index dim, Apply&& apply) {
    Matrix out(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        Vector e = Vector::Zero(dim);
        e(j) = 1.0;
        out.col(j) = apply(e);
    }
    return out;
}

void check_projector(const Matrix& p, const char* name) {
    if (hermiticity_defect(p) > tol().projector ||
        (p * p - p).cwiseAbs().maxCoeff() > tol().projector) {
        throw Error(std::string(name) + " is not a projector within tolerance");
    }
}

}  // namespace

WalkSpace make_walk_space(const EigenSystem& es, const KickModel& kick) {
    WalkSpace space;
    space.n = es.n;
    space.N = es.N;
    space.kick_dim = kick.kind == KickKind::uniform_family
                         ? static_cast<Eigen::Index>(kick.operators.size())
                         : 1;
    space.dim = 2 * space.kick_dim * es.N * es.N;
    if (space.dim > k_max_dimension) {
        throw SizeOutOfRange("walk space dimension " + std::to_string(space.dim) +
                             " exceeds the hard cap " +
                             std::to_string(k_max_dimension));
    }
    return space;
}

WalkBuild::WalkBuild(const EigenSystem& es, const KickModel& kick, double beta)
    : space_(make_walk_space(es, kick)),
      vectors_(es.vectors),
      conj_vectors_(es.conj_vectors),
      kicks_(kick.operators),
      pi_(gibbs_weights(es.energies, beta)),
      beta_(beta) {
    const Eigen::Index N = space_.N;
    sqrt_accept_.resize(N, N);
    sqrt_reject_.resize(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index k = 0; k < N; ++k) {
            double z = metropolis_filter(es.energies(i), es.energies(k), beta);
            sqrt_accept_(i, k) = std::sqrt(z);
            sqrt_reject_(i, k) = std::sqrt(1.0 - z);
        }
    }
    const Eigen::Index nk = space_.kick_dim;
    if (static_cast<Eigen::Index>(kicks_.size()) != nk &&
        !(nk == 1 && kicks_.size() == 1)) {
        throw DimensionMismatch("kick register size does not match operator count");
    }
    // Householder completion sending |0> to the uniform superposition.
    prep_ = RealMatrix::Identity(nk, nk);
    if (nk > 1) {
        RealVector w = RealVector::Constant(nk, -1.0 / std::sqrt(double(nk)));
        w(0) += 1.0;
        prep_ -= (2.0 / w.squaredNorm()) * (w * w.transpose());
    }
}

void WalkBuild::to_eigen_basis(Vector& v) const {
    const Eigen::Index N = space_.N, nk = space_.kick_dim;
    const Eigen::Index stride1 = N * nk * 2, stride2 = nk * 2;
    Vector x(N);
    Matrix adj = vectors_.adjoint();
    for (Eigen::Index r2 = 0; r2 < N; ++r2) {
        for (Eigen::Index k = 0; k < nk; ++k) {
            for (Eigen::Index b = 0; b < 2; ++b) {
                Eigen::Index base = space_.index(0, r2, k, b);
                for (Eigen::Index r1 = 0; r1 < N; ++r1) x(r1) = v(base + r1 * stride1);
                x = adj * x;
                for (Eigen::Index r1 = 0; r1 < N; ++r1) v(base + r1 * stride1) = x(r1);
            }
        }
    }
    for (Eigen::Index r1 = 0; r1 < N; ++r1) {
        for (Eigen::Index k = 0; k < nk; ++k) {
            for (Eigen::Index b = 0; b < 2; ++b) {
                Eigen::Index base = space_.index(r1, 0, k, b);
                for (Eigen::Index r2 = 0; r2 < N; ++r2) x(r2) = v(base + r2 * stride2);
                x = adj * x;
                for (Eigen::Index r2 = 0; r2 < N; ++r2) v(base + r2 * stride2) = x(r2);
            }
        }
    }
}

void WalkBuild::from_eigen_basis(Vector& v) const {
    const Eigen::Index N = space_.N, nk = space_.kick_dim;
    const Eigen::Index stride1 = N * nk * 2, stride2 = nk * 2;
    Vector x(N);
    for (Eigen::Index r2 = 0; r2 < N; ++r2) {
        for (Eigen::Index k = 0; k < nk; ++k) {
            for (Eigen::Index b = 0; b < 2; ++b) {
                Eigen::Index base = space_.index(0, r2, k, b);
                for (Eigen::Index r1 = 0; r1 < N; ++r1) x(r1) = v(base + r1 * stride1);
                x = vectors_ * x;
                for (Eigen::Index r1 = 0; r1 < N; ++r1) v(base + r1 * stride1) = x(r1);
            }
        }
    }
    for (Eigen::Index r1 = 0; r1 < N; ++r1) {
        for (Eigen::Index k = 0; k < nk; ++k) {
            for (Eigen::Index b = 0; b < 2; ++b) {
                Eigen::Index base = space_.index(r1, 0, k, b);
                for (Eigen::Index r2 = 0; r2 < N; ++r2) x(r2) = v(base + r2 * stride2);
                x = vectors_ * x;
                for (Eigen::Index r2 = 0; r2 < N; ++r2) v(base + r2 * stride2) = x(r2);
            }
        }
    }
}

void WalkBuild::apply_prep(Vector& v) const {
    const Eigen::Index N = space_.N, nk = space_.kick_dim;
    if (nk == 1) return;
    Vector x(nk);
    for (Eigen::Index r1 = 0; r1 < N; ++r1) {
        for (Eigen::Index r2 = 0; r2 < N; ++r2) {
            for (Eigen::Index b = 0; b < 2; ++b) {
                Eigen::Index base = space_.index(r1, r2, 0, b);
                for (Eigen::Index k = 0; k < nk; ++k) x(k) = v(base + 2 * k);
                x = prep_.cast<Complex>() * x;
                for (Eigen::Index k = 0; k < nk; ++k) v(base + 2 * k) = x(k);
            }
        }
    }
}

void WalkBuild::apply_kick(Vector& v, bool adjoint) const {
    const Eigen::Index N = space_.N, nk = space_.kick_dim;
    const Eigen::Index stride2 = nk * 2;
    Vector x(N);
    for (Eigen::Index k = 0; k < nk; ++k) {
        const Matrix& op = kicks_[static_cast<std::size_t>(k)];
        Matrix use = adjoint ? op.adjoint() : op;
        for (Eigen::Index r1 = 0; r1 < N; ++r1) {
            for (Eigen::Index b = 0; b < 2; ++b) {
                Eigen::Index base = space_.index(r1, 0, k, b);
                for (Eigen::Index r2 = 0; r2 < N; ++r2) x(r2) = v(base + r2 * stride2);
                x = use * x;
                for (Eigen::Index r2 = 0; r2 < N; ++r2) v(base + r2 * stride2) = x(r2);
            }
        }
    }
}

void WalkBuild::apply_rotation(Vector& v, bool adjoint) const {
    const Eigen::Index N = space_.N, nk = space_.kick_dim;
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index k = 0; k < N; ++k) {
            double c = sqrt_accept_(i, k);
            double s = adjoint ? -sqrt_reject_(i, k) : sqrt_reject_(i, k);
            for (Eigen::Index l = 0; l < nk; ++l) {
                Eigen::Index base = space_.index(i, k, l, 0);
                Complex a0 = v(base), a1 = v(base + 1);
                v(base) = c * a0 - s * a1;
                v(base + 1) = s * a0 + c * a1;
            }
        }
    }
}

Vector WalkBuild::apply_u_x(const Vector& v) const {
    if (v.size() != space_.dim) throw DimensionMismatch("walk vector size mismatch");
    Vector out = v;
    apply_prep(out);
    apply_kick(out, false);
    to_eigen_basis(out);
    apply_rotation(out, false);
    from_eigen_basis(out);
    return out;
}

Vector WalkBuild::apply_u_x_adjoint(const Vector& v) const {
    if (v.size() != space_.dim) throw DimensionMismatch("walk vector size mismatch");
    Vector out = v;
    to_eigen_basis(out);
    apply_rotation(out, true);
    from_eigen_basis(out);
    apply_kick(out, true);
    apply_prep(out);  // prep is a real symmetric involution
    return out;
}

Vector WalkBuild::apply_swap0(const Vector& v) const {
    if (v.size() != space_.dim) throw DimensionMismatch("walk vector size mismatch");
    const Eigen::Index N = space_.N, nk = space_.kick_dim;
    Vector out = v;
    for (Eigen::Index r1 = 0; r1 < N; ++r1) {
        for (Eigen::Index r2 = 0; r2 < N; ++r2) {
            for (Eigen::Index k = 0; k < nk; ++k) {
                out(space_.index(r1, r2, k, 0)) = v(space_.index(r2, r1, k, 0));
            }
        }
    }
    return out;
}

Vector WalkBuild::apply_u_y(const Vector& v) const {
    return apply_swap0(apply_u_x(v));
}

Vector WalkBuild::apply_u_y_adjoint(const Vector& v) const {
    return apply_u_x_adjoint(apply_swap0(v));
}

Vector WalkBuild::paired_basis_vector(Eigen::Index i) const {
    if (i < 0 || i >= space_.N) throw DimensionMismatch("paired index out of range");
    Vector out = Vector::Zero(space_.dim);
    for (Eigen::Index x = 0; x < space_.N; ++x) {
        for (Eigen::Index y = 0; y < space_.N; ++y) {
            out(space_.index(x, y, 0, 0)) = vectors_(x, i) * conj_vectors_(y, i);
        }
    }
    return out;
}

Vector WalkBuild::embed_paired(const Vector& coefficients) const {
    if (coefficients.size() != space_.N) {
        throw DimensionMismatch("paired coefficient size mismatch");
    }
    Matrix block = vectors_ * coefficients.asDiagonal() * conj_vectors_.transpose();
    Vector out = Vector::Zero(space_.dim);
    for (Eigen::Index x = 0; x < space_.N; ++x) {
        for (Eigen::Index y = 0; y < space_.N; ++y) {
            out(space_.index(x, y, 0, 0)) = block(x, y);
        }
    }
    return out;
}

Vector WalkBuild::project_paired(const Vector& v) const {
    if (v.size() != space_.dim) throw DimensionMismatch("walk vector size mismatch");
    Matrix block(space_.N, space_.N);
    for (Eigen::Index x = 0; x < space_.N; ++x) {
        for (Eigen::Index y = 0; y < space_.N; ++y) {
            block(x, y) = v(space_.index(x, y, 0, 0));
        }
    }
    // <i|v> is the quadratic form <phi_i| block |phi_i> because the second
    // register pairs with conjugated eigenvectors.
    Vector coefficients = (vectors_.adjoint() * block * vectors_).diagonal();
    return embed_paired(coefficients);
}

Vector WalkBuild::apply_walk(const Vector& v) const {
    Vector r1 = 2.0 * project_paired(v) - v;
    Vector moved = apply_u_y_adjoint(apply_u_x(r1));
    Vector reflected = 2.0 * project_paired(moved) - moved;
    return apply_u_x_adjoint(apply_u_y(reflected));
}

Vector WalkBuild::cets_embedded() const {
    Vector coefficients = pi_.cwiseSqrt().cast<Complex>();
    return embed_paired(coefficients);
}

Matrix WalkBuild::restricted_operator() const {
    const Eigen::Index N = space_.N;
    std::vector<Vector> xcols, ycols;
    xcols.reserve(static_cast<std::size_t>(N));
    ycols.reserve(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) {
        Vector p = paired_basis_vector(i);
        xcols.push_back(apply_u_x(p));
        ycols.push_back(apply_u_y(p));
    }
    Matrix r(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = 0; i < N; ++i) {
            r(j, i) = xcols[static_cast<std::size_t>(j)].dot(
                ycols[static_cast<std::size_t>(i)]);
        }
    }
    return r;
}

RestrictedSpectrum restricted_spectrum(const Matrix& restricted) {
    const Eigen::Index N = restricted.rows();
    if (restricted.cols() != N || N < 2) {
        throw DimensionMismatch("restricted operator must be square, size >= 2");
    }
    RealMatrix sym = 0.5 * (restricted.real() + restricted.real().transpose());
    RestrictedSpectrum out;
    out.symmetry_residual = (restricted - sym.cast<Complex>()).cwiseAbs().maxCoeff();
    if (out.symmetry_residual > tol().similarity) {
        throw Error("restricted operator deviates from real symmetric by " +
                    std::to_string(out.symmetry_residual));
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw Error("restricted eigendecomposition failed");
    }
    out.values = solver.eigenvalues().reverse();
    out.basis = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index k = 0; k < N; ++k) {
        for (Eigen::Index r = 0; r < N; ++r) {
            if (std::abs(out.basis(r, k)) > tol().phase_floor) {
                if (out.basis(r, k) < 0) out.basis.col(k) = -out.basis.col(k);
                break;
            }
        }
    }
    out.theta.resize(N);
    for (Eigen::Index k = 0; k < N; ++k) {
        out.theta(k) = std::acos(std::clamp(out.values(k), -1.0, 1.0));
    }
    out.delta_min = 2.0 * out.theta(1);
    return out;
}

double circle_distance(double a, double b) {
    constexpr double two_pi = 2.0 * M_PI;
    double d = std::fmod(std::abs(a - b), two_pi);
    return std::min(d, two_pi - d);
}

WalkOperator build_walk(const EigenSystem& es, const KickModel& kick, double beta) {
    WalkBuild wb(es, kick, beta);
    const WalkSpace& space = wb.space();
    if (space.dim > k_max_dense_walk) {
        throw SizeOutOfRange("dense walk build supports dimension up to " +
                             std::to_string(k_max_dense_walk) + ", requested " +
                             std::to_string(space.dim));
    }
    WalkOperator walk;
    walk.space = space;
    walk.beta = beta;
    walk.u_x = materialize(space.dim, [&](const Vector& v) { return wb.apply_u_x(v); });
    walk.u_y = materialize(space.dim, [&](const Vector& v) { return wb.apply_u_y(v); });
    if (!is_unitary(walk.u_x, tol().unitarity) || !is_unitary(walk.u_y, tol().unitarity)) {
        throw Error("walk step unitaries fail the unitarity tolerance");
    }
    Matrix paired = paired_matrix(es, space);
    walk.lambda1 = paired * paired.adjoint();
    walk.lambda2 = walk.u_x.adjoint() * walk.u_y * walk.lambda1 *
                   walk.u_y.adjoint() * walk.u_x;
    check_projector(walk.lambda1, "Lambda_1");
    check_projector(walk.lambda2, "Lambda_2");
    Matrix eye = Matrix::Identity(space.dim, space.dim);
    walk.w = (2.0 * walk.lambda2 - eye) * (2.0 * walk.lambda1 - eye);
    if (!is_unitary(walk.w, tol().unitarity)) throw Error("walk operator fails the unitarity tolerance");
    walk.restricted = (walk.u_x * paired).adjoint() * (walk.u_y * paired);
    walk.spectrum = restricted_spectrum(walk.restricted);
    walk.cets = wb.cets_embedded();
    walk.fixed_point_residual = (walk.w * walk.cets - walk.cets).norm();

    Eigen::ComplexEigenSolver<Matrix> ces(walk.w, false);
    if (ces.info() != Eigen::Success) throw Error("walk eigendecomposition failed");
    walk.eigenphases.reserve(static_cast<std::size_t>(space.dim));
    for (Eigen::Index k = 0; k < space.dim; ++k) {
        Complex mu = ces.eigenvalues()(k);
        if (std::abs(std::abs(mu) - 1.0) > tol().unitarity) {
            throw Error("walk eigenvalue off the unit circle");
        }
        walk.eigenphases.push_back(std::arg(mu));
    }
    std::sort(walk.eigenphases.begin(), walk.eigenphases.end());

    for (Eigen::Index k = 0; k < space.N; ++k) {
        for (double target : {2.0 * walk.spectrum.theta(k), -2.0 * walk.spectrum.theta(k)}) {
            double best = std::numeric_limits<double>::infinity();
            for (double phase : walk.eigenphases) {
                best = std::min(best, circle_distance(phase, target));
            }
            if (best > tol().block_match) {
                throw BlockMismatch("no walk eigenphase within tolerance of +-2 theta_" +
                                    std::to_string(k) + " (deviation " +
                                    std::to_string(best) + ")");
            }
        }
    }
    return walk;
}

WalkSummary summarize_walk(const EigenSystem& es, const KickModel& kick, double beta) {
    WalkBuild wb(es, kick, beta);
    Matrix restricted = wb.restricted_operator();
    RestrictedSpectrum spec = restricted_spectrum(restricted);
    Vector cets = wb.cets_embedded();
    WalkSummary out;
    out.delta_min = spec.delta_min;
    out.fixed_point_residual = (wb.apply_walk(cets) - cets).norm();
    out.restricted_eigenvalues = spec.values;
    out.symmetry_residual = spec.symmetry_residual;
    return out;
}

Matrix build_u_x(const EigenSystem& es, const KickModel& kick, double beta) {
    WalkBuild wb(es, kick, beta);
    return materialize(wb.space().dim, [&](const Vector& v) { return wb.apply_u_x(v); });
}

Matrix build_u_y(const EigenSystem& es, const KickModel& kick, double beta) {
    WalkBuild wb(es, kick, beta);
    return materialize(wb.space().dim, [&](const Vector& v) { return wb.apply_u_y(v); });
}

Matrix build_projector_lambda1(const EigenSystem& es, const KickModel& kick) {
    WalkSpace space = make_walk_space(es, kick);
    Matrix paired = paired_matrix(es, space);
    return paired * paired.adjoint();
}

Matrix build_swap0(const WalkSpace& space) {
    Matrix s = Matrix::Zero(space.dim, space.dim);
    for (Eigen::Index r1 = 0; r1 < space.N; ++r1) {
        for (Eigen::Index r2 = 0; r2 < space.N; ++r2) {
            for (Eigen::Index k = 0; k < space.kick_dim; ++k) {
                s(space.index(r1, r2, k, 0), space.index(r2, r1, k, 0)) = 1.0;
                s(space.index(r1, r2, k, 1), space.index(r1, r2, k, 1)) = 1.0;
            }
        }
    }
    return s;
}

GapCheck verify_gap_inequality(double delta_min, double delta) {
    GapCheck check;
    check.delta_min = delta_min;
    check.two_sqrt_delta = 2.0 * std::sqrt(std::max(delta, 0.0));
    check.ratio = check.two_sqrt_delta > 0
                      ? delta_min / check.two_sqrt_delta
                      : std::numeric_limits<double>::infinity();
    check.pass = delta_min >= check.two_sqrt_delta - tol().gap_slack;
    return check;
}

double similarity_check(const Matrix& restricted, const MetropolisChain& chain) {
    if (restricted.rows() != chain.N) {
        throw DimensionMismatch("restricted operator and chain sizes differ");
    }
    Eigen::ComplexEigenSolver<Matrix> ces(restricted, false);
    if (ces.info() != Eigen::Success) {
        throw Error("restricted eigendecomposition failed");
    }
    std::vector<Complex> values(ces.eigenvalues().data(),
                                ces.eigenvalues().data() + restricted.rows());
    std::sort(values.begin(), values.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    double worst = 0;
    for (Eigen::Index k = 0; k < chain.N; ++k) {
        worst = std::max(worst,
                         std::abs(values[static_cast<std::size_t>(k)] -
                                  Complex(chain.eigenvalues(k), 0.0)));
    }
    return worst;
}

}  // namespace q2ma
