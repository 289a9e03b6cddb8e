#include "q2ma/metropolis.hpp"

#include <cmath>

namespace q2ma {

double metropolis_filter(double e_from, double e_to, double beta) {
    double shift = beta * (e_to - e_from);
    return shift <= 0 ? 1.0 : std::exp(-shift);
}

RealVector gibbs_weights(const RealVector& energies, double beta) {
    const double e_min = energies.minCoeff();
    RealVector w = (-beta * (energies.array() - e_min)).exp().matrix();
    return w / w.sum();
}

MetropolisChain build_chain(const EigenSystem& es, const KickModel& kick, double beta,
                            bool lazy) {
    if (beta < 0) throw std::invalid_argument("beta must be nonnegative");
    const Eigen::Index N = es.N;
    if (kick.transition_weight.rows() != N)
        throw DimensionMismatch("kick table does not match the eigensystem");

    MetropolisChain chain;
    chain.beta = beta;
    chain.N = N;
    chain.energies = es.energies;
    chain.pi = gibbs_weights(es.energies, beta);
    chain.lazy = lazy;

    const RealMatrix& s = kick.transition_weight;
    RealMatrix m = RealMatrix::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        double stay = s(i, i);
        for (Eigen::Index j = 0; j < N; ++j) {
            if (j == i) continue;
            double z = metropolis_filter(es.energies[i], es.energies[j], beta);
            m(i, j) = s(i, j) * z;
            stay += s(i, j) * (1.0 - z);
        }
        m(i, i) = stay;
    }
    if (lazy) m = 0.5 * (m + RealMatrix::Identity(N, N));

    for (Eigen::Index i = 0; i < N; ++i) {
        double row = m.row(i).sum();
        if (std::abs(row - 1.0) > tol().row_sum)
            throw Error("chain row " + std::to_string(i) + " sums to " + std::to_string(row));
        if (m.row(i).minCoeff() < tol().chain_entry_floor)
            throw Error("chain row " + std::to_string(i) + " has a negative entry");
    }

    chain.detailed_balance_residual = 0;
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            chain.detailed_balance_residual =
                std::max(chain.detailed_balance_residual,
                         std::abs(chain.pi[i] * m(i, j) - chain.pi[j] * m(j, i)));

    // symmetrized form shares the spectrum and is numerically symmetric
    RealVector sqrt_pi = chain.pi.cwiseSqrt();
    RealMatrix sym(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) sym(i, j) = sqrt_pi[i] * m(i, j) / sqrt_pi[j];
    chain.symmetrization_residual = (sym - sym.transpose()).cwiseAbs().maxCoeff();
    sym = 0.5 * (sym + RealMatrix(sym.transpose()));

    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("chain eigensolve failed");
    chain.eigenvalues = solver.eigenvalues().reverse();

    if (std::abs(chain.eigenvalues[0] - 1.0) > tol().stationary_top)
        throw Error("stationary eigenvalue deviates from 1 by " +
                    std::to_string(std::abs(chain.eigenvalues[0] - 1.0)));
    chain.min_eigenvalue = chain.eigenvalues[N - 1];
    chain.has_negative_eigenvalue = chain.min_eigenvalue < -tol().negative_eigenvalue;
    chain.transition = std::move(m);
    return chain;
}

double classical_gap(const MetropolisChain& chain) {
    if (chain.N < 2) throw DimensionMismatch("gap needs at least two states");
    if (chain.eigenvalues[1] >= 1.0 - tol().disconnected)
        throw DisconnectedChain(
            "chain is disconnected: second eigenvalue is 1 within tolerance");
    return chain.delta();
}

double mixing_time_estimate(const MetropolisChain& chain) {
    return 1.0 / classical_gap(chain);
}

}  // namespace q2ma
