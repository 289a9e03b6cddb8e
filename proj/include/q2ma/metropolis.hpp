#pragma once

#include "q2ma/spectral.hpp"

namespace q2ma {

// Row-stochastic transition matrix over the N eigenstate labels, satisfying
// detailed balance with the Gibbs weights of the source energies. Degenerate
// energies keep distinct labels (one state per eigenvector). Eigenvalues come
// from the symmetrized form D^{1/2} M D^{-1/2} and are stored descending.
struct MetropolisChain {
    double beta = 0;
    Eigen::Index N = 0;
    RealVector energies;            // physical energies, ascending
    RealVector pi;                  // Gibbs weights, sums to 1
    RealMatrix transition;          // (i, j) = probability i -> j
    RealVector eigenvalues;         // descending; [0] is 1
    double detailed_balance_residual = 0;
    double symmetrization_residual = 0;
    bool lazy = false;
    bool has_negative_eigenvalue = false;  // reported, not fatal
    double min_eigenvalue = 0;

    double delta() const { return 1.0 - eigenvalues[1]; }
};

// Acceptance probability min{1, exp(-beta (e_to - e_from))}.
double metropolis_filter(double e_from, double e_to, double beta);

// Gibbs weights exp(-beta E_i)/Z, evaluated shift-stably.
RealVector gibbs_weights(const RealVector& energies, double beta);

// lazy: replace M by (M + I)/2 (shifts eigenvalues to (lambda+1)/2; not part
// of the source construction, available for chains with negative spectrum).
MetropolisChain build_chain(const EigenSystem& es, const KickModel& kick, double beta,
                            bool lazy = false);

// Spectral gap 1 - lambda_1; throws DisconnectedChain when lambda_1 is 1
// within tolerance.
double classical_gap(const MetropolisChain& chain);

// 1/delta.
double mixing_time_estimate(const MetropolisChain& chain);

}  // namespace q2ma
