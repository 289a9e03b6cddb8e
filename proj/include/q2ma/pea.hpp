#pragma once

#include <vector>

#include "q2ma/spectral.hpp"
#include "q2ma/walk.hpp"

namespace q2ma {

// Finite-resolution phase estimation model: an energy window Delta = 2^-a on
// normalized energies, optionally repeated, with the energy-difference
// unitary represented through its phase spectrum at evolution time t.
struct PeaConfig {
    int a = 4;            // window exponent, Delta = 2^-a
    int repeats = 1;      // error epsilon -> epsilon^repeats
    double evolution_time = 2.0 * M_PI;

    double window() const { return std::ldexp(1.0, -a); }
};

void validate(const PeaConfig& config);

// Probability of confusing two normalized energies through one estimation
// round: min(1, Delta^2 / |E_i - E_j|^2); 1 inside the window.
double pea_error_single(double e_i, double e_j, double delta_window);

// k independent repetitions: epsilon^k.
double pea_error_repeated(double single_error, int repeats);

// Per-state weight of kick transitions landing inside the unresolvable
// window around E_i (the own-state term excluded), plus the mean energy
// change the kick induces from state i.
struct LeakageReport {
    double window = 0;
    RealVector energies_normalized;
    RealVector eta;    // eta_i in [0,1]
    RealVector omega;  // |<K H~ K> - E_i|, averaged over kick operators,
                       // in normalized energy units
    double eta_max = 0;
    double eta_mean = 0;
    bool flagged = false;  // eta_max above the reporting threshold
    double threshold = 0.1;
};

LeakageReport leakage_analysis(const EigenSystem& es, const KickModel& kick,
                               const PeaConfig& config,
                               double threshold = 0.1);

// Partition of restricted-eigenvalue indices whose walk phases +-2 theta_k
// are unresolvable at the given window (phase distance below
// evolution_time * window, transitively closed). Each bin is sorted; bins
// are ordered by smallest member.
std::vector<std::vector<Eigen::Index>> phase_bins(const RestrictedSpectrum& spectrum,
                                                  const PeaConfig& config);

}  // namespace q2ma
