#include "q2ma/pea.hpp"

#include <cmath>
#include <numeric>

#include "q2ma/errors.hpp"
#include "q2ma/hamiltonian.hpp"
#include "q2ma/tolerances.hpp"

namespace q2ma {

void validate(const PeaConfig& config) {
    if (config.a < 1) throw ConfigError("pea window exponent must be >= 1");
    if (config.repeats < 1) throw ConfigError("pea repeats must be >= 1");
    double w = config.window();
    if (!(w > 0.0 && w < 1.0)) throw ConfigError("pea window must lie in (0,1)");
    if (!(config.evolution_time > 0.0)) throw ConfigError("pea evolution time must be positive");
}

double pea_error_single(double e_i, double e_j, double delta_window) {
    double gap = std::abs(e_i - e_j);
    if (gap <= delta_window) return 1.0;
    double ratio = delta_window / gap;
    return std::min(1.0, ratio * ratio);
}

double pea_error_repeated(double single_error, int repeats) {
    if (single_error < 0.0 || single_error > 1.0) {
        throw std::invalid_argument("single-round error must lie in [0,1]");
    }
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    return std::pow(single_error, repeats);
}

LeakageReport leakage_analysis(const EigenSystem& es, const KickModel& kick,
                               const PeaConfig& config, double threshold) {
    validate(config);
    NormalizedSpectrum ns = normalize_spectrum(es.energies);
    const Eigen::Index N = es.N;
    LeakageReport report;
    report.window = config.window();
    report.threshold = threshold;
    report.energies_normalized.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        report.energies_normalized(i) = ns.map(es.energies(i));
    }
    report.eta = RealVector::Zero(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index k = 0; k < N; ++k) {
            if (k == i) continue;
            double gap = std::abs(report.energies_normalized(i) -
                                  report.energies_normalized(k));
            if (gap < report.window) report.eta(i) += kick.transition_weight(i, k);
        }
    }
    Matrix h_conj = es.source.matrix.conjugate();
    report.omega = RealVector::Zero(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        double acc = 0;
        for (const Matrix& op : kick.operators) {
            Vector moved = op * es.conj_vectors.col(i);
            acc += (moved.adjoint() * h_conj * moved).value().real();
        }
        acc /= static_cast<double>(kick.operators.size());
        report.omega(i) = std::abs(acc - es.energies(i)) * ns.scale;
    }
    report.eta_max = report.eta.maxCoeff();
    report.eta_mean = report.eta.mean();
    report.flagged = report.eta_max > threshold;
    return report;
}

namespace {

Eigen::Index find_root(std::vector<Eigen::Index>& parent, Eigen::Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
    }
    return x;
}

}  // namespace

std::vector<std::vector<Eigen::Index>> phase_bins(const RestrictedSpectrum& spectrum,
                                                  const PeaConfig& config) {
    validate(config);
    const Eigen::Index N = spectrum.theta.size();
    const double threshold = config.evolution_time * config.window();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(N));
    std::iota(parent.begin(), parent.end(), 0);
    for (Eigen::Index k = 0; k < N; ++k) {
        for (Eigen::Index l = k + 1; l < N; ++l) {
            double pk = 2.0 * spectrum.theta(k);
            double pl = 2.0 * spectrum.theta(l);
            double d = std::min(circle_distance(pk, pl), circle_distance(pk, -pl));
            if (d < threshold) {
                Eigen::Index rk = find_root(parent, k), rl = find_root(parent, l);
                if (rk != rl) parent[static_cast<std::size_t>(std::max(rk, rl))] =
                    std::min(rk, rl);
            }
        }
    }
    std::vector<std::vector<Eigen::Index>> bins;
    std::vector<Eigen::Index> bin_of(static_cast<std::size_t>(N), -1);
    for (Eigen::Index k = 0; k < N; ++k) {
        Eigen::Index r = find_root(parent, k);
        if (bin_of[static_cast<std::size_t>(r)] < 0) {
            bin_of[static_cast<std::size_t>(r)] = static_cast<Eigen::Index>(bins.size());
            bins.emplace_back();
        }
        bins[static_cast<std::size_t>(bin_of[static_cast<std::size_t>(r)])].push_back(k);
    }
    return bins;
}

}  // namespace q2ma
