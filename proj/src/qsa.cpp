#include "q2ma/qsa.hpp"

#include <cmath>

#include "q2ma/errors.hpp"
#include "q2ma/metropolis.hpp"
#include "q2ma/tolerances.hpp"

namespace q2ma {

namespace {

void check_normalized(const Vector& coefficients) {
    double defect = std::abs(coefficients.squaredNorm() - 1.0);
    if (defect > tol().norm_loss) {
        throw NormLoss("measured state norm deviates from 1 by " +
                       std::to_string(defect));
    }
}

// Samples an index from unnormalized weights with a 53-bit uniform draw;
// deterministic for a fixed generator state.
Eigen::Index sample_index(const RealVector& weights, std::mt19937_64& rng) {
    double total = weights.sum();
    double u = uniform_double(rng) * total;
    double acc = 0;
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        acc += weights(k);
        if (u < acc) return k;
    }
    return weights.size() - 1;
}

}  // namespace

Eigen::Index required_steps(double beta, double h2_bound, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("epsilon must lie in (0,1)");
    }
    if (beta < 0 || h2_bound < 0) {
        throw std::invalid_argument("beta and the second-moment bound must be >= 0");
    }
    double steps = std::ceil(beta * beta * h2_bound / epsilon);
    return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(steps));
}

namespace {

AnnealSchedule fill_schedule(const EigenSystem& es, double beta_final,
                             Eigen::Index d, double epsilon) {
    if (beta_final < 0) throw std::invalid_argument("final beta must be >= 0");
    if (d < 1) throw std::invalid_argument("step count must be >= 1");
    AnnealSchedule schedule;
    schedule.beta_final = beta_final;
    schedule.d = d;
    schedule.h2_bound = es.energies.squaredNorm() / static_cast<double>(es.N);
    schedule.epsilon = epsilon;
    schedule.betas.resize(d + 1);
    for (Eigen::Index j = 0; j <= d; ++j) {
        schedule.betas(j) = beta_final * static_cast<double>(j) / static_cast<double>(d);
    }
    return schedule;
}

}  // namespace

AnnealSchedule make_schedule(const EigenSystem& es, double beta_final, Eigen::Index d) {
    AnnealSchedule schedule = fill_schedule(es, beta_final, d, 0.0);
    schedule.epsilon =
        beta_final * beta_final * schedule.h2_bound / static_cast<double>(d);
    return schedule;
}

AnnealSchedule make_schedule_for_epsilon(const EigenSystem& es, double beta_final,
                                         double epsilon) {
    double h2 = es.energies.squaredNorm() / static_cast<double>(es.N);
    Eigen::Index d = required_steps(beta_final, h2, epsilon);
    return fill_schedule(es, beta_final, d, epsilon);
}

Vector cets_coefficients(const EigenSystem& es, double beta) {
    RealVector pi = gibbs_weights(es.energies, beta);
    return pi.cwiseSqrt().cast<Complex>();
}

OverlapRoutes step_overlap(const EigenSystem& es, double beta_j, double delta_beta) {
    if (delta_beta < 0) throw std::invalid_argument("delta beta must be >= 0");
    OverlapRoutes routes;
    if (delta_beta == 0.0) return routes;

    RealVector pi_now = gibbs_weights(es.energies, beta_j);
    RealVector pi_next = gibbs_weights(es.energies, beta_j + delta_beta);
    double direct = pi_now.cwiseProduct(pi_next).cwiseSqrt().sum();
    routes.direct = direct * direct;

    double e_ref = es.energies.minCoeff();
    double half = 0, full = 0;
    for (Eigen::Index i = 0; i < es.N; ++i) {
        double x = std::exp(-delta_beta * (es.energies(i) - e_ref));
        half += pi_now(i) * std::sqrt(x);
        full += pi_now(i) * x;
    }
    routes.ratio = half * half / full;
    return routes;
}

MeasureResult projective_step(const Vector& coefficients,
                              const RestrictedSpectrum& spectrum,
                              std::mt19937_64& rng) {
    const Eigen::Index N = spectrum.values.size();
    if (coefficients.size() != N) {
        throw DimensionMismatch("state and measurement basis sizes differ");
    }
    check_normalized(coefficients);
    Vector amplitudes = spectrum.basis.cast<Complex>().transpose() * coefficients;
    RealVector probs = amplitudes.cwiseAbs2();
    MeasureResult result;
    result.prob_outcome0 = probs(0);
    result.outcome = sample_index(probs, rng);
    result.prob_outcome = probs(result.outcome);
    Complex amp = amplitudes(result.outcome);
    Complex phase = std::abs(amp) > 0 ? amp / std::abs(amp) : Complex(1, 0);
    result.state = spectrum.basis.col(result.outcome).cast<Complex>() * phase;
    return result;
}

MeasureResult pea_projective_step(const Vector& coefficients,
                                  const RestrictedSpectrum& spectrum,
                                  const PeaConfig& config, std::mt19937_64& rng) {
    const Eigen::Index N = spectrum.values.size();
    if (coefficients.size() != N) {
        throw DimensionMismatch("state and measurement basis sizes differ");
    }
    check_normalized(coefficients);
    std::vector<std::vector<Eigen::Index>> bins = phase_bins(spectrum, config);
    Vector amplitudes = spectrum.basis.cast<Complex>().transpose() * coefficients;
    RealVector bin_probs(static_cast<Eigen::Index>(bins.size()));
    for (std::size_t b = 0; b < bins.size(); ++b) {
        double p = 0;
        for (Eigen::Index k : bins[b]) p += std::norm(amplitudes(k));
        bin_probs(static_cast<Eigen::Index>(b)) = p;
    }
    MeasureResult result;
    result.prob_outcome0 = bin_probs(0);  // bin containing eigenvalue index 0
    Eigen::Index b = sample_index(bin_probs, rng);
    result.prob_outcome = bin_probs(b);
    result.outcome = bins[static_cast<std::size_t>(b)].front();
    Vector projected = Vector::Zero(N);
    for (Eigen::Index k : bins[static_cast<std::size_t>(b)]) {
        projected += amplitudes(k) * spectrum.basis.col(k).cast<Complex>();
    }
    double norm = projected.norm();
    if (norm <= 0) throw NormLoss("projected state has vanishing norm");
    result.state = projected / norm;
    return result;
}

BudgetFigures controlled_w_budget(double beta, double h2_bound, double delta,
                                  double epsilon) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
    double a = beta * beta * h2_bound;
    BudgetFigures figures;
    figures.classical = a / (delta * epsilon);
    double log_term = a > 0 ? std::log(a / (epsilon * epsilon)) : 0.0;
    double quantum = a / (std::sqrt(delta) * epsilon) * std::max(log_term, 0.0);
    figures.quantum = std::max(1.0, quantum);
    return figures;
}

BudgetFigures controlled_w_budget(const AnnealTrace& trace, double delta,
                                  double epsilon) {
    return controlled_w_budget(trace.schedule.beta_final, trace.schedule.h2_bound,
                               delta, epsilon);
}

AnnealTrace run_annealing(const EigenSystem& es, const KickModel& kick,
                          const AnnealSchedule& schedule,
                          const AnnealOptions& options) {
    if (options.mode == AnnealMode::pea_model) validate(options.pea);
    AnnealTrace trace;
    trace.schedule = schedule;
    trace.mode = options.mode;
    trace.policy = options.policy;
    trace.seed = options.seed;
    trace.steps.reserve(static_cast<std::size_t>(schedule.d));

    std::mt19937_64 rng(options.seed);
    Vector state = cets_coefficients(es, schedule.betas(0));
    double eps0 = schedule.epsilon / static_cast<double>(schedule.d);

    for (Eigen::Index j = 1; j <= schedule.d; ++j) {
        double beta_j = schedule.betas(j);
        WalkBuild wb(es, kick, beta_j);
        RestrictedSpectrum spectrum = restricted_spectrum(wb.restricted_operator());

        StepRecord record;
        record.step = j;
        record.beta_j = beta_j;
        record.overlap_sq =
            step_overlap(es, schedule.betas(j - 1), beta_j - schedule.betas(j - 1))
                .direct;
        record.delta_min_j = spectrum.delta_min;
        record.delta_classical_j = 1.0 - spectrum.values(1);
        double log_term = eps0 > 0 && eps0 < 1 ? std::log(1.0 / eps0) : 0.0;
        record.cw_budget_j =
            std::max(1.0, std::ceil(log_term / spectrum.delta_min));

        Vector entering = state;
        MeasureResult measured;
        if (options.policy == OutcomePolicy::post_select) {
            // Forced outcome 0: project onto the stationary eigenvector (or
            // its phase bin) while accounting for the Born probability. No
            // randomness is consumed.
            Vector amplitudes = spectrum.basis.cast<Complex>().transpose() * entering;
            std::vector<Eigen::Index> kept{0};
            if (options.mode == AnnealMode::pea_model) {
                kept = phase_bins(spectrum, options.pea).front();
            }
            Vector projected = Vector::Zero(es.N);
            double prob = 0;
            for (Eigen::Index k : kept) {
                projected += amplitudes(k) * spectrum.basis.col(k).cast<Complex>();
                prob += std::norm(amplitudes(k));
            }
            double norm = projected.norm();
            if (norm <= 0) throw NormLoss("stationary component has vanishing weight");
            measured.state = projected / norm;
            measured.outcome = 0;
            measured.prob_outcome0 = prob;
            measured.prob_outcome = prob;
        } else {
            measured = options.mode == AnnealMode::pea_model
                           ? pea_projective_step(entering, spectrum, options.pea, rng)
                           : projective_step(entering, spectrum, rng);
            if (measured.outcome != 0) {
                if (options.policy == OutcomePolicy::abort_run) {
                    throw AnnealAborted("nonzero measurement outcome at step " +
                                            std::to_string(j),
                                        static_cast<std::size_t>(j));
                }
                if (options.policy == OutcomePolicy::retry_step) {
                    while (measured.outcome != 0) {
                        if (record.retries >= options.max_retries) {
                            throw AnnealAborted(
                                "retry budget exhausted at step " + std::to_string(j),
                                static_cast<std::size_t>(j));
                        }
                        ++record.retries;
                        measured = options.mode == AnnealMode::pea_model
                                       ? pea_projective_step(entering, spectrum,
                                                             options.pea, rng)
                                       : projective_step(entering, spectrum, rng);
                    }
                }
            }
        }

        state = measured.state;
        record.outcome = measured.outcome;
        record.prob_outcome0 = measured.prob_outcome0;
        trace.cum_success *= measured.prob_outcome0;
        record.cum_success = trace.cum_success;
        record.fidelity_to_exact =
            state_fidelity(cets_coefficients(es, beta_j), state);
        trace.min_delta_classical =
            std::min(trace.min_delta_classical, record.delta_classical_j);
        trace.cw_total += record.cw_budget_j;
        trace.steps.push_back(record);
    }

    trace.final_fidelity =
        state_fidelity(cets_coefficients(es, schedule.beta_final), state);

    WalkBuild wb(es, kick, schedule.beta_final);
    Vector full = wb.embed_paired(state);
    Matrix reduced = partial_trace(
        density(full), {es.N, es.N, wb.space().kick_dim, 2}, {0});
    RealVector pi = gibbs_weights(es.energies, schedule.beta_final);
    Matrix thermal = es.vectors * pi.cast<Complex>().asDiagonal() * es.vectors.adjoint();
    trace.reduced_trace_distance = trace_distance(reduced, thermal);

    trace.budget = controlled_w_budget(trace, trace.min_delta_classical,
                                       schedule.epsilon);
    return trace;
}

}  // namespace q2ma
