#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "q2ma/pea.hpp"
#include "q2ma/walk.hpp"

namespace q2ma {

// Linear annealing ladder beta_j = (j/d) beta_final with the implied error
// scale epsilon = beta^2 <H^2>_0 / d when built from a step count.
struct AnnealSchedule {
    double beta_final = 0;
    Eigen::Index d = 1;
    double h2_bound = 0;  // Tr(H^2)/N
    double epsilon = 0;
    RealVector betas;  // size d+1, betas(0) = 0, betas(d) = beta_final
};

AnnealSchedule make_schedule(const EigenSystem& es, double beta_final, Eigen::Index d);
AnnealSchedule make_schedule_for_epsilon(const EigenSystem& es, double beta_final,
                                         double epsilon);

// ceil(beta^2 h2 / epsilon), at least 1. Constant set to 1; a scaling
// surrogate, not a rigorous bound.
Eigen::Index required_steps(double beta, double h2_bound, double epsilon);

// Stationary amplitudes sqrt(pi_i(beta)) in the paired-coefficient space.
Vector cets_coefficients(const EigenSystem& es, double beta);

// Squared overlap of consecutive ladder states computed two independent
// ways: the direct inner product sum_i sqrt(pi^j_i pi^{j+1}_i) squared, and
// the thermal-average ratio (sum pi e^{-dB E/2})^2 / (sum pi e^{-dB E}).
struct OverlapRoutes {
    double direct = 1;
    double ratio = 1;
};

OverlapRoutes step_overlap(const EigenSystem& es, double beta_j, double delta_beta);

enum class AnnealMode { exact, pea_model };
enum class OutcomePolicy { post_select, abort_run, retry_step, accept_continue };

// One projective measurement in the eigenbasis of the restricted operator.
// The coefficient vector must be expressed in the paired basis; outcome 0
// projects onto the stationary eigenvector.
struct MeasureResult {
    Eigen::Index outcome = 0;
    Vector state;
    double prob_outcome0 = 0;  // Born probability of outcome 0 for the input
    double prob_outcome = 0;   // Born probability of the realized outcome
};

MeasureResult projective_step(const Vector& coefficients,
                              const RestrictedSpectrum& spectrum,
                              std::mt19937_64& rng);

// Finite-window variant: outcomes are bins of unresolvable walk phases;
// outcome index is the smallest eigenvalue index in the realized bin.
MeasureResult pea_projective_step(const Vector& coefficients,
                                  const RestrictedSpectrum& spectrum,
                                  const PeaConfig& config, std::mt19937_64& rng);

struct StepRecord {
    Eigen::Index step = 0;
    double beta_j = 0;
    double overlap_sq = 1;        // formula route, previous vs current ladder state
    Eigen::Index outcome = 0;
    double prob_outcome0 = 1;     // Born probability on the actual entering state
    double cum_success = 1;
    double fidelity_to_exact = 1; // against the exact ladder state at beta_j
    double delta_min_j = 0;
    double delta_classical_j = 0;
    double cw_budget_j = 0;       // ceil(log(1/eps0) / delta_min_j), eps0 = eps/d
    Eigen::Index retries = 0;
};

struct BudgetFigures {
    double quantum = 1;    // (b^2 h2 / (sqrt(delta) eps)) log(b^2 h2 / eps^2), min 1
    double classical = 0;  // b^2 h2 / (delta eps)
};

BudgetFigures controlled_w_budget(double beta, double h2_bound, double delta,
                                  double epsilon);

struct AnnealTrace {
    AnnealSchedule schedule;
    AnnealMode mode = AnnealMode::exact;
    OutcomePolicy policy = OutcomePolicy::retry_step;
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    double cum_success = 1;
    double final_fidelity = 1;          // to the exact ladder state at beta_final
    double reduced_trace_distance = 0;  // reduced final state vs thermal state
    double cw_total = 0;                // sum of per-step budgets
    double min_delta_classical = 1;
    BudgetFigures budget;
};

BudgetFigures controlled_w_budget(const AnnealTrace& trace, double delta,
                                  double epsilon);

struct AnnealOptions {
    AnnealMode mode = AnnealMode::exact;
    OutcomePolicy policy = OutcomePolicy::retry_step;
    std::uint64_t seed = 0;
    PeaConfig pea;
    Eigen::Index max_retries = 1000;
};

AnnealTrace run_annealing(const EigenSystem& es, const KickModel& kick,
                          const AnnealSchedule& schedule, const AnnealOptions& options);

}  // namespace q2ma
