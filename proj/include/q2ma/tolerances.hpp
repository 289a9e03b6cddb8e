#pragma once

#include <cstdlib>
#include <string>

#include "q2ma/errors.hpp"

namespace q2ma {

// Central tolerance record. Every numeric threshold used by the library lives
// here; Q2MA_TOL ("name=value[,name=value...]") overrides documented fields.
struct Tolerances {
    double hermiticity = 1e-12;         // input Hermiticity gate
    double eigen_residual = 1e-9;       // ||H v - lambda v|| per column
    double phase_floor = 1e-8;          // first component used to fix phase
    double degeneracy_cluster = 1e-9;   // eigenvalue spread treated as degenerate
    double trace_preservation = 1e-12;  // partial trace keeps the trace
    double unitarity = 1e-9;            // walk-scale unitaries
    double kick_unitarity = 1e-10;      // kick operators
    double kick_symmetry = 1e-12;       // K = K^T in the computational basis
    double pairing = 1e-10;             // paired-state and amplitude identities
    double row_sum = 1e-10;             // stochastic rows / amplitude rows
    double chain_entry_floor = -1e-14;  // transition entries may dip this low
    double detailed_balance = 1e-10;    // max |pi_i m_ij - pi_j m_ji|
    double stationary_top = 1e-10;      // |lambda_0 - 1|
    double pi_exact = 1e-12;            // Gibbs weights vs direct formula
    double disconnected = 1e-12;        // lambda_1 >= 1 - this => no gap
    double negative_eigenvalue = 1e-12; // lambda_min < -this flags negativity
    double projector = 1e-9;            // idempotency / Hermiticity of projectors
    double fixed_point = 1e-8;          // ||W cets - cets||
    double eigenphase_match = 1e-7;     // walk phase vs 2*arccos(chain eigenvalue)
    double block_match = 1e-6;          // BlockMismatch threshold
    double similarity = 1e-8;           // restricted spectrum vs chain spectrum
    double decomposition = 1e-9;        // entrywise restricted-operator identity
    double overlap_routes = 1e-10;      // two overlap formulas agree
    double norm_loss = 1e-6;            // measured-subspace completeness
    double reduced_state = 1e-8;        // reduced stationary state vs Gibbs state
    double gap_slack = 1e-9;            // phase gap >= 2 sqrt(gap) - slack
};

namespace detail {

inline void apply_override(Tolerances& t, const std::string& name, double value) {
    if (name == "hermiticity") t.hermiticity = value;
    else if (name == "eigen_residual") t.eigen_residual = value;
    else if (name == "phase_floor") t.phase_floor = value;
    else if (name == "degeneracy_cluster") t.degeneracy_cluster = value;
    else if (name == "trace_preservation") t.trace_preservation = value;
    else if (name == "unitarity") t.unitarity = value;
    else if (name == "kick_unitarity") t.kick_unitarity = value;
    else if (name == "kick_symmetry") t.kick_symmetry = value;
    else if (name == "pairing") t.pairing = value;
    else if (name == "row_sum") t.row_sum = value;
    else if (name == "chain_entry_floor") t.chain_entry_floor = value;
    else if (name == "detailed_balance") t.detailed_balance = value;
    else if (name == "stationary_top") t.stationary_top = value;
    else if (name == "pi_exact") t.pi_exact = value;
    else if (name == "disconnected") t.disconnected = value;
    else if (name == "negative_eigenvalue") t.negative_eigenvalue = value;
    else if (name == "projector") t.projector = value;
    else if (name == "fixed_point") t.fixed_point = value;
    else if (name == "eigenphase_match") t.eigenphase_match = value;
    else if (name == "block_match") t.block_match = value;
    else if (name == "similarity") t.similarity = value;
    else if (name == "decomposition") t.decomposition = value;
    else if (name == "overlap_routes") t.overlap_routes = value;
    else if (name == "norm_loss") t.norm_loss = value;
    else if (name == "reduced_state") t.reduced_state = value;
    else if (name == "gap_slack") t.gap_slack = value;
    else throw ConfigError("Q2MA_TOL: unknown tolerance name '" + name + "'");
}

inline Tolerances from_env() {
    Tolerances t;
    const char* raw = std::getenv("Q2MA_TOL");
    if (raw == nullptr) return t;
    std::string spec(raw);
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        std::string item = spec.substr(pos, comma - pos);
        std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("Q2MA_TOL: expected name=value, got '" + item + "'");
        std::size_t parsed = 0;
        double value = 0.0;
        try {
            value = std::stod(item.substr(eq + 1), &parsed);
        } catch (const std::exception&) {
            throw ConfigError("Q2MA_TOL: bad numeric value in '" + item + "'");
        }
        if (parsed != item.size() - eq - 1)
            throw ConfigError("Q2MA_TOL: trailing junk in '" + item + "'");
        apply_override(t, item.substr(0, eq), value);
        pos = comma + 1;
    }
    return t;
}

}  // namespace detail

// Process-wide active record; env override is read once on first use.
inline const Tolerances& tol() {
    static const Tolerances active = detail::from_env();
    return active;
}

}  // namespace q2ma
