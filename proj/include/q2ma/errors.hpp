#pragma once

#include <stdexcept>
#include <string>

namespace q2ma {

// Base for all domain errors so callers can map them to one exit class.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix handed to a Hermitian-only routine is not Hermitian within tolerance.
struct NonHermitianInput : Error {
    using Error::Error;
};

// Operand shapes are incompatible or a register selection is out of range.
struct DimensionMismatch : Error {
    using Error::Error;
};

// Qubit count or total dimension outside the supported dense range.
struct SizeOutOfRange : Error {
    using Error::Error;
};

// Kick operator is not symmetric in the computational basis.
struct AsymmetricKick : Error {
    using Error::Error;
};

// Chain has no spectral gap: second eigenvalue at 1 within tolerance.
struct DisconnectedChain : Error {
    using Error::Error;
};

// Walk spectrum lacks the eigenphase pair expected for a chain eigenvalue.
struct BlockMismatch : Error {
    using Error::Error;
};

// State left the measured subspace by more than tolerance.
struct NormLoss : Error {
    using Error::Error;
};

// Annealing run stopped by the abort policy; carries the failing step.
struct AnnealAborted : Error {
    AnnealAborted(const std::string& what, std::size_t step_index)
        : Error(what), step(step_index) {}
    std::size_t step;
};

// Bad experiment configuration (schema violation, unknown key, bad value).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace q2ma
