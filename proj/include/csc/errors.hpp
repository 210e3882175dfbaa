#pragma once

#include <stdexcept>

namespace csc {

// Base class for every error the toolkit raises on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or size mismatch between arguments.
struct DimensionError : Error { using Error::Error; };

// Chunk / filter / column index out of range.
struct IndexError : Error { using Error::Error; };

// A construction-time invariant does not hold (non-unit atom, NaN, ...).
struct ValidationError : Error { using Error::Error; };

// Request exceeds a guard limit meant to keep brute-force work bounded.
struct CapacityError : Error { using Error::Error; };

// Quantity undefined for these inputs (e.g. coherence of a 1x1 dictionary).
struct DegenerateError : Error { using Error::Error; };

// Stripe holds no nonzeros, so a per-stripe average does not exist.
struct EmptyStripeError : Error { using Error::Error; };

// Support submatrix is numerically rank-deficient.
struct SingularSupportError : Error { using Error::Error; };

// Exhaustive search finished without finding any admissible solution.
struct NoSolutionError : Error { using Error::Error; };

// An iterative solver exhausted its budget. Solvers report this state via a
// converged=false flag on the result; the type exists for callers that need
// to escalate that state as an exception.
struct NonConvergenceError : Error { using Error::Error; };

// File could not be read, parsed, or written.
struct IoError : Error { using Error::Error; };

// Invalid experiment or command-line configuration.
struct ConfigError : Error { using Error::Error; };

}  // namespace csc
