#pragma once

#include <stdexcept>
#include <string>

namespace aros {

// Error taxonomy. The CLI maps each branch to a distinct exit code
// (see tools/aros_main.cpp); library code throws and never exits.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent run configuration (unknown keys, bad ranges,
// missing schema version).
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem and serialization-transport failures (missing file, short read,
// unwritable output directory).
struct IoError : Error {
    using Error::Error;
};

// Numerical failure at runtime: NaN in a reverse sweep, divergent ODE state,
// non-positive-definite covariance, eigensolver non-convergence.
struct NumericError : Error {
    using Error::Error;
};

// Violated API precondition or invariant: shape mismatch, empty class,
// degenerate head, scalar expected, sampler exhaustion.
struct ContractError : Error {
    using Error::Error;
};

// Unparseable external data (IDX magic, CSV header, checkpoint container).
struct FormatError : Error {
    using Error::Error;
};

}  // namespace aros
