#ifndef WAVEGUIDE_ERRORS_HPP
#define WAVEGUIDE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace waveguide {

// Base for all solver failures so callers can catch the whole family.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Profile width became nonpositive where a positive width is required.
struct NonpositiveWidthError : SolverError {
    using SolverError::SolverError;
};

// lambda sits on (or too close to) a transverse threshold (pi*k)^2, where
// the square-root branch of the radiation condition degenerates.
struct BranchAmbiguityError : SolverError {
    using SolverError::SolverError;
};

// Adaptive step control underflowed or ran out of steps.
struct IntegrationFailureError : SolverError {
    using SolverError::SolverError;
};

// A contour sample of the characteristic function is numerically zero.
struct ZeroOnContourError : SolverError {
    using SolverError::SolverError;
};

// Accumulated winding failed to settle near an integer after refinement.
struct NonIntegerWindingError : SolverError {
    using SolverError::SolverError;
};

// A shrinking contour stopped enclosing the tracked root.
struct LostRootError : SolverError {
    using SolverError::SolverError;
};

// A contour encloses more than one root; the caller must subdivide.
struct MultipleRootsError : SolverError {
    MultipleRootsError(const std::string& what, int count_)
        : SolverError(what), count(count_) {}
    int count = 0;
};

// Iteration exhausted its budget without meeting the convergence test.
struct NoConvergenceError : SolverError {
    using SolverError::SolverError;
};

// A root iteration left its trust region around the seed.
struct DivergenceError : SolverError {
    using SolverError::SolverError;
};

// Linear system of a scattering solve is singular at this frequency.
struct SingularSystemError : SolverError {
    using SolverError::SolverError;
};

// Bad run configuration (CLI / config file).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace waveguide

#endif
