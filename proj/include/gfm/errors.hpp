#pragma once
// Error taxonomy: every throw site in the library uses one of these so callers
// can map failures onto exit codes (config vs numerical) without string parsing.
#include <stdexcept>
#include <string>

namespace gfm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Feedback composition whose return-difference polynomial vanishes identically.
struct DegenerateLoop : Error { using Error::Error; };

// Eigenvalue/root iteration failed to converge.
struct NumericalFailure : Error { using Error::Error; };

// deg(num) > deg(den) where a causal realization is required.
struct ImproperTransferFunction : Error { using Error::Error; };

// Coupling compensation m*n makes the algebraic (omega, v) solve degenerate.
struct SingularCoupling : Error { using Error::Error; };

// Swing law evaluated at omega <= 0.
struct NonPhysicalFrequency : Error { using Error::Error; };

// Linearization requested at a point with non-negligible state derivatives.
struct NotAnEquilibrium : Error { using Error::Error; };

// Operation valid only in the other operating mode (grid-connected/islanded).
struct WrongMode : Error { using Error::Error; };

// Design time constants violate the positivity rules of the target form.
struct InvalidDesign : Error { using Error::Error; };

// Series has not reached steady state, so step metrics are undefined.
struct NotSettled : Error { using Error::Error; };

// A simulated state left its physical envelope (or became non-finite).
struct NumericalBlowup : Error { using Error::Error; };

// Initial/operating-point equilibrium could not be solved.
struct UnstableEquilibrium : Error { using Error::Error; };

// Config parsing or validation failure; message carries the offending key path.
struct ConfigError : Error { using Error::Error; };

}  // namespace gfm
