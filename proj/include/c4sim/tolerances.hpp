#pragma once

// Central numeric tolerances. Every module pulls its thresholds from here so
// a tolerance is never re-invented ad hoc at a call site.

namespace c4sim::tol {

// Generic "exact algebra" tolerance: eigenvalue residuals, witness values on
// pure states, unitarity checks.
inline constexpr double kExact = 1e-10;

// State-vector normalization: sum of |amplitude|^2 must equal 1 this tightly.
inline constexpr double kNorm = 1e-12;

// Hermiticity / trace deviation allowed for a density matrix.
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;

// A density matrix may have eigenvalues down to -kPsdFloor from roundoff.
inline constexpr double kPsdFloor = 1e-10;

// Parity-reconstructed expectation vs. direct matrix expectation.
inline constexpr double kParity = 1e-9;

// Optimizer stopping rules (maximum-likelihood reconstruction).
inline constexpr double kMleLogLikeImprovement = 1e-10;
inline constexpr int kMleMaxIterations = 100000;

// Least-squares calibration stopping rule.
inline constexpr double kFitStep = 1e-12;
inline constexpr int kFitMaxIterations = 500;

}  // namespace c4sim::tol
