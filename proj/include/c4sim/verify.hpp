#pragma once

// Entanglement witness and all-versus-nothing nonlocality evaluation for the
// four-qubit linear cluster state, plus supporting checks: stabilizer
// eigenvalue verification, local-realistic bound enumeration, reality
// controls, and Poissonian error propagation for parity estimates.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "c4sim/qcore.hpp"

namespace c4sim {

struct TermValue {
    std::string label;
    double value = 0.0;
    double sigma = 0.0;
};

struct WitnessTermSpec {
    const char* label;
    double coefficient;  // weight of the expectation value inside the witness
};

// W = (4*I - <Z_A Z_B> - <Z_A x_A x_B> + <X_A z_A X_B> + <z_A z_B>
//      - <x_A Z_B x_B> - <X_A X_B z_B>) / 2.
// Negative values witness genuine cluster-state entanglement; the cluster
// state itself reaches -1.
const std::array<WitnessTermSpec, 6>& witness_term_specs();

struct WitnessReport {
    std::array<TermValue, 6> terms;  // ordered like witness_term_specs()
    std::string provenance;

    double value() const;
    double sigma() const;  // quadrature of the term sigmas, halved
    // F >= (1 - W)/2: lower bound on the cluster-state fidelity.
    double fidelity_lower_bound() const;
};

WitnessReport witness(const DensityMatrix& rho);
// Terms taken from tabulated expectation values (matched by label; throws if
// one of the six is missing).
WitnessReport witness_from_values(const std::vector<TermValue>& values);

// counts[o] indexed like outcome_probabilities; value and sigma via parity
// tallies and Poissonian propagation.
struct ObservableCounts {
    PauliString observable;
    std::array<std::int64_t, 16> counts;
};

WitnessReport witness_from_counts(const std::vector<ObservableCounts>& counts);

double fidelity_bound(double witness_value);

// The witness as an operator, its projector sharpening
// (I/2 - |cluster><cluster|), and the minimum eigenvalue of W - 2*Wproj
// (nonnegative: the measured witness never under-reports the projector one).
Mat16 witness_operator();
Mat16 projector_witness_operator();
double witness_dominance_min_eigenvalue();

// ---- all-versus-nothing argument ----

// S = <X_A X_B z_B> - <Y_A Y_B z_B> + <X_A x_A Y_B y_B> + <Y_A x_A X_B y_B>.
// Local realism caps S at 2; the cluster state reaches 4.
const std::array<WitnessTermSpec, 4>& avn_term_specs();

inline constexpr double kAvnClassicalBound = 2.0;
inline constexpr double kAvnQuantumValue = 4.0;

struct AvnReport {
    std::array<TermValue, 4> terms;  // ordered like avn_term_specs()
    std::string provenance;

    double value() const;
    double sigma() const;  // quadrature of the term sigmas
    // Distance above the local-realistic bound in units of sigma (the
    // report's own sigma unless one is supplied).
    double sigmas_above_classical(std::optional<double> sigma_override = {}) const;
};

AvnReport avn(const DensityMatrix& rho);
AvnReport avn_from_values(const std::vector<TermValue>& values);
AvnReport avn_from_counts(const std::vector<ObservableCounts>& counts);

// Exhaustive maximum of the S combination over all deterministic +-1
// assignments to the seven single-photon quantities appearing in it
// (X_A, Y_A, x_A, X_B, Y_B, y_B, z_B).
struct ClassicalAvnMaximum {
    double max_value;
    int assignment;  // bit i of the argmax = value of the i-th quantity above
};

ClassicalAvnMaximum classical_avn_maximum();

// ---- stabilizer verification ----

struct StabilizerCheck {
    PauliString observable;
    double eigenvalue;    // designed sign on the cluster state
    double expectation;   // measured on the supplied state
    double residual;      // || O|psi> - eigenvalue |psi> ||
};

// The nine local product observables that stabilize the cluster state (up to
// sign), checked as eigenvalue equations on a pure state.
std::array<StabilizerCheck, 9> stabilizer_check(const StateVector& psi);

// ---- elements-of-reality controls ----

struct ControlCheck {
    std::string label;
    double value = 0.0;
    double sigma = 0.0;
    int expected_sign = 0;
    bool sign_consistent = false;
    bool definite = false;  // |value| at or above the threshold
};

// The seven control observables whose near-definite values ground the
// elements-of-reality reading of the AVN argument.
std::array<ControlCheck, 7> reality_controls(const DensityMatrix& rho,
                                             double threshold = 0.5);
std::array<ControlCheck, 7> reality_controls_from_values(
    const std::vector<TermValue>& values, double threshold = 0.5);

// ---- error propagation ----

// Parity estimate from coincidence counts of one observable: the tallied
// value, its Poissonian standard error sqrt((1 - E^2)/N), and N.
struct TermEstimate {
    double value = 0.0;
    double sigma = 0.0;
    std::int64_t total = 0;
};

TermEstimate estimate_term(const PauliString& observable,
                           const std::array<std::int64_t, 16>& counts);

double parity_sigma(double expectation, std::int64_t total_counts);

}  // namespace c4sim
