#pragma once

// State construction and the calibrated noise model.
//
// The simulated source emits photon pairs entangled in polarization and in
// linear momentum (path). The polarization Bell pair combined with a path
// Bell pair forms the hyperentangled state; a half-wave plate crossing only
// the r_A path turns it into the four-qubit linear cluster state.

#include <array>
#include <string>
#include <vector>

#include "c4sim/qcore.hpp"

namespace c4sim {

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };
enum class Dof { Polarization, Path };

// Two-qubit Bell fragment with photon A's slot first:
// polarization order (HH, HV, VH, VV), path order (ll, lr, rl, rr).
// Sign conventions follow the source experiment:
//   polarization Psi-  = (|HV> - |VH>)/sqrt(2)
//   path          Psi+- = (|r l> +- |l r>)/sqrt(2)   (note the r-first order,
// so the path Psi- is (0,-1,+1,0)/sqrt(2) in the ordering above).
Vec4 bell_state(BellKind kind, Dof dof);

// Assemble a product of a polarization fragment and a path fragment
// (both A-major) into the canonical four-qubit ordering.
StateVector assemble_product(const Vec4& polarization, const Vec4& path);

// |Xi> = |Phi->_pol (x) |psi+>_path, the state before the cluster gate.
StateVector hyperentangled_state();

// Half-wave plate crossing only the r_A path, optical axis vertical: flips
// the sign of every amplitude with photon A vertical AND on path r. In the
// canonical encoding (V,r -> 1) this is exactly a controlled-Z between
// slots q2 and q3.
StateVector apply_hw_cp(const StateVector& psi);
Mat16 hw_cp_matrix();

// The four-qubit linear cluster state |C4> = hw_cp(|Xi>).
StateVector cluster_state();

// Relabeling that maps the physical cluster to the standard linear-cluster
// form: a bit flip (X) on slot q3. Involution.
StateVector logical_map(const StateVector& psi);

// 1/2 (|0000> + |1100> + |0011> - |1111>), the standard linear cluster the
// logical map produces from |C4>.
StateVector reference_linear_cluster();

// The two populated path sectors of the cluster state.
// RL: photon A on path r, photon B on path l. LR: the converse.
enum class PathSector { RL, LR };

struct ConditionedPolarization {
    DensityMatrix4 state;  // polarization pair, A-major ordering
    double probability;    // weight of the sector before renormalization
};

// Project onto a path sector and return the renormalized two-qubit
// polarization state. Throws if the sector has (numerically) zero weight.
ConditionedPolarization sector_conditioned_polarization(const DensityMatrix& rho,
                                                        PathSector sector);

// Three-parameter noise family calibrated against the measured correlations:
//  - v_pol: within each path sector the polarization pair is mixed with
//    white noise, surviving with weight v_pol;
//  - mu_mom: dephasing in the path basis; in particular the coherence
//    between the r_A l_B and l_A r_B sectors is multiplied by mu_mom;
//  - z_err: population leaked into the nominally empty l_A l_B and r_A r_B
//    sectors (white in polarization, split evenly between the two).
struct NoiseParams {
    double v_pol = 1.0;
    double mu_mom = 1.0;
    double z_err = 0.0;
};

// Apply the noise channel to a pure state. Output is a valid density matrix
// for every parameter combination in [0,1]^3; parameters outside that box
// are rejected.
DensityMatrix apply_noise(const StateVector& psi, const NoiseParams& params);

// One row of the published correlation table: an observable label, the
// measured expectation value, its quoted uncertainty, and membership flags
// for the witness sum (W), the nonlocality sum (S) and the element-of-reality
// controls (C).
struct TableRow {
    std::string label;
    double value;
    double sigma;
    bool in_witness;
    bool in_avn;
    bool in_control;
};

// The eleven measured correlations, in publication order.
const std::array<TableRow, 11>& table_one();

// A calibration target: either one of the eleven observable labels above or
// one of the two tomography-fidelity anchors below.
struct ObservableTarget {
    std::string label;
    double value;
    double sigma;
};

inline constexpr const char* kFidelityPhiPlusLabel = "F_PHI_PLUS";
inline constexpr const char* kFidelityPhiMinusLabel = "F_PHI_MINUS";

// Published sector-tomography fidelities used as calibration anchors.
inline constexpr double kFidelityPhiPlus = 0.9068;
inline constexpr double kFidelityPhiPlusSigma = 0.0035;
inline constexpr double kFidelityPhiMinus = 0.9131;
inline constexpr double kFidelityPhiMinusSigma = 0.0032;

// Default target set: the eleven table rows plus the two fidelity anchors.
// The fidelity anchors matter: the published correlation table and the
// published tomography session disagree at the half-percent level, and a fit
// over the table alone lands the model's sector fidelities ~0.025 above the
// tomography values. Including the anchors pulls the compromise inside the
// published error budget on both sides.
std::vector<ObservableTarget> default_calibration_targets();

// Model prediction for a single target label under the given parameters.
double noise_model_prediction(const NoiseParams& params, const std::string& label);

struct CalibrationResult {
    NoiseParams params;
    std::vector<std::string> labels;
    std::vector<double> residuals;  // model - target, per label
    bool converged = false;
    int iterations = 0;
    double cost = 0.0;  // sum of squared residuals at the optimum

    double max_abs_residual() const;
    // Residuals restricted to the eleven observable rows (fidelity anchors
    // excluded), the quantity the acceptance gate bounds.
    double max_abs_observable_residual() const;
};

// Equal-weight least squares over (v_pol, mu_mom, z_err) within [0,1]^3.
// Requires at least the eleven table observables among the targets; reports
// residuals even when the iteration limit is hit (converged = false).
CalibrationResult calibrate_noise(const std::vector<ObservableTarget>& targets);

}  // namespace c4sim
