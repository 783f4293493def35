#pragma once

// Optical analysis apparatus: wave-plate polarization analyzers, the common
// beam splitter with per-input glass-plate phases, and the delayed-path
// interference scan.
//
// Analyzer chain per photon: quarter-wave plate, then half-wave plate, then
// a polarizing beam splitter whose transmitted port passes |H>. Wave-plate
// fast-axis angles are measured from the vertical. Path analysis: a glass
// plate imprints phase phi on the r mode, then the beam splitter sends
// (|l> + e^{-i phi}|r>)/sqrt(2) to its l' output and the orthogonal
// combination to r'. Without the beam splitter the path modes are detected
// directly (l' = l, r' = r).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "c4sim/qcore.hpp"

namespace c4sim {

enum class Waveplate { Quarter, Half };

// Jones matrix in the (H, V) basis for a retarder with the given fast-axis
// angle from the vertical. Quarter: retardance pi/2; half: pi.
Mat2 waveplate_jones(Waveplate kind, double theta_from_vertical);

// Single-photon path-mode unitary of glass plate + beam splitter,
// rows (l', r'), columns (l, r).
Mat2 bs_mode_transform(double phi);

// Full 16x16 unitary: identity on both polarization slots, the mode
// transform with phase phi_a on photon A's path, phi_b on photon B's.
Mat16 bs_transform(double phi_a, double phi_b);

struct PhotonSetting {
    double theta_q = 0.0;  // QWP fast axis from vertical
    double theta_h = 0.0;  // HWP fast axis from vertical
    double phi = 0.0;      // glass-plate phase on this photon's r mode
};

struct MeasurementSetting {
    PhotonSetting a;
    PhotonSetting b;
    bool bs_present = false;
};

// Apparatus configuration measuring a product observable built from the
// twelve local operators. Each polarization/path factor fixes that photon's
// wave-plate angles resp. glass phase; any x/y path factor requires the beam
// splitter, while z path factors require its absence — mixing the two kinds
// across photons is not realizable with the single common beam splitter and
// is rejected. swap_ports selects the complementary half-wave-plate angle
// (pi/8 <-> 3pi/8, 0 <-> pi/4), which exchanges the PBS output ports.
MeasurementSetting setting_for(const PauliString& observable,
                               bool swap_ports = false);

// Probabilities of the sixteen coincidence outcomes under a setting.
// Outcome index decodes like a basis index: bits (q1..q4) are the detector
// ports (B polarization, A polarization, A path, B path), 0 = transmitted
// PBS port resp. l' output.
struct OutcomeProbabilities {
    std::array<double, 16> p;

    double sum() const;
};

OutcomeProbabilities outcome_probabilities(const DensityMatrix& rho,
                                           const MeasurementSetting& setting);

// Product of the +-1 eigenvalues the observable's non-identity factors take
// at the detector ports of the given outcome (coefficient not included).
// Throws when the setting does not diagonalize the observable.
double outcome_parity(const MeasurementSetting& setting,
                      const PauliString& observable, int outcome);

// Parity-weighted sum  coefficient * sum_o parity(o) p(o) — the expectation
// value reconstructed exactly the way the experiment tallies coincidences.
double expectation_from_outcomes(const OutcomeProbabilities& probs,
                                 const MeasurementSetting& setting,
                                 const PauliString& observable);

// Poisson coincidence counts for one observable: outcome o receives a draw
// with mean mean_total * p(o). Deterministic in the seed.
std::array<std::int64_t, 16> simulate_outcome_counts(const DensityMatrix& rho,
                                                     const PauliString& observable,
                                                     double mean_total,
                                                     std::uint64_t seed);

// Two-photon coherence envelope implied by the interference filter.
struct CoherenceEnvelope {
    double fwhm_time_fs;
    double fwhm_length_um;
};

// FWHM coherence time/length for a filter bandwidth (nm) at a center
// wavelength (nm). Uses a fixed time-bandwidth product anchored to the
// measured dip width (~150 fs for 6 nm at 728 nm). Throws on nonpositive
// arguments.
CoherenceEnvelope coherence_envelope(double bandwidth_nm, double center_nm);

enum class Polarization { H, V };

struct DelayScanOptions {
    // Monitored coincidence pair: photon A's detector port and photon B's
    // (0 = l', 1 = r'). The default cross pair dips for H-polarized photons
    // on the ideal cluster state.
    int a_port = 0;
    int b_port = 1;
    double baseline_rate = 1000.0;  // far-delay rate of the monitored pair
    CoherenceEnvelope envelope{150.0, 44.97};
    double phi_a = 0.0;
    double phi_b = 0.0;
};

// Coincidence rate of the monitored pair versus trombone displacement
// (micrometers), with both photons projected onto the given polarization.
// The displacement delays both l modes; coherence between path amplitudes
// decays under the Gaussian envelope.
std::vector<double> delay_scan(const DensityMatrix& rho, Polarization pol,
                               const std::vector<double>& delays_um,
                               const DelayScanOptions& options = {});

// Dip/peak contrast at zero delay: |r1 - r2| / (r1 + r2) between the
// monitored pair and the pair with photon B's port flipped.
double scan_visibility(const DensityMatrix& rho, Polarization pol,
                       const DelayScanOptions& options = {});

}  // namespace c4sim
