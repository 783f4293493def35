#pragma once

// Two-photon polarization tomography: simulated coincidence counts for the
// sixteen standard product projectors, maximum-likelihood reconstruction
// under a Poisson counting model, and parametric-bootstrap error bars.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "c4sim/qcore.hpp"
#include "c4sim/states.hpp"

namespace c4sim {

// One tomography acquisition: counts accumulated for time_s seconds with
// both analyzers projecting on the named product state.
struct CountsRecord {
    std::string setting_id;
    std::string projector;  // two letters from {H, V, D, L}, photon A first
    std::int64_t counts = 0;
    double time_s = 1.0;
};

struct ProjectorSetting {
    std::string label;
    Vec4 ket;  // product projector |k_A> x |k_B>, photon A major
};

// H, V, D = (H+V)/sqrt(2), L = (H+iV)/sqrt(2) on each photon: the standard
// informationally complete set of sixteen product projectors.
const std::array<ProjectorSetting, 16>& standard_projectors();

// Poisson counts for every standard projector; projector s draws with mean
// mean_total * <k_s|rho|k_s>. Deterministic in the seed.
std::vector<CountsRecord> simulate_counts(const DensityMatrix4& rho,
                                          double mean_total, std::uint64_t seed,
                                          double time_s = 10.0);

struct TomographyResult {
    DensityMatrix4 rho = DensityMatrix4::maximally_mixed();
    double log_likelihood = 0.0;  // Poisson model at the fitted intensity
    int iterations = 0;
    bool converged = false;
    bool complete_set = false;  // projectors span the Hermitian 4x4 space
};

// Maximum-likelihood state: rho = T^dag T / tr(T^dag T) over lower-triangular
// T, scored by the Poisson likelihood of the records with the overall
// intensity profiled out. Multiplicative likelihood ascent with backtracking
// from the maximally mixed state; deterministic. Physicality holds by
// construction.
TomographyResult mle_reconstruct(const std::vector<CountsRecord>& records);

struct ErrorBars {
    Eigen::Matrix4d sigma_real;   // entrywise std of Re(rho)
    Eigen::Matrix4d sigma_imag;   // entrywise std of Im(rho)
    double fidelity_sigma = 0.0;  // std of the fidelity to the target ket
    int replicas = 0;
};

// Parametric bootstrap: each replica redraws every record's counts from a
// Poisson law centered on the observed value and re-runs the reconstruction.
// Deterministic in the seed; requires at least two replicas.
ErrorBars error_bars(const std::vector<CountsRecord>& records,
                     const Vec4& fidelity_target, int replicas,
                     std::uint64_t seed);

// Tomography of one path sector of the full two-photon state.
struct SectorTomography {
    PathSector sector;
    double probability = 0.0;       // weight of the sector in the full state
    std::string target_label;
    Vec4 target = Vec4::Zero();     // Bell state this sector should carry
    std::vector<CountsRecord> records;
    TomographyResult result;
    double fidelity = 0.0;          // reconstruction vs target
};

// Condition on each path sector (r_A l_B first, then l_A r_B), simulate
// counts and reconstruct. Sector seeds are derived from the given one.
std::array<SectorTomography, 2> reconstruct_sectors(const DensityMatrix& rho,
                                                    double mean_total,
                                                    std::uint64_t seed);

}  // namespace c4sim
