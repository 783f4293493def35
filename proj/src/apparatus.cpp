#include "c4sim/apparatus.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "c4sim/tolerances.hpp"

namespace c4sim {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfLight = 299792458.0;  // m/s
// Time-bandwidth product of the coincidence dip for the near-Gaussian filter
// line, anchored so a 6 nm filter at 728 nm gives a 150 fs FWHM.
constexpr double kTimeBandwidth = 0.5091;

Mat2 identity2() { return Mat2::Identity(); }

// Polarization analyzer of one photon: PBS preceded by HWP and QWP.
Mat2 analyzer_jones(const PhotonSetting& s) {
    return waveplate_jones(Waveplate::Half, s.theta_h) *
           waveplate_jones(Waveplate::Quarter, s.theta_q);
}

Mat2 path_transform(const MeasurementSetting& setting, const PhotonSetting& s) {
    return setting.bs_present ? bs_mode_transform(s.phi) : identity2();
}

// Slot order (q1..q4) is B-pol, A-pol, A-path, B-path.
Mat16 total_transform(const MeasurementSetting& s) {
    return tensor4(analyzer_jones(s.b), analyzer_jones(s.a),
                   path_transform(s, s.a), path_transform(s, s.b));
}

Mat2 slot_transform(const MeasurementSetting& s, int slot) {
    switch (slot) {
        case 1: return analyzer_jones(s.b);
        case 2: return analyzer_jones(s.a);
        case 3: return path_transform(s, s.a);
        case 4: return path_transform(s, s.b);
        default: throw std::invalid_argument("slot must be 1..4");
    }
}

PhotonSetting polarization_angles(Pauli op, bool swap_ports) {
    PhotonSetting s;
    switch (op) {
        case Pauli::X:
            s.theta_q = kPi / 4;
            s.theta_h = swap_ports ? 3 * kPi / 8 : kPi / 8;
            break;
        case Pauli::Y:
            s.theta_q = 0.0;
            s.theta_h = swap_ports ? 3 * kPi / 8 : kPi / 8;
            break;
        case Pauli::Z:
        case Pauli::I:
            s.theta_q = 0.0;
            s.theta_h = swap_ports ? kPi / 4 : 0.0;
            break;
    }
    return s;
}

}  // namespace

Mat2 waveplate_jones(Waveplate kind, double theta_from_vertical) {
    const double delta = kind == Waveplate::Quarter ? kPi / 2 : kPi;
    Eigen::Vector2d axis(std::sin(theta_from_vertical),
                         std::cos(theta_from_vertical));
    const Mat2 fast = (axis * axis.transpose()).cast<cd>();
    const cd ef = std::exp(cd(0.0, -delta / 2));
    const cd es = std::exp(cd(0.0, delta / 2));
    return ef * fast + es * (Mat2::Identity() - fast);
}

Mat2 bs_mode_transform(double phi) {
    const cd e = std::exp(cd(0.0, phi));
    Mat2 u;
    u << 1.0, e, 1.0, -e;
    return u / std::sqrt(2.0);
}

Mat16 bs_transform(double phi_a, double phi_b) {
    return tensor4(identity2(), identity2(), bs_mode_transform(phi_a),
                   bs_mode_transform(phi_b));
}

MeasurementSetting setting_for(const PauliString& observable, bool swap_ports) {
    MeasurementSetting s;
    s.a = polarization_angles(observable.slots[1], swap_ports);
    s.b = polarization_angles(observable.slots[0], swap_ports);

    const Pauli path_a = observable.slots[2];
    const Pauli path_b = observable.slots[3];
    bool needs_bs = false;
    bool needs_direct = false;
    for (Pauli op : {path_a, path_b}) {
        if (op == Pauli::X || op == Pauli::Y) needs_bs = true;
        if (op == Pauli::Z) needs_direct = true;
    }
    if (needs_bs && needs_direct) {
        throw std::invalid_argument(
            "observable " + observable.name() +
            " mixes interferometric and direct path analysis; the common "
            "beam splitter cannot serve one photon and not the other");
    }
    s.bs_present = needs_bs;
    s.a.phi = path_a == Pauli::Y ? kPi / 2 : 0.0;
    s.b.phi = path_b == Pauli::Y ? kPi / 2 : 0.0;
    return s;
}

double OutcomeProbabilities::sum() const {
    double total = 0.0;
    for (double v : p) total += v;
    return total;
}

OutcomeProbabilities outcome_probabilities(const DensityMatrix& rho,
                                           const MeasurementSetting& setting) {
    const Mat16 u = total_transform(setting);
    const Mat16 rotated = u * rho.matrix() * u.adjoint();
    OutcomeProbabilities out;
    for (int o = 0; o < kDim; ++o) {
        double p = rotated(o, o).real();
        if (p < 0.0) {
            if (p < -1e-12)
                throw std::logic_error("negative outcome probability");
            p = 0.0;
        }
        out.p[o] = p;
    }
    if (std::abs(out.sum() - 1.0) > 1e-9)
        throw std::logic_error("outcome probabilities do not sum to one");
    return out;
}

double outcome_parity(const MeasurementSetting& setting,
                      const PauliString& observable, int outcome) {
    if (outcome < 0 || outcome >= kDim)
        throw std::invalid_argument("outcome must be 0..15");
    double parity = 1.0;
    for (int slot = 1; slot <= kNumQubits; ++slot) {
        const Pauli op = observable.slots[slot - 1];
        if (op == Pauli::I) continue;
        const Mat2 u = slot_transform(setting, slot);
        Eigen::Vector2cd port = Eigen::Vector2cd::Zero();
        port(slot_bit(outcome, slot)) = 1.0;
        // Detector port back-propagated through the analyzer; the port is an
        // eigenvector exactly when the setting diagonalizes the factor.
        const Eigen::Vector2cd e = u.adjoint() * port;
        const cd lambda = e.dot(pauli_matrix(op) * e);
        if (std::abs(lambda.imag()) > 1e-9 ||
            std::abs(std::abs(lambda.real()) - 1.0) > 1e-7) {
            throw std::logic_error("setting does not diagonalize " +
                                   observable.name());
        }
        parity *= lambda.real() > 0.0 ? 1.0 : -1.0;
    }
    return parity;
}

double expectation_from_outcomes(const OutcomeProbabilities& probs,
                                 const MeasurementSetting& setting,
                                 const PauliString& observable) {
    double value = 0.0;
    for (int o = 0; o < kDim; ++o)
        value += probs.p[o] * outcome_parity(setting, observable, o);
    return observable.coefficient * value;
}

std::array<std::int64_t, 16> simulate_outcome_counts(const DensityMatrix& rho,
                                                     const PauliString& observable,
                                                     double mean_total,
                                                     std::uint64_t seed) {
    if (!(mean_total > 0.0) || !std::isfinite(mean_total))
        throw std::invalid_argument("mean_total must be positive and finite");
    const OutcomeProbabilities probs =
        outcome_probabilities(rho, setting_for(observable));
    std::mt19937_64 rng(seed);
    std::array<std::int64_t, 16> counts{};
    for (int o = 0; o < kDim; ++o) {
        const double mean = mean_total * probs.p[o];
        if (mean <= 0.0) {
            counts[o] = 0;
            continue;
        }
        std::poisson_distribution<std::int64_t> draw(mean);
        counts[o] = draw(rng);
    }
    return counts;
}

CoherenceEnvelope coherence_envelope(double bandwidth_nm, double center_nm) {
    if (!(bandwidth_nm > 0.0) || !(center_nm > 0.0))
        throw std::invalid_argument("filter bandwidth and center must be positive");
    const double lambda = center_nm * 1e-9;
    const double dlambda = bandwidth_nm * 1e-9;
    const double dnu = kSpeedOfLight * dlambda / (lambda * lambda);
    const double tau = kTimeBandwidth / dnu;
    return {tau * 1e15, kSpeedOfLight * tau * 1e6};
}

namespace {

// Momentum-space density of both photons conditioned (unnormalized) on the
// polarization pair (pol, pol); index is A-path * 2 + B-path.
Mat4 momentum_block(const DensityMatrix& rho, Polarization pol) {
    const int bit = pol == Polarization::V ? 1 : 0;
    const int base = bit * 12;  // q1 = q2 = bit
    Mat4 block;
    for (int m1 = 0; m1 < 4; ++m1)
        for (int m2 = 0; m2 < 4; ++m2)
            block(m1, m2) = rho.matrix()(base + m1, base + m2);
    return block;
}

// Both l modes travel the extra trombone path; coherence between amplitudes
// that differ in whether a photon was delayed decays with the single-photon
// Gaussian overlap g, so elements differing in both photons decay with g^2.
Mat4 damp_coherences(const Mat4& block, double delta_um, double fwhm_um) {
    const double x = delta_um / fwhm_um;
    const double g = std::exp(-2.0 * std::log(2.0) * x * x);
    Mat4 damped = block;
    for (int m1 = 0; m1 < 4; ++m1) {
        for (int m2 = 0; m2 < 4; ++m2) {
            int differing = 0;
            if (((m1 >> 1) & 1) != ((m2 >> 1) & 1)) ++differing;
            if ((m1 & 1) != (m2 & 1)) ++differing;
            for (int k = 0; k < differing; ++k) damped(m1, m2) *= g;
        }
    }
    return damped;
}

double pair_probability(const Mat4& block, const DelayScanOptions& opt,
                        int a_port, int b_port) {
    const Mat4 u = kron(bs_mode_transform(opt.phi_a).eval(),
                        bs_mode_transform(opt.phi_b).eval());
    const int out = a_port * 2 + b_port;
    return (u * block * u.adjoint())(out, out).real();
}

void validate_scan_options(const DelayScanOptions& opt) {
    if ((opt.a_port != 0 && opt.a_port != 1) ||
        (opt.b_port != 0 && opt.b_port != 1))
        throw std::invalid_argument("detector ports must be 0 (l') or 1 (r')");
    if (!(opt.envelope.fwhm_length_um > 0.0))
        throw std::invalid_argument("coherence length must be positive");
    if (!(opt.baseline_rate > 0.0))
        throw std::invalid_argument("baseline rate must be positive");
}

}  // namespace

std::vector<double> delay_scan(const DensityMatrix& rho, Polarization pol,
                               const std::vector<double>& delays_um,
                               const DelayScanOptions& options) {
    validate_scan_options(options);
    const Mat4 block = momentum_block(rho, pol);
    // Far-delay limit: every path coherence is gone.
    const Mat4 incoherent = block.diagonal().asDiagonal();
    const double far =
        pair_probability(incoherent, options, options.a_port, options.b_port);
    if (far <= 1e-15)
        throw std::domain_error(
            "monitored pair registers no far-delay coincidences");
    std::vector<double> rates;
    rates.reserve(delays_um.size());
    for (double d : delays_um) {
        const Mat4 damped =
            damp_coherences(block, d, options.envelope.fwhm_length_um);
        const double p =
            pair_probability(damped, options, options.a_port, options.b_port);
        rates.push_back(options.baseline_rate * p / far);
    }
    return rates;
}

double scan_visibility(const DensityMatrix& rho, Polarization pol,
                       const DelayScanOptions& options) {
    validate_scan_options(options);
    const Mat4 block = momentum_block(rho, pol);
    const double p1 =
        pair_probability(block, options, options.a_port, options.b_port);
    const double p2 =
        pair_probability(block, options, options.a_port, 1 - options.b_port);
    if (p1 + p2 <= 1e-15)
        throw std::domain_error("monitored ports register no coincidences");
    return std::abs(p1 - p2) / (p1 + p2);
}

}  // namespace c4sim
