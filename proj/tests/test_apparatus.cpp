#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "c4sim/apparatus.hpp"
#include "c4sim/qcore.hpp"
#include "c4sim/states.hpp"
#include "test_util.hpp"

using namespace c4sim;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.70710678118654752440;
const cd kI(0.0, 1.0);

bool is_unitary(const Mat2& u) {
    return (u.adjoint() * u - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-12;
}

}  // namespace

TEST_SUITE_BEGIN("apparatus");

TEST_CASE("wave plates are unitary retarders with the textbook limits") {
    for (double theta : {0.0, 0.3, kPi / 8, kPi / 4, 1.2}) {
        const Mat2 q = waveplate_jones(Waveplate::Quarter, theta);
        const Mat2 h = waveplate_jones(Waveplate::Half, theta);
        CHECK(is_unitary(q));
        CHECK(is_unitary(h));
        // Two quarter-wave passes make a half-wave plate; two half-wave
        // passes are the identity up to the global retarder phase.
        CHECK((q * q - h).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((h * h + Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }

    // Fast axis vertical: pure phases on (H, V).
    const Mat2 h0 = waveplate_jones(Waveplate::Half, 0.0);
    CHECK(std::abs(h0(0, 0) - kI) < 1e-15);
    CHECK(std::abs(h0(1, 1) + kI) < 1e-15);
    CHECK(std::abs(h0(0, 1)) < 1e-15);
    const Mat2 q0 = waveplate_jones(Waveplate::Quarter, 0.0);
    CHECK(std::abs(q0(0, 0) - std::exp(kI * (kPi / 4))) < 1e-15);
    CHECK(std::abs(q0(1, 1) - std::exp(-kI * (kPi / 4))) < 1e-15);

    // Half-wave plate at 45 degrees exchanges H and V.
    const Mat2 h45 = waveplate_jones(Waveplate::Half, kPi / 4);
    CHECK(std::abs(h45(0, 1) + kI) < 1e-12);
    CHECK(std::abs(h45(1, 0) + kI) < 1e-12);
    CHECK(std::abs(h45(0, 0)) < 1e-12);
}

TEST_CASE("beam splitter mode transform is unitary with the stated rows") {
    for (double phi : {0.0, kPi / 2, 1.1, -0.4}) {
        const Mat2 u = bs_mode_transform(phi);
        CHECK(is_unitary(u));
        CHECK(std::abs(u(0, 0) - kInvSqrt2) < 1e-12);
        CHECK(std::abs(u(0, 1) - std::exp(kI * phi) * kInvSqrt2) < 1e-12);
        CHECK(std::abs(u(1, 0) - kInvSqrt2) < 1e-12);
        CHECK(std::abs(u(1, 1) + std::exp(kI * phi) * kInvSqrt2) < 1e-12);
    }
    const Mat16 full = bs_transform(0.7, -0.2);
    const Mat16 expected = tensor4(Mat2::Identity(), Mat2::Identity(),
                                   bs_mode_transform(0.7), bs_mode_transform(-0.2));
    CHECK((full - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analyzer settings use the documented wave-plate angles") {
    const MeasurementSetting x = setting_for(PauliString::parse("X_AX_B"));
    CHECK(x.a.theta_q == doctest::Approx(kPi / 4));
    CHECK(x.a.theta_h == doctest::Approx(kPi / 8));
    CHECK(x.b.theta_q == doctest::Approx(kPi / 4));
    CHECK(x.b.theta_h == doctest::Approx(kPi / 8));
    CHECK_FALSE(x.bs_present);

    const MeasurementSetting y = setting_for(PauliString::parse("Y_AY_B"));
    CHECK(y.a.theta_q == doctest::Approx(0.0));
    CHECK(y.a.theta_h == doctest::Approx(kPi / 8));

    const MeasurementSetting z = setting_for(PauliString::parse("Z_AZ_B"));
    CHECK(z.a.theta_q == doctest::Approx(0.0));
    CHECK(z.a.theta_h == doctest::Approx(0.0));

    const MeasurementSetting swap = setting_for(PauliString::parse("X_AX_B"), true);
    CHECK(swap.a.theta_h == doctest::Approx(3 * kPi / 8));
    const MeasurementSetting zswap = setting_for(PauliString::parse("Z_AZ_B"), true);
    CHECK(zswap.a.theta_h == doctest::Approx(kPi / 4));

    const MeasurementSetting path = setting_for(PauliString::parse("x_Ay_B"));
    CHECK(path.bs_present);
    CHECK(path.a.phi == doctest::Approx(0.0));
    CHECK(path.b.phi == doctest::Approx(kPi / 2));

    CHECK_FALSE(setting_for(PauliString::parse("z_Az_B")).bs_present);
}

TEST_CASE("one beam splitter cannot serve an x/z-mixed path setting") {
    CHECK_THROWS_AS(setting_for(PauliString::parse("x_Az_B")),
                    std::invalid_argument);
    CHECK_THROWS_AS(setting_for(PauliString::parse("z_Ay_B")),
                    std::invalid_argument);
    CHECK_NOTHROW(setting_for(PauliString::parse("x_AZ_Bx_B")));
    CHECK_NOTHROW(setting_for(PauliString::parse("Z_Az_B")));
}

TEST_CASE("outcome probabilities form a distribution") {
    std::mt19937_64 rng(31);
    const DensityMatrix rho = test_util::random_density(rng);
    for (const char* label : {"X_Ax_AY_By_B", "Z_AZ_B", "z_Az_B", "Y_Az_AY_B"}) {
        const OutcomeProbabilities probs =
            outcome_probabilities(rho, setting_for(PauliString::parse(label)));
        CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
        for (double p : probs.p) CHECK(p >= 0.0);
    }
}

TEST_CASE("direct path detection resolves the cluster populations") {
    // All-Z analyzers without the beam splitter leave basis states on their
    // own detector combination, so only the four populated cluster indices
    // register coincidences.
    const DensityMatrix rho = density(cluster_state());
    const OutcomeProbabilities probs =
        outcome_probabilities(rho, setting_for(PauliString::parse("Z_AZ_B")));
    for (int o = 0; o < kDim; ++o) {
        const bool populated = (o == 1 || o == 2 || o == 13 || o == 14);
        CHECK(probs.p[o] == doctest::Approx(populated ? 0.25 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("port swap exchanges polarization outcomes without changing parities") {
    const DensityMatrix rho = density(cluster_state());
    const PauliString obs = PauliString::parse("Z_AZ_B");
    const OutcomeProbabilities plain = outcome_probabilities(rho, setting_for(obs));
    const OutcomeProbabilities swapped =
        outcome_probabilities(rho, setting_for(obs, true));
    for (int o = 0; o < kDim; ++o) {
        // Both polarization factors swap ports: outcome bits q1 and q2 flip.
        CHECK(swapped.p[o] == doctest::Approx(plain.p[o ^ 0b1100]).epsilon(1e-12));
    }
    const double direct = expectation(rho, obs);
    CHECK(expectation_from_outcomes(plain, setting_for(obs), obs) ==
          doctest::Approx(direct).epsilon(1e-12));
    CHECK(expectation_from_outcomes(swapped, setting_for(obs, true), obs) ==
          doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("every local operator is reconstructed from its own setting") {
    std::mt19937_64 rng(32);
    const char* locals[] = {"X_A", "Y_A", "Z_A", "X_B", "Y_B", "Z_B",
                            "x_A", "y_A", "z_A", "x_B", "y_B", "z_B"};
    for (int trial = 0; trial < 5; ++trial) {
        const DensityMatrix rho = test_util::random_density(rng);
        for (const char* label : locals) {
            const PauliString obs = PauliString::parse(label);
            const MeasurementSetting setting = setting_for(obs);
            const double got = expectation_from_outcomes(
                outcome_probabilities(rho, setting), setting, obs);
            CHECK(std::abs(got - expectation(rho, obs)) < 1e-12);
        }
    }
}

TEST_CASE("parity reconstruction equals the direct expectation for the table") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const DensityMatrix rho = test_util::random_density(rng);
        for (const TableRow& row : table_one()) {
            const PauliString obs = PauliString::parse(row.label);
            const MeasurementSetting setting = setting_for(obs);
            const double got = expectation_from_outcomes(
                outcome_probabilities(rho, setting), setting, obs);
            CHECK(std::abs(got - expectation(rho, obs)) < 1e-12);
        }
    }
}

TEST_CASE("parity queries reject a setting that does not diagonalize") {
    const MeasurementSetting x_setting = setting_for(PauliString::parse("X_A"));
    CHECK_THROWS_AS(
        outcome_parity(x_setting, PauliString::parse("Z_A"), 0),
        std::logic_error);
    CHECK_THROWS_AS(outcome_parity(x_setting, PauliString::parse("X_A"), -1),
                    std::invalid_argument);
    CHECK_THROWS_AS(outcome_parity(x_setting, PauliString::parse("X_A"), 16),
                    std::invalid_argument);
    // The observable's own setting yields +-1 parities on every outcome.
    for (int o = 0; o < kDim; ++o) {
        const double parity = outcome_parity(x_setting, PauliString::parse("X_A"), o);
        CHECK(std::abs(std::abs(parity) - 1.0) < 1e-12);
    }
}

TEST_CASE("simulated counts are deterministic with the expected scale") {
    const DensityMatrix rho = density(cluster_state());
    const PauliString obs = PauliString::parse("Z_AZ_B");
    const auto counts1 = simulate_outcome_counts(rho, obs, 20000.0, 99);
    const auto counts2 = simulate_outcome_counts(rho, obs, 20000.0, 99);
    CHECK(counts1 == counts2);
    const auto other_seed = simulate_outcome_counts(rho, obs, 20000.0, 100);
    CHECK(counts1 != other_seed);

    const std::int64_t total =
        std::accumulate(counts1.begin(), counts1.end(), std::int64_t{0});
    CHECK(std::abs(static_cast<double>(total) - 20000.0) < 5.0 * std::sqrt(20000.0));
    for (int o = 0; o < kDim; ++o) {
        const bool populated = (o == 1 || o == 2 || o == 13 || o == 14);
        if (!populated) CHECK(counts1[o] == 0);
    }
    CHECK_THROWS_AS(simulate_outcome_counts(rho, obs, 0.0, 1),
                    std::invalid_argument);
}

TEST_CASE("simulated parities agree with the model within counting error") {
    const DensityMatrix rho =
        apply_noise(cluster_state(), NoiseParams{0.9, 0.9, 0.0});
    const PauliString obs = PauliString::parse("X_Ax_AY_By_B");
    const auto counts = simulate_outcome_counts(rho, obs, 200000.0, 7);
    const MeasurementSetting setting = setting_for(obs);
    std::int64_t total = 0;
    double tally = 0.0;
    for (int o = 0; o < kDim; ++o) {
        total += counts[o];
        tally += outcome_parity(setting, obs, o) * static_cast<double>(counts[o]);
    }
    const double estimate = tally / static_cast<double>(total);
    const double truth = expectation(rho, obs);
    const double sigma = std::sqrt((1.0 - truth * truth) / static_cast<double>(total));
    CHECK(std::abs(estimate - truth) < 5.0 * sigma);
}

TEST_CASE("coherence envelope matches the filter arithmetic") {
    const CoherenceEnvelope env = coherence_envelope(6.0, 728.0);
    // Independent evaluation of tau = K lambda^2 / (c dlambda); the
    // time-bandwidth constant is anchored to the measured 150 fs dip width.
    const double tau_fs =
        0.5091 * (728e-9 * 728e-9) / (299792458.0 * 6e-9) * 1e15;
    CHECK(env.fwhm_time_fs == doctest::Approx(tau_fs).epsilon(1e-12));
    CHECK(env.fwhm_time_fs == doctest::Approx(150.0).epsilon(1e-4));
    CHECK(env.fwhm_length_um ==
          doctest::Approx(299792458.0 * tau_fs * 1e-15 * 1e6).epsilon(1e-12));
    CHECK(env.fwhm_length_um == doctest::Approx(44.969).epsilon(1e-4));
    CHECK_THROWS_AS(coherence_envelope(0.0, 728.0), std::invalid_argument);
    CHECK_THROWS_AS(coherence_envelope(6.0, -1.0), std::invalid_argument);
}

TEST_CASE("the ideal cluster dips to zero at equal path lengths") {
    const DensityMatrix rho = density(cluster_state());
    DelayScanOptions opt;
    const double lc = opt.envelope.fwhm_length_um;
    const std::vector<double> delays = {-4.0 * lc, -lc / 2, 0.0, lc / 2, 4.0 * lc};
    const std::vector<double> rates_h = delay_scan(rho, Polarization::H, delays, opt);
    REQUIRE(rates_h.size() == delays.size());

    CHECK(rates_h[2] == doctest::Approx(0.0).epsilon(1e-9));  // full dip
    // The envelope is Gaussian in the displacement with FWHM equal to the
    // coherence length: at half the coherence length the dip has half depth.
    CHECK(rates_h[1] == doctest::Approx(opt.baseline_rate / 2).epsilon(1e-9));
    CHECK(rates_h[3] == doctest::Approx(opt.baseline_rate / 2).epsilon(1e-9));
    // Far outside the envelope the monitored pair sits at the baseline.
    CHECK(rates_h[0] == doctest::Approx(opt.baseline_rate).epsilon(1e-6));
    CHECK(rates_h[4] == doctest::Approx(opt.baseline_rate).epsilon(1e-6));

    // V-polarized projection sees the antisymmetric path state: a peak.
    const std::vector<double> rates_v = delay_scan(rho, Polarization::V, delays, opt);
    CHECK(rates_v[2] == doctest::Approx(2.0 * opt.baseline_rate).epsilon(1e-9));
    // H and V rates sum to a constant at every displacement.
    for (std::size_t i = 0; i < delays.size(); ++i) {
        CHECK(rates_h[i] + rates_v[i] ==
              doctest::Approx(2.0 * opt.baseline_rate).epsilon(1e-9));
    }
}

TEST_CASE("scan visibility follows the noise closed form") {
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const StateVector c4 = cluster_state();

    CHECK(scan_visibility(density(c4), Polarization::H) ==
          doctest::Approx(1.0).epsilon(1e-12));

    for (int trial = 0; trial < 8; ++trial) {
        const NoiseParams np{0.2 + 0.8 * uniform(rng), uniform(rng),
                             0.8 * uniform(rng)};
        const DensityMatrix rho = apply_noise(c4, np);
        const double expected =
            2.0 * (1.0 - np.z_err) * np.v_pol * np.mu_mom /
            ((1.0 - np.z_err) * (1.0 + np.v_pol) + np.z_err);
        CHECK(scan_visibility(rho, Polarization::H) ==
              doctest::Approx(expected).epsilon(1e-10));
        // The V projection sees the same contrast with the opposite sign of
        // the coherence; visibility is identical.
        CHECK(scan_visibility(rho, Polarization::V) ==
              doctest::Approx(expected).epsilon(1e-10));
    }

    // Monitoring the complementary pair flips dip and peak, same contrast.
    DelayScanOptions flipped;
    flipped.a_port = 1;
    flipped.b_port = 0;
    const DensityMatrix noisy = apply_noise(c4, NoiseParams{0.9, 0.85, 0.05});
    CHECK(scan_visibility(noisy, Polarization::H, flipped) ==
          doctest::Approx(scan_visibility(noisy, Polarization::H)).epsilon(1e-12));
}

TEST_CASE("scans reject impossible configurations") {
    const DensityMatrix rho = density(cluster_state());
    DelayScanOptions bad;
    bad.a_port = 2;
    CHECK_THROWS_AS(delay_scan(rho, Polarization::H, {0.0}, bad),
                    std::invalid_argument);
    DelayScanOptions negative;
    negative.baseline_rate = 0.0;
    CHECK_THROWS_AS(delay_scan(rho, Polarization::H, {0.0}, negative),
                    std::invalid_argument);

    // A state with no H component registers no H coincidences at all.
    const DensityMatrix v_only = density(StateVector::basis(0b1101));
    CHECK_THROWS_AS(delay_scan(v_only, Polarization::H, {0.0}),
                    std::domain_error);
}

TEST_SUITE_END();
