#include "c4sim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "c4sim/apparatus.hpp"
#include "c4sim/states.hpp"

namespace c4sim {
namespace {

const TermValue& find_value(const std::vector<TermValue>& values,
                            const std::string& label) {
    for (const auto& v : values)
        if (v.label == label) return v;
    throw std::invalid_argument("missing tabulated value for " + label);
}

const ObservableCounts& find_counts(const std::vector<ObservableCounts>& counts,
                                    const std::string& label) {
    for (const auto& c : counts)
        if (c.observable.name() == label) return c;
    throw std::invalid_argument("missing counts for " + label);
}

TermValue term_from_counts(const std::vector<ObservableCounts>& counts,
                           const std::string& label) {
    const ObservableCounts& c = find_counts(counts, label);
    const TermEstimate est = estimate_term(c.observable, c.counts);
    return {label, est.value, est.sigma};
}

template <std::size_t N>
std::array<TermValue, N> exact_terms(
    const DensityMatrix& rho, const std::array<WitnessTermSpec, N>& specs) {
    std::array<TermValue, N> terms;
    for (std::size_t i = 0; i < N; ++i)
        terms[i] = {specs[i].label,
                    expectation(rho, PauliString::parse(specs[i].label)), 0.0};
    return terms;
}

template <std::size_t N>
std::array<TermValue, N> tabulated_terms(
    const std::vector<TermValue>& values,
    const std::array<WitnessTermSpec, N>& specs) {
    std::array<TermValue, N> terms;
    for (std::size_t i = 0; i < N; ++i) terms[i] = find_value(values, specs[i].label);
    return terms;
}

template <std::size_t N>
std::array<TermValue, N> counted_terms(
    const std::vector<ObservableCounts>& counts,
    const std::array<WitnessTermSpec, N>& specs) {
    std::array<TermValue, N> terms;
    for (std::size_t i = 0; i < N; ++i)
        terms[i] = term_from_counts(counts, specs[i].label);
    return terms;
}

double quadrature(const TermValue* terms, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += terms[i].sigma * terms[i].sigma;
    return std::sqrt(s);
}

struct ControlSpec {
    const char* label;
    int expected_sign;
};

const std::array<ControlSpec, 7>& control_specs() {
    static const std::array<ControlSpec, 7> specs = {{
        {"X_Az_AX_B", -1},
        {"z_Az_B", -1},
        {"x_AZ_Bx_B", +1},
        {"Z_Ay_Ay_B", +1},
        {"Y_Az_AY_B", +1},
        {"X_AX_Bz_B", +1},
        {"Y_AY_Bz_B", -1},
    }};
    return specs;
}

ControlCheck make_control(const ControlSpec& spec, double value, double sigma,
                          double threshold) {
    ControlCheck check;
    check.label = spec.label;
    check.value = value;
    check.sigma = sigma;
    check.expected_sign = spec.expected_sign;
    check.sign_consistent = value * spec.expected_sign > 0.0;
    check.definite = std::abs(value) >= threshold;
    return check;
}

}  // namespace

const std::array<WitnessTermSpec, 6>& witness_term_specs() {
    static const std::array<WitnessTermSpec, 6> specs = {{
        {"Z_AZ_B", -1.0},
        {"Z_Ax_Ax_B", -1.0},
        {"X_Az_AX_B", +1.0},
        {"z_Az_B", +1.0},
        {"x_AZ_Bx_B", -1.0},
        {"X_AX_Bz_B", -1.0},
    }};
    return specs;
}

double WitnessReport::value() const {
    const auto& specs = witness_term_specs();
    double weighted = 4.0;
    for (std::size_t i = 0; i < terms.size(); ++i)
        weighted += specs[i].coefficient * terms[i].value;
    return weighted / 2.0;
}

double WitnessReport::sigma() const {
    return quadrature(terms.data(), terms.size()) / 2.0;
}

double WitnessReport::fidelity_lower_bound() const {
    return fidelity_bound(value());
}

WitnessReport witness(const DensityMatrix& rho) {
    return {exact_terms(rho, witness_term_specs()), "exact"};
}

WitnessReport witness_from_values(const std::vector<TermValue>& values) {
    return {tabulated_terms(values, witness_term_specs()), "table"};
}

WitnessReport witness_from_counts(const std::vector<ObservableCounts>& counts) {
    return {counted_terms(counts, witness_term_specs()), "counts"};
}

double fidelity_bound(double witness_value) {
    return (1.0 - witness_value) / 2.0;
}

Mat16 witness_operator() {
    Mat16 w = 4.0 * Mat16::Identity();
    for (const auto& spec : witness_term_specs())
        w += spec.coefficient * PauliString::parse(spec.label).matrix();
    return w / 2.0;
}

Mat16 projector_witness_operator() {
    const Vec16 amps = cluster_state().amplitudes();
    return 0.5 * Mat16::Identity() - amps * amps.adjoint();
}

double witness_dominance_min_eigenvalue() {
    const Mat16 gap = witness_operator() - 2.0 * projector_witness_operator();
    const Mat16 herm = (gap + gap.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat16> solver(herm,
                                                Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

const std::array<WitnessTermSpec, 4>& avn_term_specs() {
    static const std::array<WitnessTermSpec, 4> specs = {{
        {"X_AX_Bz_B", +1.0},
        {"Y_AY_Bz_B", -1.0},
        {"X_Ax_AY_By_B", +1.0},
        {"Y_Ax_AX_By_B", +1.0},
    }};
    return specs;
}

double AvnReport::value() const {
    const auto& specs = avn_term_specs();
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i)
        s += specs[i].coefficient * terms[i].value;
    return s;
}

double AvnReport::sigma() const { return quadrature(terms.data(), terms.size()); }

double AvnReport::sigmas_above_classical(std::optional<double> sigma_override) const {
    const double s = sigma_override.value_or(sigma());
    if (!(s > 0.0))
        throw std::domain_error("sigma must be positive to express a distance");
    return (value() - kAvnClassicalBound) / s;
}

AvnReport avn(const DensityMatrix& rho) {
    return {exact_terms(rho, avn_term_specs()), "exact"};
}

AvnReport avn_from_values(const std::vector<TermValue>& values) {
    return {tabulated_terms(values, avn_term_specs()), "table"};
}

AvnReport avn_from_counts(const std::vector<ObservableCounts>& counts) {
    return {counted_terms(counts, avn_term_specs()), "counts"};
}

ClassicalAvnMaximum classical_avn_maximum() {
    // Deterministic +-1 assignments, bit order X_A, Y_A, x_A, X_B, Y_B, y_B, z_B.
    ClassicalAvnMaximum best{-4.0, 0};
    for (int a = 0; a < (1 << 7); ++a) {
        const auto sign = [a](int bit) { return (a >> bit) & 1 ? 1 : -1; };
        const int xa = sign(0), ya = sign(1), ma = sign(2);
        const int xb = sign(3), yb = sign(4), mb = sign(5), zb = sign(6);
        const int s = xa * xb * zb - ya * yb * zb + xa * ma * yb * mb +
                      ya * ma * xb * mb;
        if (s > best.max_value) best = {static_cast<double>(s), a};
    }
    return best;
}

std::array<StabilizerCheck, 9> stabilizer_check(const StateVector& psi) {
    struct Entry {
        const char* label;
        double eigenvalue;
    };
    static const std::array<Entry, 9> entries = {{
        {"X_Az_AX_B", -1.0},
        {"z_Az_B", -1.0},
        {"x_AZ_Bx_B", +1.0},
        {"Z_Ay_Ay_B", +1.0},
        {"Y_Az_AY_B", +1.0},
        {"X_AX_Bz_B", +1.0},
        {"Y_AY_Bz_B", -1.0},
        {"X_Ax_AY_By_B", +1.0},
        {"Y_Ax_AX_By_B", +1.0},
    }};
    std::array<StabilizerCheck, 9> checks;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const PauliString obs = PauliString::parse(entries[i].label);
        const Vec16 amps = psi.amplitudes();
        const Vec16 applied = obs.matrix() * amps;
        checks[i].observable = obs;
        checks[i].eigenvalue = entries[i].eigenvalue;
        checks[i].expectation = expectation(psi, obs);
        checks[i].residual = (applied - entries[i].eigenvalue * amps).norm();
    }
    return checks;
}

std::array<ControlCheck, 7> reality_controls(const DensityMatrix& rho,
                                             double threshold) {
    std::array<ControlCheck, 7> checks;
    const auto& specs = control_specs();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const double value =
            expectation(rho, PauliString::parse(specs[i].label));
        checks[i] = make_control(specs[i], value, 0.0, threshold);
    }
    return checks;
}

std::array<ControlCheck, 7> reality_controls_from_values(
    const std::vector<TermValue>& values, double threshold) {
    std::array<ControlCheck, 7> checks;
    const auto& specs = control_specs();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const TermValue& v = find_value(values, specs[i].label);
        checks[i] = make_control(specs[i], v.value, v.sigma, threshold);
    }
    return checks;
}

TermEstimate estimate_term(const PauliString& observable,
                           const std::array<std::int64_t, 16>& counts) {
    const MeasurementSetting setting = setting_for(observable);
    std::int64_t total = 0;
    double tally = 0.0;
    for (int o = 0; o < kDim; ++o) {
        if (counts[o] < 0)
            throw std::invalid_argument("counts must be nonnegative");
        if (counts[o] == 0) continue;
        total += counts[o];
        tally += static_cast<double>(counts[o]) *
                 outcome_parity(setting, observable, o);
    }
    if (total == 0)
        throw std::invalid_argument("cannot estimate a parity from zero counts");
    const double raw = tally / static_cast<double>(total);
    TermEstimate est;
    est.total = total;
    est.value = observable.coefficient * raw;
    est.sigma = std::abs(observable.coefficient) * parity_sigma(raw, total);
    return est;
}

double parity_sigma(double expectation, std::int64_t total_counts) {
    if (total_counts <= 0)
        throw std::invalid_argument("total counts must be positive");
    const double spread = std::max(0.0, 1.0 - expectation * expectation);
    return std::sqrt(spread / static_cast<double>(total_counts));
}

}  // namespace c4sim
