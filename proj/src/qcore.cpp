#include "c4sim/qcore.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace c4sim {

namespace {

constexpr cd kI{0.0, 1.0};

// Slot index (0-based) addressed by a physical label token.
// Upper-case letters are polarization operators, lower-case path operators;
// photon A's polarization sits on q2, B's on q1, A's path on q3, B's on q4.
int slot_for_token(bool upper_case, char photon) {
    if (photon == 'A') return upper_case ? 1 : 2;
    if (photon == 'B') return upper_case ? 0 : 3;
    throw std::invalid_argument("operator label: photon must be A or B");
}

}  // namespace

Mat2 pauli_matrix(Pauli p) {
    Mat2 m;
    switch (p) {
        case Pauli::I: m << 1, 0, 0, 1; break;
        case Pauli::X: m << 0, 1, 1, 0; break;
        case Pauli::Y: m << 0, -kI, kI, 0; break;
        case Pauli::Z: m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("unknown Pauli label");
    }
    return m;
}

Mat16 PauliString::matrix() const {
    return coefficient * tensor4(pauli_matrix(slots[0]), pauli_matrix(slots[1]),
                                 pauli_matrix(slots[2]), pauli_matrix(slots[3]));
}

std::string PauliString::name() const {
    // Print in the experiment's customary order: photon A polarization,
    // photon A path, photon B polarization, photon B path.
    struct Part {
        int slot;
        bool upper;
        char photon;
    };
    static constexpr Part kOrder[] = {
        {1, true, 'A'}, {2, false, 'A'}, {0, true, 'B'}, {3, false, 'B'}};

    std::string out;
    for (const auto& part : kOrder) {
        const Pauli p = slots[static_cast<std::size_t>(part.slot)];
        if (p == Pauli::I) continue;
        char letter = static_cast<char>(p);
        out += part.upper ? letter
                          : static_cast<char>(std::tolower(
                                static_cast<unsigned char>(letter)));
        out += '_';
        out += part.photon;
    }
    return out.empty() ? std::string("1") : out;
}

PauliString PauliString::parse(std::string_view label, double coefficient) {
    PauliString result;
    result.coefficient = coefficient;
    if (label == "1" || label == "I") return result;
    if (label.empty()) {
        throw std::invalid_argument("operator label is empty (identity is \"1\")");
    }

    std::array<bool, 4> seen{false, false, false, false};
    std::size_t i = 0;
    while (i < label.size()) {
        if (i + 3 > label.size()) {
            throw std::invalid_argument("operator label: truncated token in '" +
                                        std::string(label) + "'");
        }
        const char letter = label[i];
        const char upper = static_cast<char>(
            std::toupper(static_cast<unsigned char>(letter)));
        if (upper != 'X' && upper != 'Y' && upper != 'Z') {
            throw std::invalid_argument("operator label: expected X/Y/Z or x/y/z in '" +
                                        std::string(label) + "'");
        }
        if (label[i + 1] != '_') {
            throw std::invalid_argument("operator label: expected '_' in '" +
                                        std::string(label) + "'");
        }
        const bool is_upper =
            std::isupper(static_cast<unsigned char>(letter)) != 0;
        const int slot = slot_for_token(is_upper, label[i + 2]);
        if (seen[static_cast<std::size_t>(slot)]) {
            throw std::invalid_argument("operator label: duplicate slot in '" +
                                        std::string(label) + "'");
        }
        seen[static_cast<std::size_t>(slot)] = true;
        result.slots[static_cast<std::size_t>(slot)] = static_cast<Pauli>(upper);
        i += 3;
    }
    return result;
}

StateVector::StateVector(const Vec16& amplitudes) : amps_(amplitudes) {
    if (std::abs(amps_.squaredNorm() - 1.0) > tol::kNorm) {
        throw std::invalid_argument("state vector is not normalized");
    }
}

StateVector StateVector::normalized(const Vec16& amplitudes) {
    const double norm = amplitudes.norm();
    if (norm == 0.0) {
        throw std::invalid_argument("cannot normalize the zero vector");
    }
    return StateVector(Vec16(amplitudes / norm));
}

StateVector StateVector::basis(int basis_index) {
    if (basis_index < 0 || basis_index >= kDim) {
        throw std::invalid_argument("basis index out of range");
    }
    Vec16 amps = Vec16::Zero();
    amps(basis_index) = 1.0;
    return StateVector(amps);
}

cd StateVector::amplitude(int basis_index) const {
    if (basis_index < 0 || basis_index >= kDim) {
        throw std::invalid_argument("basis index out of range");
    }
    return amps_(basis_index);
}

cd StateVector::overlap(const StateVector& other) const {
    return amps_.dot(other.amps_);  // Eigen's dot conjugates the left factor
}

bool StateVector::same_ray(const StateVector& other, double tolerance) const {
    return std::abs(std::abs(overlap(other)) - 1.0) <= tolerance;
}

DensityMatrix density(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
        }
    }
    return out;
}

Mat16 tensor4(const Mat2& q1, const Mat2& q2, const Mat2& q3, const Mat2& q4) {
    return kron(kron(kron(q1, q2), q3), q4);
}

namespace {

double real_expectation(const cd& value) {
    if (std::abs(value.imag()) > tol::kParity) {
        throw std::logic_error("expectation of Hermitian operator came out complex");
    }
    return value.real();
}

}  // namespace

double expectation(const StateVector& psi, const PauliString& op) {
    if (std::abs(psi.amplitudes().squaredNorm() - 1.0) > tol::kNorm) {
        throw std::invalid_argument("expectation: state is not normalized");
    }
    const cd value =
        (psi.amplitudes().adjoint() * op.matrix() * psi.amplitudes())(0);
    return real_expectation(value);
}

double expectation(const DensityMatrix& rho, const PauliString& op) {
    return expectation(rho, op.matrix());
}

double expectation(const DensityMatrix& rho, const Mat16& hermitian_op) {
    return real_expectation((rho.matrix() * hermitian_op).trace());
}

double fidelity(const DensityMatrix& rho, const StateVector& target) {
    return fidelity<16>(rho, target.amplitudes());
}

Eigen::MatrixXcd partial_trace(const DensityMatrix& rho,
                               const std::vector<int>& keep_slots) {
    std::set<int> keep(keep_slots.begin(), keep_slots.end());
    if (keep.empty()) {
        throw std::invalid_argument("partial_trace: keep set is empty");
    }
    if (keep.size() != keep_slots.size()) {
        throw std::invalid_argument("partial_trace: duplicate slot in keep set");
    }
    for (int slot : keep) {
        if (slot < 1 || slot > kNumQubits) {
            throw std::invalid_argument("partial_trace: slot out of range");
        }
    }

    const std::vector<int> kept(keep.begin(), keep.end());  // ascending
    const int reduced_dim = 1 << kept.size();

    // Pack the kept slots of a full basis index, first kept slot most
    // significant — same convention as the full index itself.
    auto reduced_index = [&kept](int full) {
        int out = 0;
        for (int slot : kept) out = (out << 1) | slot_bit(full, slot);
        return out;
    };
    auto traced_bits = [&keep](int full) {
        int out = 0;
        for (int slot = 1; slot <= kNumQubits; ++slot) {
            if (!keep.count(slot)) out = (out << 1) | slot_bit(full, slot);
        }
        return out;
    };

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(reduced_dim, reduced_dim);
    for (int m = 0; m < kDim; ++m) {
        for (int n = 0; n < kDim; ++n) {
            if (traced_bits(m) != traced_bits(n)) continue;
            out(reduced_index(m), reduced_index(n)) += rho.matrix()(m, n);
        }
    }
    return out;
}

}  // namespace c4sim
