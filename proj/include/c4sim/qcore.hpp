#pragma once

// Core linear-algebra layer for a two-photon, four-qubit system.
//
// Canonical qubit order (fixed everywhere in this project):
//   (q1, q2, q3, q4) = (B polarization, A polarization, A path, B path)
// A basis index b in [0,16) decodes into bits (q1,q2,q3,q4) with q1 most
// significant. Encoding: |H> <-> 0, |V> <-> 1 for polarization and
// |l> <-> 0, |r> <-> 1 for the two path (linear-momentum) modes.
//
// Operator labels follow the experiment's naming: upper-case X_A/Y_A/Z_A act
// on photon A's polarization (slot q2), upper-case *_B on photon B's
// polarization (slot q1), lower-case x_A/y_A/z_A on photon A's path (slot
// q3) and lower-case *_B on photon B's path (slot q4). With the encoding
// above every one of the twelve local operators is a standard Pauli matrix.

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "c4sim/tolerances.hpp"

namespace c4sim {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Mat16 = Eigen::Matrix<cd, 16, 16>;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;
using Vec16 = Eigen::Vector<cd, 16>;

inline constexpr int kNumQubits = 4;
inline constexpr int kDim = 16;

// Bit of a basis index at a given slot (slot in 1..4, q1 most significant).
constexpr int slot_bit(int basis_index, int slot) {
    return (basis_index >> (kNumQubits - slot)) & 1;
}

enum class Pauli : char { I = 'I', X = 'X', Y = 'Y', Z = 'Z' };

// 2x2 matrix of a single Pauli operator (standard convention, H/l first).
Mat2 pauli_matrix(Pauli p);

// A product of Pauli operators over the four slots, with a real coefficient.
struct PauliString {
    std::array<Pauli, 4> slots{Pauli::I, Pauli::I, Pauli::I, Pauli::I};
    double coefficient = 1.0;

    // Dense 16x16 representation (coefficient included).
    Mat16 matrix() const;

    // Physical label such as "X_Az_AX_B" (A-polarization, A-path,
    // B-polarization, B-path order; identity slots omitted; "1" if all I).
    std::string name() const;

    // Parse a physical label ("Z_AZ_B", "X_Ax_AY_By_B", ...). Throws
    // std::invalid_argument on malformed labels or duplicate slots.
    static PauliString parse(std::string_view physical_label,
                             double coefficient = 1.0);

    bool operator==(const PauliString& other) const = default;
};

// Pure state of the four-qubit system. Normalization is a class invariant:
// the constructor rejects amplitude vectors whose norm deviates from 1 by
// more than tol::kNorm.
class StateVector {
  public:
    explicit StateVector(const Vec16& amplitudes);

    // Rescale an arbitrary nonzero vector to unit norm.
    static StateVector normalized(const Vec16& amplitudes);
    static StateVector basis(int basis_index);

    const Vec16& amplitudes() const { return amps_; }
    cd amplitude(int basis_index) const;

    // <this|other>
    cd overlap(const StateVector& other) const;

    // True when both vectors describe the same physical state, i.e.
    // |<a|b>| = 1 within the tolerance (global phase ignored).
    bool same_ray(const StateVector& other, double tolerance = tol::kExact) const;

  private:
    Vec16 amps_;
};

// Mixed state over an N-dimensional space. Construction validates
// hermiticity, unit trace and positivity (minimum eigenvalue no lower than
// -tol::kPsdFloor), so a held instance is always physical.
template <int N>
class DensityMatrixT {
  public:
    using Matrix = Eigen::Matrix<cd, N, N>;
    using Ket = Eigen::Vector<cd, N>;

    explicit DensityMatrixT(const Matrix& m) : m_(m) { validate(); }

    static DensityMatrixT from_pure(const Ket& ket) {
        const double n2 = ket.squaredNorm();
        if (std::abs(n2 - 1.0) > tol::kNorm) {
            throw std::invalid_argument("from_pure: ket is not normalized");
        }
        return DensityMatrixT(ket * ket.adjoint());
    }

    static DensityMatrixT maximally_mixed() {
        return DensityMatrixT(Matrix::Identity() / static_cast<double>(N));
    }

    const Matrix& matrix() const { return m_; }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
        return solver.eigenvalues()(0);
    }

    double purity() const { return (m_ * m_).trace().real(); }

  private:
    void validate() const {
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian) {
            throw std::invalid_argument("density matrix is not Hermitian");
        }
        if (std::abs(m_.trace().real() - 1.0) > tol::kTrace ||
            std::abs(m_.trace().imag()) > tol::kTrace) {
            throw std::invalid_argument("density matrix trace is not 1");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues()(0) < -tol::kPsdFloor) {
            throw std::invalid_argument("density matrix is not positive semidefinite");
        }
    }

    Matrix m_;
};

using DensityMatrix = DensityMatrixT<16>;
using DensityMatrix4 = DensityMatrixT<4>;

// |psi><psi| for a validated pure state.
DensityMatrix density(const StateVector& psi);

// Kronecker product in canonical slot order q1 (x) q2 (x) q3 (x) q4.
Mat16 tensor4(const Mat2& q1, const Mat2& q2, const Mat2& q3, const Mat2& q4);

// General Kronecker product helper.
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// <psi|O|psi> resp. Tr[rho O]. The result of a Hermitian observable is real;
// a residual imaginary part above tol::kParity is rejected as an internal
// inconsistency.
double expectation(const StateVector& psi, const PauliString& op);
double expectation(const DensityMatrix& rho, const PauliString& op);
double expectation(const DensityMatrix& rho, const Mat16& hermitian_op);

// <target|rho|target>, clamped into [0,1] against roundoff.
template <int N>
double fidelity(const DensityMatrixT<N>& rho,
                const Eigen::Vector<cd, N>& target) {
    const double n2 = target.squaredNorm();
    if (std::abs(n2 - 1.0) > tol::kNorm) {
        throw std::invalid_argument("fidelity: target ket is not normalized");
    }
    const cd value = (target.adjoint() * rho.matrix() * target)(0);
    return std::clamp(value.real(), 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const StateVector& target);

// Reduced density matrix over the kept slots (subset of {1,2,3,4}, result
// ordered by ascending slot). Throws on an empty or out-of-range keep set.
Eigen::MatrixXcd partial_trace(const DensityMatrix& rho,
                               const std::vector<int>& keep_slots);

}  // namespace c4sim
