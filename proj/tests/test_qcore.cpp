#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "c4sim/qcore.hpp"
#include "test_util.hpp"

using namespace c4sim;
using test_util::random_density;
using test_util::random_ket;
using test_util::random_pauli_string;
using test_util::random_state;

namespace {

const cd kI(0.0, 1.0);

// Brute-force reference for tensor4: entry (i, j) is the product of the
// per-slot factor entries selected by the bit decompositions of i and j.
Mat16 tensor4_reference(const std::array<Mat2, 4>& f) {
    Mat16 out;
    for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) {
            cd v = 1.0;
            for (int slot = 1; slot <= kNumQubits; ++slot)
                v *= f[slot - 1](slot_bit(i, slot), slot_bit(j, slot));
            out(i, j) = v;
        }
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("qcore");

TEST_CASE("slot_bit decodes q1 as the most significant bit") {
    CHECK(slot_bit(0b1000, 1) == 1);
    CHECK(slot_bit(0b1000, 4) == 0);
    CHECK(slot_bit(0b0001, 4) == 1);
    CHECK(slot_bit(0b0110, 2) == 1);
    CHECK(slot_bit(0b0110, 3) == 1);
    for (int idx = 0; idx < kDim; ++idx) {
        int rebuilt = 0;
        for (int slot = 1; slot <= kNumQubits; ++slot)
            rebuilt = (rebuilt << 1) | slot_bit(idx, slot);
        CHECK(rebuilt == idx);
    }
}

TEST_CASE("pauli matrices have the textbook entries and algebra") {
    const Mat2 x = pauli_matrix(Pauli::X);
    const Mat2 y = pauli_matrix(Pauli::Y);
    const Mat2 z = pauli_matrix(Pauli::Z);
    const Mat2 id = pauli_matrix(Pauli::I);

    CHECK(x(0, 1) == cd(1.0));
    CHECK(x(1, 0) == cd(1.0));
    CHECK(x(0, 0) == cd(0.0));
    CHECK(y(0, 1) == -kI);
    CHECK(y(1, 0) == kI);
    CHECK(z(0, 0) == cd(1.0));
    CHECK(z(1, 1) == cd(-1.0));
    CHECK(id.isIdentity(0.0));

    CHECK((x * y - kI * z).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((y * z - kI * x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((z * x - kI * y).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    for (const Mat2& p : {x, y, z}) {
        CHECK((p * p - Mat2::Identity()).cwiseAbs().maxCoeff() ==
              doctest::Approx(0.0));
        CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
}

TEST_CASE("tensor4 matches the entrywise bit-product definition") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 5; ++trial) {
        std::array<Mat2, 4> f;
        for (auto& m : f)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) m(i, j) = cd(normal(rng), normal(rng));
        const Mat16 got = tensor4(f[0], f[1], f[2], f[3]);
        CHECK((got - tensor4_reference(f)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("kron reproduces tensor4 when nested in canonical order") {
    const Mat2 x = pauli_matrix(Pauli::X);
    const Mat2 y = pauli_matrix(Pauli::Y);
    const Mat2 z = pauli_matrix(Pauli::Z);
    const Mat2 id = pauli_matrix(Pauli::I);
    const Eigen::MatrixXcd nested = kron(kron(kron(x, y), z), id);
    const Mat16 direct = tensor4(x, y, z, id);
    CHECK((nested - direct).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pauli string matrices act on basis states by bit rules") {
    // X on slot s flips bit s; Z multiplies by (-1)^bit. Y is pinned down by
    // these two together with the product algebra checked above.
    for (int slot = 1; slot <= kNumQubits; ++slot) {
        PauliString xs;
        xs.slots[slot - 1] = Pauli::X;
        const Mat16 mx = xs.matrix();
        PauliString zs;
        zs.slots[slot - 1] = Pauli::Z;
        const Mat16 mz = zs.matrix();
        for (int idx = 0; idx < kDim; ++idx) {
            const int flipped = idx ^ (1 << (kNumQubits - slot));
            for (int row = 0; row < kDim; ++row) {
                CHECK(mx(row, idx) == cd(row == flipped ? 1.0 : 0.0));
            }
            const double sign = slot_bit(idx, slot) ? -1.0 : 1.0;
            CHECK(mz(idx, idx) == cd(sign));
        }
    }
}

TEST_CASE("pauli string coefficient scales the matrix") {
    PauliString p = PauliString::parse("Z_AZ_B", -2.5);
    CHECK(p.coefficient == -2.5);
    const Mat16 scaled = p.matrix();
    p.coefficient = 1.0;
    CHECK((scaled + 2.5 * p.matrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("parse places factors on the physical slots") {
    const PauliString p = PauliString::parse("X_Az_AX_B");
    CHECK(p.slots[0] == Pauli::X);  // q1 = B polarization
    CHECK(p.slots[1] == Pauli::X);  // q2 = A polarization
    CHECK(p.slots[2] == Pauli::Z);  // q3 = A path
    CHECK(p.slots[3] == Pauli::I);  // q4 = B path

    const PauliString q = PauliString::parse("Y_Ax_AX_By_B");
    CHECK(q.slots[0] == Pauli::X);
    CHECK(q.slots[1] == Pauli::Y);
    CHECK(q.slots[2] == Pauli::X);
    CHECK(q.slots[3] == Pauli::Y);

    const PauliString r = PauliString::parse("z_Az_B");
    CHECK(r.slots[0] == Pauli::I);
    CHECK(r.slots[1] == Pauli::I);
    CHECK(r.slots[2] == Pauli::Z);
    CHECK(r.slots[3] == Pauli::Z);
}

TEST_CASE("parse and name round-trip every label used in the project") {
    const char* labels[] = {"Z_AZ_B",       "Z_Ax_Ax_B",    "X_Az_AX_B",
                            "z_Az_B",       "x_AZ_Bx_B",    "Z_Ay_Ay_B",
                            "Y_Az_AY_B",    "X_AX_Bz_B",    "Y_AY_Bz_B",
                            "X_Ax_AY_By_B", "Y_Ax_AX_By_B", "1"};
    for (const char* label : labels) {
        CHECK(PauliString::parse(label).name() == label);
    }
    CHECK(PauliString{}.name() == "1");
}

TEST_CASE("parse rejects malformed labels") {
    CHECK_THROWS_AS(PauliString::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(PauliString::parse("Q_A"), std::invalid_argument);
    CHECK_THROWS_AS(PauliString::parse("X_C"), std::invalid_argument);
    CHECK_THROWS_AS(PauliString::parse("X_AX_A"), std::invalid_argument);
    CHECK_THROWS_AS(PauliString::parse("X_A junk"), std::invalid_argument);
    CHECK_THROWS_AS(PauliString::parse("X"), std::invalid_argument);
    CHECK_THROWS_AS(PauliString::parse("XA"), std::invalid_argument);
}

TEST_CASE("state vector enforces normalization") {
    Vec16 v = Vec16::Zero();
    v(0) = 0.5;
    CHECK_THROWS_AS(StateVector{v}, std::invalid_argument);
    const StateVector fixed = StateVector::normalized(v);
    CHECK(std::abs(fixed.amplitude(0) - cd(1.0)) < 1e-15);
    CHECK_THROWS_AS(StateVector::normalized(Vec16::Zero()), std::invalid_argument);
}

TEST_CASE("overlap is conjugate symmetric and basis states are orthonormal") {
    std::mt19937_64 rng(7);
    const StateVector a = random_state(rng);
    const StateVector b = random_state(rng);
    CHECK(std::abs(a.overlap(b) - std::conj(b.overlap(a))) < 1e-15);
    CHECK(std::abs(a.overlap(a) - cd(1.0)) < 1e-12);
    for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) {
            const cd ov = StateVector::basis(i).overlap(StateVector::basis(j));
            CHECK(std::abs(ov - cd(i == j ? 1.0 : 0.0)) < 1e-15);
        }
}

TEST_CASE("same_ray ignores global phase only") {
    std::mt19937_64 rng(8);
    const StateVector a = random_state(rng);
    const StateVector rotated = StateVector(Vec16(std::exp(kI * 0.7) * a.amplitudes()));
    CHECK(a.same_ray(rotated));
    CHECK_FALSE(StateVector::basis(0).same_ray(StateVector::basis(1)));
}

TEST_CASE("density matrix construction validates physicality") {
    Mat16 bad = Mat16::Zero();
    bad(0, 1) = 1.0;  // not Hermitian
    bad(0, 0) = 1.0;
    CHECK_THROWS_AS(DensityMatrix{bad}, std::invalid_argument);

    Mat16 traceless = Mat16::Identity() / 8.0;  // trace 2
    CHECK_THROWS_AS(DensityMatrix{traceless}, std::invalid_argument);

    Mat16 negative = Mat16::Zero();
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix{negative}, std::invalid_argument);

    const DensityMatrix mixed = DensityMatrix::maximally_mixed();
    CHECK(mixed.purity() == doctest::Approx(1.0 / 16.0));
    CHECK(mixed.min_eigenvalue() == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("pure density matrices have unit purity and match from_pure") {
    std::mt19937_64 rng(9);
    const StateVector psi = random_state(rng);
    const DensityMatrix rho = density(psi);
    CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-12));
    const DensityMatrix same = DensityMatrix::from_pure(psi.amplitudes());
    CHECK((rho.matrix() - same.matrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("expectation on pure states agrees with the dense matrix form") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const StateVector psi = random_state(rng);
        const PauliString op = random_pauli_string(rng);
        const cd direct =
            (psi.amplitudes().adjoint() * op.matrix() * psi.amplitudes())(0);
        CHECK(std::abs(expectation(psi, op) - direct.real()) < 1e-12);
        CHECK(std::abs(direct.imag()) < 1e-12);
        CHECK(std::abs(expectation(density(psi), op) - direct.real()) < 1e-12);
    }
}

TEST_CASE("expectation of a dense Hermitian operator matches the trace") {
    std::mt19937_64 rng(11);
    const DensityMatrix rho = random_density(rng);
    Mat16 herm = Mat16::Zero();
    std::normal_distribution<double> normal;
    for (int i = 0; i < kDim; ++i)
        for (int j = 0; j <= i; ++j) {
            const cd e(normal(rng), i == j ? 0.0 : normal(rng));
            herm(i, j) = e;
            herm(j, i) = std::conj(e);
        }
    const double direct = (rho.matrix() * herm).trace().real();
    CHECK(expectation(rho, herm) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("fidelity against a pure target is the matrix element") {
    std::mt19937_64 rng(12);
    const DensityMatrix rho = random_density(rng);
    const StateVector target = random_state(rng);
    const cd expect =
        (target.amplitudes().adjoint() * rho.matrix() * target.amplitudes())(0);
    CHECK(fidelity(rho, target) == doctest::Approx(expect.real()).epsilon(1e-12));
    CHECK(fidelity(density(target), target) == doctest::Approx(1.0));

    Vec16 unnormalized = Vec16::Zero();
    unnormalized(0) = 2.0;
    CHECK_THROWS_AS(fidelity(rho, unnormalized), std::invalid_argument);
}

TEST_CASE("partial trace recovers the factors of a product state") {
    std::mt19937_64 rng(13);
    // Build rho = A (x) B with A on slots (1,2) and B on slots (3,4).
    const Eigen::Matrix<cd, 4, 4> a = test_util::random_density4_matrix(rng);
    const Eigen::Matrix<cd, 4, 4> b = test_util::random_density4_matrix(rng);
    const DensityMatrix rho{Mat16(kron(a, b))};

    const Eigen::MatrixXcd front = partial_trace(rho, {1, 2});
    const Eigen::MatrixXcd back = partial_trace(rho, {3, 4});
    CHECK((front - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back - b).cwiseAbs().maxCoeff() < 1e-12);

    // Keeping everything returns the matrix itself; single-slot reductions
    // have unit trace and stay Hermitian.
    const Eigen::MatrixXcd all = partial_trace(rho, {1, 2, 3, 4});
    CHECK((all - rho.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    for (int slot = 1; slot <= 4; ++slot) {
        const Eigen::MatrixXcd r = partial_trace(rho, {slot});
        CHECK(std::abs(r.trace().real() - 1.0) < 1e-12);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("partial trace rejects bad keep sets") {
    const DensityMatrix rho = DensityMatrix::maximally_mixed();
    CHECK_THROWS_AS(partial_trace(rho, {}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(rho, {0}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(rho, {5}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(rho, {1, 1}), std::invalid_argument);
}

TEST_CASE("partial trace of a pure product state gives pure marginals") {
    std::mt19937_64 rng(14);
    const StateVector prod = test_util::random_product_state(rng);
    const DensityMatrix rho = density(prod);
    for (int slot = 1; slot <= 4; ++slot) {
        const Eigen::MatrixXcd r = partial_trace(rho, {slot});
        CHECK(std::abs((r * r).trace().real() - 1.0) < 1e-10);
    }
}

TEST_SUITE_END();
