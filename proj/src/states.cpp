#include "c4sim/states.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace c4sim {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Momentum (path) pair index for a sector, bits (q3, q4).
int sector_path_index(PathSector sector) {
    return sector == PathSector::RL ? 2 : 1;  // |r_A l_B> = 10, |l_A r_B> = 01
}

}  // namespace

Vec4 bell_state(BellKind kind, Dof dof) {
    Vec4 v = Vec4::Zero();
    switch (kind) {
        case BellKind::PhiPlus:
            v(0) = kInvSqrt2;
            v(3) = kInvSqrt2;
            break;
        case BellKind::PhiMinus:
            v(0) = kInvSqrt2;
            v(3) = -kInvSqrt2;
            break;
        case BellKind::PsiPlus:
            v(1) = kInvSqrt2;
            v(2) = kInvSqrt2;
            break;
        case BellKind::PsiMinus:
            // Path convention puts |r_A l_B> first, polarization |H_A V_B>.
            if (dof == Dof::Path) {
                v(1) = -kInvSqrt2;
                v(2) = kInvSqrt2;
            } else {
                v(1) = kInvSqrt2;
                v(2) = -kInvSqrt2;
            }
            break;
    }
    return v;
}

StateVector assemble_product(const Vec4& polarization, const Vec4& path) {
    Vec16 amps = Vec16::Zero();
    for (int a_pol = 0; a_pol < 2; ++a_pol) {
        for (int b_pol = 0; b_pol < 2; ++b_pol) {
            for (int a_path = 0; a_path < 2; ++a_path) {
                for (int b_path = 0; b_path < 2; ++b_path) {
                    const int idx =
                        b_pol * 8 + a_pol * 4 + a_path * 2 + b_path;
                    amps(idx) = polarization(a_pol * 2 + b_pol) *
                                path(a_path * 2 + b_path);
                }
            }
        }
    }
    return StateVector(amps);
}

StateVector hyperentangled_state() {
    return assemble_product(bell_state(BellKind::PhiMinus, Dof::Polarization),
                            bell_state(BellKind::PsiPlus, Dof::Path));
}

StateVector apply_hw_cp(const StateVector& psi) {
    Vec16 amps = psi.amplitudes();
    for (int idx = 0; idx < kDim; ++idx) {
        if (slot_bit(idx, 2) == 1 && slot_bit(idx, 3) == 1) amps(idx) = -amps(idx);
    }
    return StateVector(amps);
}

Mat16 hw_cp_matrix() {
    Mat16 m = Mat16::Identity();
    for (int idx = 0; idx < kDim; ++idx) {
        if (slot_bit(idx, 2) == 1 && slot_bit(idx, 3) == 1) m(idx, idx) = -1.0;
    }
    return m;
}

StateVector cluster_state() { return apply_hw_cp(hyperentangled_state()); }

StateVector logical_map(const StateVector& psi) {
    Vec16 amps;
    for (int idx = 0; idx < kDim; ++idx) {
        amps(idx) = psi.amplitude(idx ^ 0b0010);  // bit flip on slot q3
    }
    return StateVector(amps);
}

StateVector reference_linear_cluster() {
    Vec16 amps = Vec16::Zero();
    amps(0b0000) = 0.5;
    amps(0b1100) = 0.5;
    amps(0b0011) = 0.5;
    amps(0b1111) = -0.5;
    return StateVector(amps);
}

ConditionedPolarization sector_conditioned_polarization(const DensityMatrix& rho,
                                                        PathSector sector) {
    const int m = sector_path_index(sector);
    Mat4 block;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int ap = 0; ap < 2; ++ap) {
                for (int bp = 0; bp < 2; ++bp) {
                    // Rows/columns A-major: index = a_pol * 2 + b_pol.
                    block(a * 2 + b, ap * 2 + bp) =
                        rho.matrix()(b * 8 + a * 4 + m, bp * 8 + ap * 4 + m);
                }
            }
        }
    }
    const double prob = block.trace().real();
    if (prob < 1e-15) {
        throw std::invalid_argument("path sector has zero population");
    }
    return ConditionedPolarization{DensityMatrix4(Mat4(block / prob)), prob};
}

DensityMatrix apply_noise(const StateVector& psi, const NoiseParams& params) {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(params.v_pol) || !in_unit(params.mu_mom) || !in_unit(params.z_err)) {
        throw std::invalid_argument("noise parameters must lie in [0,1]");
    }

    Mat16 rho = psi.amplitudes() * psi.amplitudes().adjoint();

    // Depolarize the polarization pair: every momentum block (m1, m2) of the
    // matrix, viewed as an operator on the two polarization qubits, is mixed
    // toward (its trace) x I/4.
    Mat16 out = Mat16::Zero();
    for (int m1 = 0; m1 < 4; ++m1) {
        for (int m2 = 0; m2 < 4; ++m2) {
            Mat4 block;
            for (int p1 = 0; p1 < 4; ++p1) {
                for (int p2 = 0; p2 < 4; ++p2) {
                    block(p1, p2) = rho(p1 * 4 + m1, p2 * 4 + m2);
                }
            }
            const Mat4 mixed = params.v_pol * block +
                               (1.0 - params.v_pol) * block.trace() *
                                   Mat4::Identity() / 4.0;
            for (int p1 = 0; p1 < 4; ++p1) {
                for (int p2 = 0; p2 < 4; ++p2) {
                    out(p1 * 4 + m1, p2 * 4 + m2) = mixed(p1, p2);
                }
            }
        }
    }

    // Dephase in the path basis: all momentum off-diagonal blocks — in
    // particular the coherence between the r_A l_B and l_A r_B sectors —
    // are damped by mu_mom.
    for (int p1 = 0; p1 < 4; ++p1) {
        for (int p2 = 0; p2 < 4; ++p2) {
            for (int m1 = 0; m1 < 4; ++m1) {
                for (int m2 = 0; m2 < 4; ++m2) {
                    if (m1 != m2) out(p1 * 4 + m1, p2 * 4 + m2) *= params.mu_mom;
                }
            }
        }
    }

    // Leak a small population into the nominally empty l_A l_B and r_A r_B
    // sectors, white in polarization.
    if (params.z_err > 0.0) {
        out *= (1.0 - params.z_err);
        for (int p = 0; p < 4; ++p) {
            for (int m : {0, 3}) {
                out(p * 4 + m, p * 4 + m) += params.z_err * 0.25 * 0.5;
            }
        }
    }

    return DensityMatrix(out);
}

const std::array<TableRow, 11>& table_one() {
    //                                      value    sigma    W      S      C
    static const std::array<TableRow, 11> rows = {{
        {"Z_AZ_B",        +0.9283, 0.0032, true,  false, false},
        {"Z_Ax_Ax_B",     +0.8194, 0.0049, true,  false, false},
        {"X_Az_AX_B",     -0.9074, 0.0037, true,  false, true},
        {"z_Az_B",        -0.9951, 0.0009, true,  false, true},
        {"x_AZ_Bx_B",     +0.8110, 0.0050, true,  false, true},
        {"Z_Ay_Ay_B",     +0.8071, 0.0050, false, false, true},
        {"Y_Az_AY_B",     +0.8948, 0.0040, false, false, true},
        {"X_AX_Bz_B",     +0.9074, 0.0037, true,  true,  true},
        {"Y_AY_Bz_B",     -0.8936, 0.0041, false, true,  true},
        {"X_Ax_AY_By_B",  +0.8177, 0.0055, false, true,  false},
        {"Y_Ax_AX_By_B",  +0.7959, 0.0055, false, true,  false},
    }};
    return rows;
}

std::vector<ObservableTarget> default_calibration_targets() {
    std::vector<ObservableTarget> targets;
    targets.reserve(13);
    for (const auto& row : table_one()) {
        targets.push_back({row.label, row.value, row.sigma});
    }
    targets.push_back(
        {kFidelityPhiPlusLabel, kFidelityPhiPlus, kFidelityPhiPlusSigma});
    targets.push_back(
        {kFidelityPhiMinusLabel, kFidelityPhiMinus, kFidelityPhiMinusSigma});
    return targets;
}

namespace {

std::vector<double> model_predictions(const NoiseParams& params,
                                      const std::vector<std::string>& labels) {
    const DensityMatrix rho = apply_noise(cluster_state(), params);
    std::vector<double> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        if (label == kFidelityPhiPlusLabel) {
            out.push_back(fidelity<4>(
                sector_conditioned_polarization(rho, PathSector::RL).state,
                bell_state(BellKind::PhiPlus, Dof::Polarization)));
        } else if (label == kFidelityPhiMinusLabel) {
            out.push_back(fidelity<4>(
                sector_conditioned_polarization(rho, PathSector::LR).state,
                bell_state(BellKind::PhiMinus, Dof::Polarization)));
        } else {
            out.push_back(expectation(rho, PauliString::parse(label)));
        }
    }
    return out;
}

}  // namespace

double noise_model_prediction(const NoiseParams& params, const std::string& label) {
    return model_predictions(params, {label}).front();
}

double CalibrationResult::max_abs_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, std::abs(r));
    return m;
}

double CalibrationResult::max_abs_observable_residual() const {
    std::set<std::string> table_labels;
    for (const auto& row : table_one()) table_labels.insert(row.label);
    double m = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (table_labels.count(labels[i])) m = std::max(m, std::abs(residuals[i]));
    }
    return m;
}

CalibrationResult calibrate_noise(const std::vector<ObservableTarget>& targets) {
    std::set<std::string> present;
    for (const auto& t : targets) present.insert(t.label);
    for (const auto& row : table_one()) {
        if (!present.count(row.label)) {
            throw std::invalid_argument(
                "calibration targets must include every table observable; missing " +
                row.label);
        }
    }

    std::vector<std::string> labels;
    Eigen::VectorXd target_values(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < targets.size(); ++i) {
        labels.push_back(targets[i].label);
        target_values(static_cast<Eigen::Index>(i)) = targets[i].value;
    }

    auto clamp01 = [](Eigen::Vector3d theta) {
        for (int k = 0; k < 3; ++k) theta(k) = std::clamp(theta(k), 0.0, 1.0);
        return theta;
    };
    auto residuals_at = [&](const Eigen::Vector3d& theta) {
        const auto pred =
            model_predictions(NoiseParams{theta(0), theta(1), theta(2)}, labels);
        Eigen::VectorXd r(static_cast<Eigen::Index>(pred.size()));
        for (std::size_t i = 0; i < pred.size(); ++i) {
            r(static_cast<Eigen::Index>(i)) =
                pred[i] - target_values(static_cast<Eigen::Index>(i));
        }
        return r;
    };

    // Levenberg-Marquardt with a numeric Jacobian, steps projected onto the
    // parameter box. The model is smooth and three-dimensional, so this
    // converges in a handful of iterations from any reasonable start.
    Eigen::Vector3d theta(0.9, 0.9, 0.05);
    Eigen::VectorXd r = residuals_at(theta);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int iteration = 0;

    const auto n = r.size();
    for (; iteration < tol::kFitMaxIterations && !converged; ++iteration) {
        Eigen::MatrixXd jac(n, 3);
        const double h = 1e-6;
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d lo = theta, hi = theta;
            hi(k) = std::min(theta(k) + h, 1.0);
            lo(k) = std::max(theta(k) - h, 0.0);
            jac.col(k) = (residuals_at(hi) - residuals_at(lo)) / (hi(k) - lo(k));
        }

        const Eigen::Vector3d grad = jac.transpose() * r;

        // Parameters pinned at a box face whose gradient points outward are
        // frozen for this iteration; solving the full system and clamping
        // afterwards would distort the step of the remaining coordinates.
        std::vector<int> free_idx;
        double stationarity = 0.0;
        for (int k = 0; k < 3; ++k) {
            const bool frozen = (theta(k) <= 0.0 && grad(k) > 0.0) ||
                                (theta(k) >= 1.0 && grad(k) < 0.0);
            if (frozen) continue;
            free_idx.push_back(k);
            stationarity = std::max(stationarity, std::abs(grad(k)));
        }
        // The Jacobian is a central difference with h = 1e-6, so the gradient
        // carries noise of order 1e-9; demanding less than that never ends.
        if (stationarity < 1e-8) {
            converged = true;
            break;
        }

        const Eigen::Matrix3d hessian = jac.transpose() * jac;
        const auto nf = static_cast<Eigen::Index>(free_idx.size());
        Eigen::MatrixXd hess_free(nf, nf);
        Eigen::VectorXd grad_free(nf);
        for (Eigen::Index i = 0; i < nf; ++i) {
            grad_free(i) = grad(free_idx[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < nf; ++j)
                hess_free(i, j) = hessian(free_idx[static_cast<std::size_t>(i)],
                                          free_idx[static_cast<std::size_t>(j)]);
        }

        bool accepted = false;
        while (!accepted && lambda < 1e12) {
            const Eigen::VectorXd step_free =
                (hess_free +
                 lambda * Eigen::MatrixXd::Identity(nf, nf))
                    .ldlt()
                    .solve(-grad_free);
            Eigen::Vector3d step = Eigen::Vector3d::Zero();
            for (Eigen::Index i = 0; i < nf; ++i)
                step(free_idx[static_cast<std::size_t>(i)]) = step_free(i);
            const Eigen::Vector3d trial = clamp01(theta + step);
            const Eigen::VectorXd r_trial = residuals_at(trial);
            const double cost_trial = r_trial.squaredNorm();
            if (cost_trial < cost) {
                const double moved = (trial - theta).norm();
                const double gained = cost - cost_trial;
                theta = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (moved < tol::kFitStep || gained < 1e-14 * (1.0 + cost))
                    converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) converged = true;  // no descent direction left
    }

    CalibrationResult result;
    result.params = NoiseParams{theta(0), theta(1), theta(2)};
    result.labels = labels;
    result.residuals.assign(r.data(), r.data() + r.size());
    result.converged = converged;
    result.iterations = iteration;
    result.cost = cost;
    return result;
}

}  // namespace c4sim
