#include "c4sim/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

#include "c4sim/tolerances.hpp"

namespace c4sim {
namespace {

constexpr double kProbabilityFloor = 1e-14;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 step: decorrelates per-replica and per-sector streams.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Vec2 single_projector(char c) {
    const double inv = 1.0 / std::sqrt(2.0);
    switch (c) {
        case 'H': return Vec2(1.0, 0.0);
        case 'V': return Vec2(0.0, 1.0);
        case 'D': return Vec2(inv, inv);
        case 'L': return Vec2(inv, cd(0.0, inv));
        default:
            throw std::invalid_argument(std::string("unknown projector letter ") + c);
    }
}

const ProjectorSetting& projector_by_label(const std::string& label) {
    for (const auto& p : standard_projectors())
        if (p.label == label) return p;
    throw std::invalid_argument("unknown projector label " + label);
}

struct Measurement {
    Mat4 projector;
    Vec4 ket;
    double counts;
    double time_s;
};

std::vector<Measurement> collect(const std::vector<CountsRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("tomography needs at least one record");
    std::vector<Measurement> ms;
    ms.reserve(records.size());
    for (const auto& r : records) {
        if (r.counts < 0)
            throw std::invalid_argument("counts must be nonnegative");
        if (!(r.time_s > 0.0))
            throw std::invalid_argument("acquisition time must be positive");
        const Vec4& k = projector_by_label(r.projector).ket;
        ms.push_back({k * k.adjoint(), k, static_cast<double>(r.counts), r.time_s});
    }
    return ms;
}

// The sixteen-dimensional real coordinates of a Hermitian 4x4 matrix; the
// projector set is informationally complete iff these rows span.
bool spans_hermitian_space(const std::vector<Measurement>& ms) {
    std::map<std::string, int> seen;
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(ms.size()), 16);
    Eigen::Index n = 0;
    for (const auto& m : ms) {
        Eigen::Index c = 0;
        Eigen::VectorXd row(16);
        for (int i = 0; i < 4; ++i) row(c++) = m.projector(i, i).real();
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                row(c++) = std::sqrt(2.0) * m.projector(i, j).real();
                row(c++) = std::sqrt(2.0) * m.projector(i, j).imag();
            }
        rows.row(n++) = row;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(rows.topRows(n));
    lu.setThreshold(1e-9);
    return lu.rank() == 16;
}

double probability(const Mat4& rho, const Measurement& m) {
    return std::max(m.ket.dot(rho * m.ket).real(), 0.0);
}

std::vector<double> probabilities(const std::vector<Measurement>& ms,
                                  const Mat4& rho) {
    std::vector<double> p(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i)
        p[i] = std::max(probability(rho, ms[i]), kProbabilityFloor);
    return p;
}

// Profile-objective difference L(trial) - L(current), accumulated term by
// term as log-ratios.  Near the optimum the objective itself is of order
// total_counts * ln(counts), so forming it twice and subtracting would lose
// everything below |L| * machine-epsilon; the ratio form keeps differences
// resolvable down to the convergence tolerance.
double objective_gain(const std::vector<Measurement>& ms,
                      const std::vector<double>& trial_p,
                      const std::vector<double>& current_p,
                      double total_counts) {
    double gain = 0.0, trial_w = 0.0, current_w = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        trial_w += trial_p[i] * ms[i].time_s;
        current_w += current_p[i] * ms[i].time_s;
        if (ms[i].counts > 0.0)
            gain += ms[i].counts *
                    std::log1p((trial_p[i] - current_p[i]) / current_p[i]);
    }
    return gain - total_counts * std::log1p((trial_w - current_w) / current_w);
}

// Poisson log-likelihood at the fitted intensity, for reporting.
double reported_likelihood(const std::vector<Measurement>& ms,
                           const std::vector<double>& p, double total_counts) {
    double weighted = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) weighted += p[i] * ms[i].time_s;
    const double intensity = total_counts / weighted;
    double reported = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const double mu = intensity * p[i] * ms[i].time_s;
        reported -= mu;
        if (ms[i].counts > 0.0) reported += ms[i].counts * std::log(mu);
    }
    return reported;
}

// d(objective)/d(rho) as a Hermitian matrix.
Mat4 likelihood_gradient(const std::vector<Measurement>& ms, const Mat4& rho,
                         double total_counts) {
    Mat4 d = Mat4::Zero();
    double weighted = 0.0;
    for (const auto& m : ms)
        weighted += std::max(probability(rho, m), kProbabilityFloor) * m.time_s;
    for (const auto& m : ms) {
        const double p = std::max(probability(rho, m), kProbabilityFloor);
        double c = -total_counts * m.time_s / weighted;
        if (m.counts > 0.0) c += m.counts / p;
        d += c * m.projector;
    }
    return d;
}

Mat4 density_from_factor(const Mat4& t) {
    const Mat4 raw = t.adjoint() * t;
    const Mat4 herm = (raw + raw.adjoint()) / 2.0;
    return herm / herm.trace().real();
}

// Lower-triangular T with T^dag T = rho.  Flipping rho about its
// antidiagonal turns the ordinary Cholesky factor L (sigma = L L^dag) into
// an upper-triangular U with rho = U U^dag, and T = U^dag is the
// lower-triangular factor sought.  Rank-deficient inputs get the smallest
// diagonal jitter that makes the factorization succeed.
Mat4 lower_factor(const Mat4& rho) {
    Mat4 sigma;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) sigma(i, j) = rho(3 - i, 3 - j);
    for (double jitter = 0.0; jitter <= 1e-6; jitter = std::max(jitter * 100.0, 1e-15)) {
        const Eigen::LLT<Mat4> llt(sigma + jitter * Mat4::Identity());
        if (llt.info() != Eigen::Success) continue;
        const Mat4 l = llt.matrixL();
        Mat4 t;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) t(i, j) = std::conj(l(3 - j, 3 - i));
        return t;
    }
    throw std::logic_error("density factorization failed");
}

}  // namespace

const std::array<ProjectorSetting, 16>& standard_projectors() {
    static const std::array<ProjectorSetting, 16> projectors = [] {
        std::array<ProjectorSetting, 16> out;
        const char letters[] = {'H', 'V', 'D', 'L'};
        int idx = 0;
        for (char a : letters) {
            for (char b : letters) {
                const Vec2 ka = single_projector(a);
                const Vec2 kb = single_projector(b);
                Vec4 ket;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) ket(i * 2 + j) = ka(i) * kb(j);
                out[idx++] = {std::string{a, b}, ket};
            }
        }
        return out;
    }();
    return projectors;
}

std::vector<CountsRecord> simulate_counts(const DensityMatrix4& rho,
                                          double mean_total, std::uint64_t seed,
                                          double time_s) {
    if (!(mean_total > 0.0) || !std::isfinite(mean_total))
        throw std::invalid_argument("mean_total must be positive and finite");
    if (!(time_s > 0.0))
        throw std::invalid_argument("acquisition time must be positive");
    std::mt19937_64 rng(seed);
    std::vector<CountsRecord> records;
    records.reserve(16);
    int idx = 0;
    for (const auto& proj : standard_projectors()) {
        const double p =
            std::max(proj.ket.dot(rho.matrix() * proj.ket).real(), 0.0);
        const double mean = mean_total * p;
        std::int64_t counts = 0;
        if (mean > 0.0) {
            std::poisson_distribution<std::int64_t> draw(mean);
            counts = draw(rng);
        }
        char id[8];
        std::snprintf(id, sizeof(id), "S%02d", idx++);
        records.push_back({id, proj.label, counts, time_s});
    }
    return records;
}

TomographyResult mle_reconstruct(const std::vector<CountsRecord>& records) {
    const std::vector<Measurement> ms = collect(records);
    double total_counts = 0.0;
    for (const auto& m : ms) total_counts += m.counts;
    if (total_counts <= 0.0)
        throw std::invalid_argument("tomography needs at least one count");

    TomographyResult result;
    result.complete_set = spans_hermitian_space(ms);

    Mat4 t = 0.5 * Mat4::Identity();
    Mat4 rho = density_from_factor(t);
    std::vector<double> probs = probabilities(ms, rho);
    double kappa = 1.0;
    bool converged = false;
    int iterations = 0;

    // Multiplicative ascent: move along rho' ~ A rho A with
    // A = I + (kappa / N) dL/drho, the natural uphill congruence for this
    // likelihood.  Each accepted state is refactored so the iterate always
    // lives in the lower-triangular T^dag T parametrization; backtracking on
    // kappa keeps every step an improvement.  Plain gradient ascent in the
    // factor coordinates stalls near rank-deficient optima (rows of T at
    // zero freeze), which this update does not suffer from.
    while (iterations < tol::kMleMaxIterations && !converged) {
        ++iterations;
        const Mat4 d = likelihood_gradient(ms, rho, total_counts);

        bool accepted = false;
        for (int back = 0; back < 80; ++back) {
            const Mat4 a =
                Mat4::Identity() + (kappa / total_counts) * d;
            Mat4 moved = a * rho * a;
            moved = (moved + Mat4(moved.adjoint())) / 2.0;
            moved /= moved.trace().real();
            const Mat4 trial_t = lower_factor(moved);
            const Mat4 trial_rho = density_from_factor(trial_t);
            const std::vector<double> trial_p = probabilities(ms, trial_rho);
            const double gain = objective_gain(ms, trial_p, probs, total_counts);
            if (gain > 0.0) {
                t = trial_t;
                rho = trial_rho;
                probs = trial_p;
                kappa = std::min(kappa * 1.2, 1e12);
                accepted = true;
                if (gain <= tol::kMleLogLikeImprovement) converged = true;
                break;
            }
            kappa /= 2.0;
            if (kappa < 1e-12) break;
        }
        if (!accepted) {
            // No uphill move at any representable scale: the ascent is done.
            converged = true;
        }
    }

    result.rho = DensityMatrix4(density_from_factor(t));
    result.log_likelihood = reported_likelihood(ms, probs, total_counts);
    result.iterations = iterations;
    result.converged = converged;
    return result;
}

ErrorBars error_bars(const std::vector<CountsRecord>& records,
                     const Vec4& fidelity_target, int replicas,
                     std::uint64_t seed) {
    if (replicas < 2)
        throw std::invalid_argument("bootstrap needs at least two replicas");
    Eigen::Matrix4d sum_re = Eigen::Matrix4d::Zero(), sum_im = sum_re;
    Eigen::Matrix4d sq_re = sum_re, sq_im = sum_re;
    double sum_f = 0.0, sq_f = 0.0;
    for (int r = 0; r < replicas; ++r) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        std::vector<CountsRecord> replica = records;
        for (auto& rec : replica) {
            if (rec.counts <= 0) continue;
            std::poisson_distribution<std::int64_t> draw(
                static_cast<double>(rec.counts));
            rec.counts = draw(rng);
        }
        const TomographyResult fit = mle_reconstruct(replica);
        const Eigen::Matrix4d re = fit.rho.matrix().real();
        const Eigen::Matrix4d im = fit.rho.matrix().imag();
        sum_re += re;
        sq_re += re.cwiseProduct(re);
        sum_im += im;
        sq_im += im.cwiseProduct(im);
        const double f = fidelity(fit.rho, fidelity_target);
        sum_f += f;
        sq_f += f * f;
    }
    const double n = replicas;
    const auto dev = [n](double sq, double sum) {
        return std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1.0)));
    };
    ErrorBars bars;
    bars.replicas = replicas;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            bars.sigma_real(i, j) = dev(sq_re(i, j), sum_re(i, j));
            bars.sigma_imag(i, j) = dev(sq_im(i, j), sum_im(i, j));
        }
    bars.fidelity_sigma = dev(sq_f, sum_f);
    return bars;
}

std::array<SectorTomography, 2> reconstruct_sectors(const DensityMatrix& rho,
                                                    double mean_total,
                                                    std::uint64_t seed) {
    std::array<SectorTomography, 2> out;
    const struct {
        PathSector sector;
        BellKind kind;
        const char* label;
    } plan[2] = {
        {PathSector::RL, BellKind::PhiPlus, "Phi+"},
        {PathSector::LR, BellKind::PhiMinus, "Phi-"},
    };
    for (int i = 0; i < 2; ++i) {
        const ConditionedPolarization cond =
            sector_conditioned_polarization(rho, plan[i].sector);
        SectorTomography& s = out[i];
        s.sector = plan[i].sector;
        s.probability = cond.probability;
        s.target_label = plan[i].label;
        s.target = bell_state(plan[i].kind, Dof::Polarization);
        s.records = simulate_counts(cond.state, mean_total,
                                    derive_seed(seed, static_cast<std::uint64_t>(i)));
        s.result = mle_reconstruct(s.records);
        s.fidelity = fidelity(s.result.rho, s.target);
    }
    return out;
}

}  // namespace c4sim
