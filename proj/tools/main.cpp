// Command-line front end: state inspection, witness/AVN verification,
// delayed-path interference scans, sector tomography, and noise calibration.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "c4sim/apparatus.hpp"
#include "c4sim/io.hpp"
#include "c4sim/states.hpp"
#include "c4sim/tomo.hpp"
#include "c4sim/verify.hpp"
#include "c4sim/version.hpp"

namespace {

using namespace c4sim;

struct SourceOptions {
    bool ideal = false;
    std::string noise_spec;
    bool calibrated = false;
};

struct Source {
    std::string description;
    bool is_ideal = true;
    NoiseParams params;  // meaningful when !is_ideal
    std::optional<CalibrationResult> fit;
};

NoiseParams parse_noise_spec(const std::string& spec) {
    NoiseParams p{1.0, 1.0, 0.0};
    bool saw_v = false, saw_mu = false;
    std::istringstream in(spec);
    std::string token;
    while (std::getline(in, token, ',')) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--noise expects v=..,mu=..[,z=..], got '" +
                                     token + "'");
        const std::string key = token.substr(0, eq);
        double value = 0.0;
        try {
            value = std::stod(token.substr(eq + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("--noise: malformed number in '" + token +
                                     "'");
        }
        if (key == "v") {
            p.v_pol = value;
            saw_v = true;
        } else if (key == "mu") {
            p.mu_mom = value;
            saw_mu = true;
        } else if (key == "z") {
            p.z_err = value;
        } else {
            throw std::runtime_error("--noise: unknown parameter '" + key + "'");
        }
    }
    if (!saw_v || !saw_mu)
        throw std::runtime_error("--noise needs at least v=.. and mu=..");
    return p;
}

void add_source_options(CLI::App* cmd, SourceOptions& opts) {
    auto* ideal = cmd->add_flag("--ideal", opts.ideal, "noise-free source");
    auto* noise = cmd->add_option("--noise", opts.noise_spec,
                                  "noise parameters v=..,mu=..[,z=..]");
    auto* calibrated =
        cmd->add_flag("--calibrated", opts.calibrated,
                      "noise parameters fitted to the built-in target table");
    ideal->excludes(noise)->excludes(calibrated);
    noise->excludes(calibrated);
}

Source resolve_source(const SourceOptions& opts) {
    Source src;
    if (!opts.noise_spec.empty()) {
        src.is_ideal = false;
        src.params = parse_noise_spec(opts.noise_spec);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "noise v=%.6g,mu=%.6g,z=%.6g",
                      src.params.v_pol, src.params.mu_mom, src.params.z_err);
        src.description = buf;
    } else if (opts.calibrated) {
        src.is_ideal = false;
        src.fit = calibrate_noise(default_calibration_targets());
        src.params = src.fit->params;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "calibrated v=%.6g,mu=%.6g,z=%.6g",
                      src.params.v_pol, src.params.mu_mom, src.params.z_err);
        src.description = buf;
    } else {
        src.description = "ideal";
    }
    return src;
}

DensityMatrix source_density(const Source& src) {
    const StateVector c4 = cluster_state();
    return src.is_ideal ? density(c4) : apply_noise(c4, src.params);
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        io::atomic_write_text(out_path, text);
}

std::string ket_label(int idx) {
    // A photon first in each group: polarization pair, then path pair.
    std::string s = "|";
    s += slot_bit(idx, 2) ? 'V' : 'H';
    s += slot_bit(idx, 1) ? 'V' : 'H';
    s += ';';
    s += slot_bit(idx, 3) ? 'r' : 'l';
    s += slot_bit(idx, 4) ? 'r' : 'l';
    s += '>';
    return s;
}

void print_amplitudes(std::ostringstream& out, const StateVector& psi) {
    for (int i = 0; i < kDim; ++i) {
        const cd a = psi.amplitude(i);
        if (std::abs(a) < 1e-12) continue;
        char buf[80];
        std::snprintf(buf, sizeof(buf), "  %s  %+.6f%+.6fi\n",
                      ket_label(i).c_str(), a.real(), a.imag());
        out << buf;
    }
}

std::string format_pm(double value, double sigma) {
    char buf[64];
    if (sigma > 0.0)
        std::snprintf(buf, sizeof(buf), "%+.4f +- %.4f", value, sigma);
    else
        std::snprintf(buf, sizeof(buf), "%+.4f", value);
    return buf;
}

std::uint64_t observable_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---- state ----

int run_state(const Source& src, bool logical, const std::string& format,
              const std::string& out_path) {
    std::ostringstream out;
    const io::RunHeader header{"state", src.description, std::nullopt};
    if (src.is_ideal) {
        const StateVector xi = hyperentangled_state();
        const StateVector c4 = cluster_state();
        if (format == "json") {
            io::json j;
            j["header"] = io::to_json(header);
            auto state_json = [](const StateVector& psi) {
                io::json arr = io::json::array();
                for (int i = 0; i < kDim; ++i) {
                    const cd a = psi.amplitude(i);
                    if (std::abs(a) < 1e-12) continue;
                    arr.push_back(io::json{{"ket", ket_label(i)},
                                           {"re", a.real()},
                                           {"im", a.imag()}});
                }
                return arr;
            };
            j["hyperentangled"] = state_json(xi);
            j["cluster"] = state_json(c4);
            if (logical) j["logical"] = state_json(logical_map(c4));
            out << j.dump(2) << '\n';
        } else {
            out << "hyperentangled state (polarization Phi-, path psi+):\n";
            print_amplitudes(out, xi);
            out << "after the controlled-phase gate (cluster state):\n";
            print_amplitudes(out, c4);
            if (logical) {
                out << "logical relabeling (path flip on photon A):\n";
                print_amplitudes(out, logical_map(c4));
            }
        }
        emit(out.str(), out_path);
        return 0;
    }

    const DensityMatrix rho = source_density(src);
    const StateVector c4 = cluster_state();
    const auto rl = sector_conditioned_polarization(rho, PathSector::RL);
    const auto lr = sector_conditioned_polarization(rho, PathSector::LR);
    const double f = fidelity(rho, c4);
    const double purity = rho.purity();
    const double w = witness(rho).value();
    const double s = avn(rho).value();
    if (format == "json") {
        io::json j;
        j["header"] = io::to_json(header);
        j["noise"] = io::to_json(src.params);
        j["cluster_fidelity"] = f;
        j["purity"] = purity;
        j["witness"] = w;
        j["avn"] = s;
        j["sector_probability"] = {{"rA_lB", rl.probability},
                                   {"lA_rB", lr.probability}};
        out << j.dump(2) << '\n';
    } else {
        char buf[256];
        out << "source: " << src.description << '\n';
        std::snprintf(buf, sizeof(buf),
                      "cluster fidelity %.6f   purity %.6f\n"
                      "witness %+.6f   avn %.6f\n"
                      "sector probabilities: rA_lB %.6f, lA_rB %.6f\n",
                      f, purity, w, s, rl.probability, lr.probability);
        out << buf;
    }
    emit(out.str(), out_path);
    return 0;
}

// ---- verify ----

int run_verify(const Source& src, const std::string& table_path,
               double mean_counts, std::uint64_t seed,
               const std::string& format, const std::string& out_path) {
    std::ostringstream out;
    WitnessReport wit{{}, ""};
    AvnReport av{{}, ""};
    std::array<ControlCheck, 7> controls;
    std::vector<io::json> observable_rows;
    io::RunHeader header{"verify", src.description, std::nullopt};

    if (!table_path.empty()) {
        header.source = "table " + table_path;
        std::vector<TermValue> values;
        for (const auto& t : io::load_targets(table_path))
            values.push_back({t.label, t.value, t.sigma});
        wit = witness_from_values(values);
        av = avn_from_values(values);
        controls = reality_controls_from_values(values);
        for (const auto& row : table_one())
            observable_rows.push_back(
                io::json{{"observable", row.label},
                         {"value", find_if(values.begin(), values.end(),
                                           [&](const TermValue& v) {
                                               return v.label == row.label;
                                           })
                                       ->value},
                         {"sigma", find_if(values.begin(), values.end(),
                                           [&](const TermValue& v) {
                                               return v.label == row.label;
                                           })
                                       ->sigma}});
    } else {
        header.seed = seed;
        const DensityMatrix rho = source_density(src);
        std::vector<ObservableCounts> counts;
        std::uint64_t index = 0;
        for (const auto& row : table_one()) {
            const PauliString obs = PauliString::parse(row.label);
            counts.push_back({obs, simulate_outcome_counts(
                                       rho, obs, mean_counts,
                                       observable_seed(seed, index++))});
        }
        wit = witness_from_counts(counts);
        av = avn_from_counts(counts);
        std::vector<TermValue> values;
        for (const auto& c : counts) {
            const TermEstimate est = estimate_term(c.observable, c.counts);
            values.push_back({c.observable.name(), est.value, est.sigma});
        }
        controls = reality_controls_from_values(values);
        for (const auto& v : values) {
            observable_rows.push_back(
                io::json{{"observable", v.label},
                         {"value", v.value},
                         {"sigma", v.sigma},
                         {"model", expectation(rho, PauliString::parse(v.label))}});
        }
    }

    if (format == "json") {
        io::json j;
        j["header"] = io::to_json(header);
        j["observables"] = observable_rows;
        j["witness"] = io::to_json(wit);
        j["avn"] = io::to_json(av);
        io::json ctrl = io::json::array();
        for (const auto& c : controls) ctrl.push_back(io::to_json(c));
        j["controls"] = ctrl;
        out << j.dump(2) << '\n';
    } else {
        out << "source: " << header.source << '\n';
        out << "observable        value                  membership\n";
        for (const auto& row : table_one()) {
            const auto it = std::find_if(
                observable_rows.begin(), observable_rows.end(),
                [&](const io::json& r) { return r["observable"] == row.label; });
            char buf[160];
            std::string membership;
            if (row.in_witness) membership += 'W';
            if (row.in_avn) membership += 'S';
            if (row.in_control) membership += 'C';
            std::snprintf(buf, sizeof(buf), "%-16s  %-20s   %s\n",
                          row.label.c_str(),
                          format_pm((*it)["value"].get<double>(),
                                    (*it)["sigma"].get<double>())
                              .c_str(),
                          membership.c_str());
            out << buf;
        }
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "witness      %s   (fidelity bound %.4f)\n",
                      format_pm(wit.value(), wit.sigma()).c_str(),
                      wit.fidelity_lower_bound());
        out << buf;
        if (av.sigma() > 0.0)
            std::snprintf(buf, sizeof(buf),
                          "avn          %s   (%.1f sigma above the local bound %g)\n",
                          format_pm(av.value(), av.sigma()).c_str(),
                          av.sigmas_above_classical(), kAvnClassicalBound);
        else
            std::snprintf(buf, sizeof(buf), "avn          %s   (local bound %g)\n",
                          format_pm(av.value(), av.sigma()).c_str(),
                          kAvnClassicalBound);
        out << buf;
        int consistent = 0, definite = 0;
        for (const auto& c : controls) {
            consistent += c.sign_consistent;
            definite += c.definite;
        }
        std::snprintf(buf, sizeof(buf),
                      "controls     %d/7 sign-consistent, %d/7 definite\n",
                      consistent, definite);
        out << buf;
    }
    emit(out.str(), out_path);
    return 0;
}

// ---- scan ----

int run_scan(const Source& src, double from_um, double to_um, double step_um,
             const std::string& format, const std::string& out_path) {
    if (!(step_um > 0.0) || to_um < from_um)
        throw std::runtime_error("scan range needs from <= to and step > 0");
    const DensityMatrix rho = source_density(src);
    std::vector<double> delays;
    for (double d = from_um; d <= to_um + 1e-9; d += step_um)
        delays.push_back(d);
    const DelayScanOptions options;
    const auto rate_h = delay_scan(rho, Polarization::H, delays, options);
    const auto rate_v = delay_scan(rho, Polarization::V, delays, options);
    const double vis_h = scan_visibility(rho, Polarization::H, options);
    const auto& env = options.envelope;

    std::ostringstream out;
    if (format == "csv") {
        out << io::scan_csv(delays, rate_h, rate_v);
    } else if (format == "json") {
        io::json j;
        j["header"] = io::to_json(
            io::RunHeader{"scan", src.description, std::nullopt});
        j["envelope"] = {{"fwhm_time_fs", env.fwhm_time_fs},
                         {"fwhm_length_um", env.fwhm_length_um}};
        j["visibility_h"] = vis_h;
        j["delay_um"] = delays;
        j["rate_h"] = rate_h;
        j["rate_v"] = rate_v;
        out << j.dump(2) << '\n';
    } else {
        char buf[160];
        out << "source: " << src.description << '\n';
        std::snprintf(buf, sizeof(buf),
                      "coherence envelope: %.1f fs FWHM = %.2f um\n"
                      "monitored pair l'_A r'_B, visibility (H) %.4f\n",
                      env.fwhm_time_fs, env.fwhm_length_um, vis_h);
        out << buf << "delay_um    rate_H      rate_V\n";
        for (std::size_t i = 0; i < delays.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%+9.2f  %9.3f  %9.3f\n", delays[i],
                          rate_h[i], rate_v[i]);
            out << buf;
        }
    }
    emit(out.str(), out_path);
    return 0;
}

// ---- tomo ----

int run_tomo(const Source& src, double mean_counts, int replicas,
             std::uint64_t seed, const std::string& format,
             const std::string& out_path) {
    const DensityMatrix rho = source_density(src);
    const auto sectors = reconstruct_sectors(rho, mean_counts, seed);
    std::array<std::optional<ErrorBars>, 2> bars;
    for (int i = 0; i < 2; ++i)
        if (replicas >= 2)
            bars[i] = error_bars(sectors[i].records, sectors[i].target, replicas,
                                 observable_seed(seed, 100 + i));

    std::ostringstream out;
    if (format == "csv") {
        std::vector<CountsRecord> all;
        for (const auto& s : sectors)
            for (auto rec : s.records) {
                rec.setting_id = io::sector_name(s.sector) + "/" + rec.setting_id;
                all.push_back(rec);
            }
        out << io::counts_csv(all);
    } else if (format == "json") {
        io::json j;
        j["header"] =
            io::to_json(io::RunHeader{"tomo", src.description, seed});
        io::json arr = io::json::array();
        for (int i = 0; i < 2; ++i) {
            io::json s = io::to_json(sectors[i]);
            if (bars[i]) s["error_bars"] = io::to_json(*bars[i]);
            arr.push_back(s);
        }
        j["sectors"] = arr;
        out << j.dump(2) << '\n';
    } else {
        out << "source: " << src.description << '\n';
        for (int i = 0; i < 2; ++i) {
            const auto& s = sectors[i];
            char buf[256];
            std::snprintf(
                buf, sizeof(buf),
                "sector %s  probability %.4f  target %s  fidelity %.4f",
                io::sector_name(s.sector).c_str(), s.probability,
                s.target_label.c_str(), s.fidelity);
            out << buf;
            if (bars[i]) {
                std::snprintf(buf, sizeof(buf), " +- %.4f (%d replicas)",
                              bars[i]->fidelity_sigma, bars[i]->replicas);
                out << buf;
            }
            out << '\n';
            out << "  rho (re | im):\n";
            for (int row = 0; row < 4; ++row) {
                out << "   ";
                for (int col = 0; col < 4; ++col) {
                    std::snprintf(buf, sizeof(buf), " %+.4f",
                                  s.result.rho.matrix()(row, col).real());
                    out << buf;
                }
                out << "  |";
                for (int col = 0; col < 4; ++col) {
                    std::snprintf(buf, sizeof(buf), " %+.4f",
                                  s.result.rho.matrix()(row, col).imag());
                    out << buf;
                }
                out << '\n';
            }
            if (bars[i]) {
                std::snprintf(buf, sizeof(buf),
                              "  max element sigma: re %.4f, im %.4f\n",
                              bars[i]->sigma_real.maxCoeff(),
                              bars[i]->sigma_imag.maxCoeff());
                out << buf;
            }
        }
    }
    emit(out.str(), out_path);
    return 0;
}

// ---- calibrate ----

int run_calibrate(const std::string& table_path, const std::string& format,
                  const std::string& out_path) {
    const std::vector<ObservableTarget> targets =
        table_path.empty() ? default_calibration_targets()
                           : io::load_targets(table_path);
    const CalibrationResult fit = calibrate_noise(targets);
    const DensityMatrix rho = apply_noise(cluster_state(), fit.params);
    const double f_plus = noise_model_prediction(fit.params, kFidelityPhiPlusLabel);
    const double f_minus =
        noise_model_prediction(fit.params, kFidelityPhiMinusLabel);
    const double vis = scan_visibility(rho, Polarization::H);

    std::ostringstream out;
    if (format == "json") {
        io::json j;
        j["header"] = io::to_json(io::RunHeader{
            "calibrate",
            table_path.empty() ? "built-in targets" : "table " + table_path,
            std::nullopt});
        j["fit"] = io::to_json(fit);
        j["model_fidelity"] = {{"Phi+", f_plus}, {"Phi-", f_minus}};
        j["model_visibility"] = vis;
        out << j.dump(2) << '\n';
    } else {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "fitted noise: v=%.7f mu=%.7f z=%.7f\n"
                      "converged=%s iterations=%d cost=%.6e\n",
                      fit.params.v_pol, fit.params.mu_mom, fit.params.z_err,
                      fit.converged ? "yes" : "no", fit.iterations, fit.cost);
        out << buf;
        out << "observable        target     model      residual\n";
        for (std::size_t i = 0; i < fit.labels.size(); ++i) {
            const double model =
                noise_model_prediction(fit.params, fit.labels[i]);
            std::snprintf(buf, sizeof(buf), "%-16s  %+.4f    %+.4f    %+.4f\n",
                          fit.labels[i].c_str(), model - fit.residuals[i], model,
                          fit.residuals[i]);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "model sector fidelities: Phi+ %.6f, Phi- %.6f\n"
                      "model scan visibility: %.4f\n",
                      f_plus, f_minus, vis);
        out << buf;
    }
    emit(out.str(), out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-photon four-qubit linear cluster state simulator"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string format = "table", out_path;
    std::uint64_t seed = 12345;

    auto add_common = [&](CLI::App* cmd, bool with_seed,
                          std::vector<std::string> formats) {
        cmd->add_option("--format", format, "output format")
            ->check(CLI::IsMember(formats));
        cmd->add_option("--out", out_path, "write output to a file");
        if (with_seed) cmd->add_option("--seed", seed, "random seed");
    };

    SourceOptions source_opts;
    bool logical = false;
    double counts_verify = 12000.0, counts_tomo = 50000.0;
    int replicas = 100;
    double from_um = -120.0, to_um = 120.0, step_um = 2.0;
    std::string table_path;

    auto* state = app.add_subcommand("state", "print the prepared state");
    add_source_options(state, source_opts);
    state->add_flag("--logical", logical,
                    "also print the logical relabeling (ideal source only)");
    add_common(state, false, {"table", "json"});

    auto* verify = app.add_subcommand(
        "verify", "witness, AVN combination and reality controls");
    add_source_options(verify, source_opts);
    auto* from_table = verify->add_option(
        "--from-table", table_path,
        "evaluate tabulated expectation values instead of simulating");
    from_table->excludes("--ideal")->excludes("--noise")->excludes(
        "--calibrated");
    verify->add_option("--counts", counts_verify,
                       "mean coincidences per observable");
    add_common(verify, true, {"table", "json"});

    auto* scan =
        app.add_subcommand("scan", "coincidence rate vs trombone delay");
    add_source_options(scan, source_opts);
    scan->add_option("--from", from_um, "start delay (um)");
    scan->add_option("--to", to_um, "end delay (um)");
    scan->add_option("--step", step_um, "delay step (um)");
    add_common(scan, false, {"table", "json", "csv"});

    auto* tomo = app.add_subcommand(
        "tomo", "path-conditioned polarization tomography of both sectors");
    add_source_options(tomo, source_opts);
    tomo->add_option("--counts", counts_tomo, "mean total counts per sector");
    tomo->add_option("--replicas", replicas,
                     "bootstrap replicas for error bars (0 disables)");
    add_common(tomo, true, {"table", "json", "csv"});

    auto* calibrate = app.add_subcommand(
        "calibrate", "fit the noise model to a target table");
    calibrate->add_option("--table", table_path,
                          "target table (JSON); defaults to the built-in one");
    add_common(calibrate, false, {"table", "json"});

    CLI11_PARSE(app, argc, argv);

    try {
        if (state->parsed()) {
            const Source src = resolve_source(source_opts);
            if (logical && !src.is_ideal)
                throw std::runtime_error("--logical requires --ideal");
            return run_state(src, logical, format, out_path);
        }
        if (verify->parsed()) {
            Source src;
            if (table_path.empty())
                src = resolve_source(source_opts);
            else
                src.description = "table";
            return run_verify(src, table_path, counts_verify, seed, format,
                              out_path);
        }
        if (scan->parsed())
            return run_scan(resolve_source(source_opts), from_um, to_um,
                            step_um, format, out_path);
        if (tomo->parsed())
            return run_tomo(resolve_source(source_opts), counts_tomo, replicas,
                            seed, format, out_path);
        if (calibrate->parsed())
            return run_calibrate(table_path, format, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
