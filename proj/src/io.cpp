#include "c4sim/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "c4sim/version.hpp"

namespace c4sim::io {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) fields.push_back(field);
    if (!line.empty() && line.back() == sep) fields.push_back("");
    return fields;
}

[[noreturn]] void bad_line(std::size_t number, const std::string& why) {
    throw std::runtime_error("counts CSV line " + std::to_string(number) +
                             ": " + why);
}

}  // namespace

json to_json(const RunHeader& header) {
    json j;
    j["command"] = header.command;
    j["version"] = std::string(kVersion);
    j["source"] = header.source;
    if (header.seed)
        j["seed"] = *header.seed;
    else
        j["seed"] = nullptr;
    return j;
}

json to_json(const NoiseParams& params) {
    return json{{"v", params.v_pol}, {"mu", params.mu_mom}, {"z", params.z_err}};
}

json to_json(const TermValue& term) {
    return json{{"observable", term.label},
                {"value", term.value},
                {"sigma", term.sigma}};
}

json to_json(const WitnessReport& report) {
    json terms = json::array();
    for (const auto& t : report.terms) terms.push_back(to_json(t));
    return json{{"provenance", report.provenance},
                {"terms", terms},
                {"value", report.value()},
                {"sigma", report.sigma()},
                {"fidelity_lower_bound", report.fidelity_lower_bound()}};
}

json to_json(const AvnReport& report) {
    json terms = json::array();
    for (const auto& t : report.terms) terms.push_back(to_json(t));
    json j{{"provenance", report.provenance},
           {"terms", terms},
           {"value", report.value()},
           {"sigma", report.sigma()},
           {"classical_bound", kAvnClassicalBound},
           {"quantum_value", kAvnQuantumValue}};
    j["sigmas_above_classical"] =
        report.sigma() > 0.0 ? json(report.sigmas_above_classical()) : json();
    return j;
}

json to_json(const ControlCheck& check) {
    return json{{"observable", check.label},
                {"value", check.value},
                {"sigma", check.sigma},
                {"expected_sign", check.expected_sign},
                {"sign_consistent", check.sign_consistent},
                {"definite", check.definite}};
}

json to_json(const CalibrationResult& result) {
    json residuals = json::array();
    for (std::size_t i = 0; i < result.labels.size(); ++i) {
        residuals.push_back(json{{"observable", result.labels[i]},
                                 {"model", noise_model_prediction(
                                               result.params, result.labels[i])},
                                 {"residual", result.residuals[i]}});
    }
    return json{{"params", to_json(result.params)},
                {"converged", result.converged},
                {"iterations", result.iterations},
                {"cost", result.cost},
                {"max_abs_residual", result.max_abs_residual()},
                {"residuals", residuals}};
}

json to_json(const CountsRecord& record) {
    return json{{"setting_id", record.setting_id},
                {"projector", record.projector},
                {"counts", record.counts},
                {"time_s", record.time_s}};
}

json to_json(const TomographyResult& result) {
    return json{{"rho", matrix_json(Eigen::MatrixXcd(result.rho.matrix()))},
                {"log_likelihood", result.log_likelihood},
                {"iterations", result.iterations},
                {"converged", result.converged},
                {"complete_set", result.complete_set}};
}

json to_json(const ErrorBars& bars) {
    return json{{"replicas", bars.replicas},
                {"sigma_real", matrix_json(Eigen::MatrixXd(bars.sigma_real))},
                {"sigma_imag", matrix_json(Eigen::MatrixXd(bars.sigma_imag))},
                {"fidelity_sigma", bars.fidelity_sigma}};
}

json to_json(const SectorTomography& sector) {
    json records = json::array();
    for (const auto& r : sector.records) records.push_back(to_json(r));
    return json{{"sector", sector_name(sector.sector)},
                {"probability", sector.probability},
                {"target", sector.target_label},
                {"fidelity", sector.fidelity},
                {"tomography", to_json(sector.result)},
                {"records", records}};
}

json matrix_json(const Eigen::MatrixXcd& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json re_row = json::array(), im_row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            re_row.push_back(m(i, j).real());
            im_row.push_back(m(i, j).imag());
        }
        re.push_back(re_row);
        im.push_back(im_row);
    }
    return json{{"re", re}, {"im", im}};
}

json matrix_json(const Eigen::MatrixXd& m) {
    return matrix_json(Eigen::MatrixXcd(m.cast<cd>()));
}

std::string sector_name(PathSector sector) {
    return sector == PathSector::RL ? "rA_lB" : "lA_rB";
}

json targets_to_json(const std::vector<ObservableTarget>& targets) {
    json j = json::array();
    for (const auto& t : targets)
        j.push_back(json{{"observable", t.label},
                         {"value", t.value},
                         {"sigma", t.sigma}});
    return j;
}

std::vector<ObservableTarget> targets_from_json(const json& j) {
    if (!j.is_array())
        throw std::runtime_error("target table must be a JSON array");
    std::vector<ObservableTarget> targets;
    targets.reserve(j.size());
    for (const auto& entry : j) {
        if (!entry.is_object() || !entry.contains("observable") ||
            !entry.contains("value"))
            throw std::runtime_error(
                "each target needs an observable and a value");
        ObservableTarget t;
        t.label = entry.at("observable").get<std::string>();
        t.value = entry.at("value").get<double>();
        t.sigma = entry.value("sigma", 0.0);
        targets.push_back(t);
    }
    return targets;
}

std::vector<ObservableTarget> load_targets(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return targets_from_json(j);
}

void save_targets(const std::string& path,
                  const std::vector<ObservableTarget>& targets) {
    atomic_write_text(path, targets_to_json(targets).dump(2) + "\n");
}

std::string counts_csv(const std::vector<CountsRecord>& records) {
    std::ostringstream out;
    out << "setting_id,projector,counts,time_s\n";
    for (const auto& r : records)
        out << r.setting_id << ',' << r.projector << ',' << r.counts << ','
            << r.time_s << '\n';
    return out.str();
}

std::vector<CountsRecord> parse_counts_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<CountsRecord> records;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (number == 1) {
            if (line != "setting_id,projector,counts,time_s")
                bad_line(number, "unexpected header '" + line + "'");
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 4) bad_line(number, "expected 4 fields");
        CountsRecord r;
        r.setting_id = fields[0];
        r.projector = fields[1];
        try {
            r.counts = std::stoll(fields[2]);
            r.time_s = std::stod(fields[3]);
        } catch (const std::exception&) {
            bad_line(number, "malformed number");
        }
        records.push_back(r);
    }
    if (records.empty())
        throw std::runtime_error("counts CSV contains no records");
    return records;
}

std::string scan_csv(const std::vector<double>& delays_um,
                     const std::vector<double>& rates_h,
                     const std::vector<double>& rates_v) {
    if (delays_um.size() != rates_h.size() || delays_um.size() != rates_v.size())
        throw std::invalid_argument("scan columns must have equal length");
    std::ostringstream out;
    out << "delay_um,rate_h,rate_v\n";
    for (std::size_t i = 0; i < delays_um.size(); ++i)
        out << delays_um[i] << ',' << rates_h[i] << ',' << rates_v[i] << '\n';
    return out.str();
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw std::runtime_error("failed reading " + path);
    return buffer.str();
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + tmp.string() +
                                     " for writing");
        out << content;
        out.flush();
        if (!out.good())
            throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace c4sim::io
