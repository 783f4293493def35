#pragma once

// Serialization: JSON views of reports and reconstructions, CSV round-trip
// for counts and scan traces, target-table files, and atomic text output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "c4sim/states.hpp"
#include "c4sim/tomo.hpp"
#include "c4sim/verify.hpp"

namespace c4sim::io {

using json = nlohmann::ordered_json;

// Provenance block placed at the top of every machine-readable output.
struct RunHeader {
    std::string command;
    std::string source;  // state preparation, e.g. "ideal" or "calibrated"
    std::optional<std::uint64_t> seed;
};

json to_json(const RunHeader& header);
json to_json(const NoiseParams& params);
json to_json(const TermValue& term);
json to_json(const WitnessReport& report);
json to_json(const AvnReport& report);
json to_json(const ControlCheck& check);
json to_json(const CalibrationResult& result);
json to_json(const CountsRecord& record);
json to_json(const TomographyResult& result);
json to_json(const ErrorBars& bars);
json to_json(const SectorTomography& sector);

json matrix_json(const Eigen::MatrixXcd& m);
json matrix_json(const Eigen::MatrixXd& m);

std::string sector_name(PathSector sector);

// Target tables: JSON array of {"observable", "value", "sigma"}.
json targets_to_json(const std::vector<ObservableTarget>& targets);
std::vector<ObservableTarget> targets_from_json(const json& j);
std::vector<ObservableTarget> load_targets(const std::string& path);
void save_targets(const std::string& path,
                  const std::vector<ObservableTarget>& targets);

// Counts tables: CSV with header setting_id,projector,counts,time_s.
std::string counts_csv(const std::vector<CountsRecord>& records);
std::vector<CountsRecord> parse_counts_csv(const std::string& text);

// Delay-scan trace: CSV with header delay_um,rate_h,rate_v.
std::string scan_csv(const std::vector<double>& delays_um,
                     const std::vector<double>& rates_h,
                     const std::vector<double>& rates_v);

std::string read_text(const std::string& path);

// Writes via a temporary in the same directory and renames into place, so a
// crash never leaves a half-written file at the destination.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace c4sim::io
