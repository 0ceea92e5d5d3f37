#pragma once

#include "shelab/experiments.hpp"

#include <string>

namespace shelab {

inline constexpr const char* kSoftwareVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

/// "# shelab-csv v1 series=<name>", the column header, then rows with 17 significant digits.
std::string csv_text(const Table& t);
/// Everything after the schema comment line.
std::string csv_body(const std::string& csv);
Table parse_csv(const std::string& csv);

std::string config_to_json(const ExperimentConfig& c);
/// Unknown keys are rejected; missing keys keep their defaults.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::string report_to_json(const RunReport& r);
/// Human-readable summary of a report.json document.
std::string summarize_report_json(const std::string& text);

} // namespace shelab
