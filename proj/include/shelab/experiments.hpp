#pragma once

#include "shelab/grid.hpp"
#include "shelab/she_sim.hpp"
#include "shelab/stats.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace shelab {

enum class ExperimentKind { simulate, covariance, clt, fdd, shift_check, oracle_suite, diagnostics };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::covariance;
    std::uint64_t master_seed = 1;
    GridSpec grid;
    Refinement refinement;     // x_max = 0 means bulk_half_width + 2
    std::vector<double> times; // checkpoints
    std::vector<double> lags;  // covariance lags; probe positions for simulate / first_moment
    std::vector<double> N_values;
    std::size_t replicates = 0;             // ids [0, M)
    std::size_t calibration_replicates = 1; // ids [M, M + M_cal), used for the centering mean
    double bulk_half_width = 0.0;
    double significance = 0.001;
    unsigned workers = 1;
    std::string output_dir;

    // covariance
    double fit_lo = 3.0, fit_hi = 10.0;
    std::vector<double> band_lags = {4.0, 6.0, 8.0};
    std::vector<double> stationarity_points; // empty: five points spread over the bulk

    // shift_check: source time s and probe points (x, y); t = times[0]
    double source_time = 0.25;
    std::vector<std::pair<double, double>> probes;

    // diagnostics: any of "noise_free", "first_moment", "second_moment", "holder"
    std::vector<std::string> diagnostics;
    std::vector<double> holder_times = {0.001, 0.0025, 0.01, 0.025, 0.1};
    double holder_resolution = 0.05; // dx = resolution * sqrt(s)

    // simulate: also write every checkpoint field as a binary snapshot
    bool write_fields = false;
};

/// Every violated invariant, one message each (empty when valid).
std::vector<std::string> validation_errors(const ExperimentConfig& c);
/// Throws ConfigError listing all violations.
void validate(const ExperimentConfig& c);

/// One CSV row: (t, lag_or_N, estimate, se, n_effective).
struct Row {
    double t = 0.0;
    double key = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double n_effective = 0.0;
};

struct Table {
    std::string series;
    std::vector<Row> rows;
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunReport {
    ExperimentConfig config;
    std::vector<Table> tables;
    std::vector<TestReport> tests;
    std::vector<Verdict> verdicts;
    double wall_seconds = 0.0;
    std::size_t replicates_run = 0;
    std::string software_version;
    int schema_version = 1;

    const Table& table(const std::string& series) const;
    bool all_pass() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the experiment; with a non-empty output_dir writes one CSV per table plus report.json.
/// On a write failure every file written so far is removed and IoError is thrown.
RunReport run(const ExperimentConfig& c, const ProgressFn& progress = {});

/// Writes tables and report.json into dir; returns the written paths.
std::vector<std::string> write_outputs(const RunReport& r, const std::string& dir);

} // namespace shelab
