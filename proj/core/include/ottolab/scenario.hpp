#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ottolab/config.hpp"
#include "ottolab/report.hpp"

namespace ottolab {

// Outcome of one scenario run. Wall-clock timings are kept apart from the
// deterministic payload so that repeated runs produce byte-identical
// report/CSV files.
struct RunReport {
    ExperimentConfig config;
    int exit_status = 0;  // 0 all pass; 1 numerical failure
    std::vector<InequalityReport> inequalities;
    std::map<std::string, double> diagnostics;

    struct Series {
        std::vector<std::string> columns;
        std::vector<std::vector<double>> rows;
    };
    std::map<std::string, Series> series;
    std::map<std::string, double> timings_ms;
};

RunReport run_scenario(const ExperimentConfig& cfg);

// Writes report.json, the per-suite CSV files, spectrum.csv and timings.txt
// into cfg.out_dir (creating it). Returns the report path.
std::string write_report(const RunReport& report, const std::string& dir);

// id -> one-line description
std::vector<std::pair<std::string, std::string>> builtin_scenarios();
bool is_builtin_scenario(const std::string& id);
std::string builtin_config_text(const std::string& id);

// Extracts a named series from a written report and saves it as columns of
// plain text ready for any plotting tool.
void emit_plot_data(const std::string& report_path, const std::string& series_name,
                    const std::string& out_path);

}  // namespace ottolab
