#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mwlp/config.hpp"
#include "mwlp/error.hpp"

namespace mwlp {

struct ReportEntry {
    std::string command;
    std::string code;
    std::string message;
};

struct Table {
    std::string name;  // written as <name>.csv
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Timing {
    std::string command;
    double seconds = 0.0;
};

struct RunReport {
    nlohmann::json config;
    nlohmann::json results = nlohmann::json::object();
    std::vector<ReportEntry> warnings;
    std::vector<ReportEntry> errors;
    std::vector<Table> tables;
    std::vector<Timing> timings;  // kept out of report.json
    double wall_time = 0.0;
    int exit_code = 0;
};

/// 0 on success, 2 for ConfigInvalid and IoFailure, 3 for everything else.
int exit_code_for(ErrorCode code);

/// Runs the configured command (all commands for `all`). Module errors are
/// recorded per command and the remaining commands still run.
RunReport run(const ExperimentConfig& cfg);

/// Deterministic payload: config echo, results, warnings, errors, exit code.
nlohmann::json to_json(const RunReport& report);

std::string to_csv(const Table& table);

/// Writes report.json and one CSV per table into `dir` (created if needed),
/// and appends timestamps and timings to dir/run.log. Throws IoFailure.
void write_report(const RunReport& report, const std::string& dir);

}  // namespace mwlp
