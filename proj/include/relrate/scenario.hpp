#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace relrate {

struct CheckOutcome {
    std::string name;
    bool pass = false;
    double value = 0.0;      // headline measurement
    double tolerance = 0.0;  // bound compared against (0 when not applicable)
    std::string detail;
};

struct Table {
    std::string name;  // written to tables/<name>.csv
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct RunReport {
    std::string command;
    std::uint64_t seed = 0;      // 0: scenario defaults were used
    double tol_scale = 1.0;
    std::vector<CheckOutcome> checks;
    std::vector<Table> tables;
    bool all_pass() const;
};

struct RunOptions {
    std::uint64_t seed_override = 0;  // 0 keeps the seeds in the scenario
    double tol_scale = 1.0;           // multiplies every tolerance
    int threads = 1;                  // simulation worker threads
};

// kind: one of static, choice, decompose, market, mc, all.
RunReport run_builtin(const std::string& kind, const RunOptions& options);

// Runs a scenario file; the JSON must carry "version": 1 and a known "kind".
// Unknown keys anywhere in the document are rejected. A non-empty
// expected_kind must match the file's kind.
RunReport run_scenario_file(const std::string& path, const RunOptions& options,
                            const std::string& expected_kind = {});

std::string render_summary(const RunReport& report);

// Writes report.json, summary.txt and tables/*.csv under out_dir; report
// bytes depend only on the run results except for the generated_at field.
void write_outputs(const RunReport& report, const std::string& out_dir);

}  // namespace relrate
