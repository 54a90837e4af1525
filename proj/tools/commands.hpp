#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "verify.hpp"

namespace spiralflow {

struct Artifact {
    std::string file;
    std::string content;
};

struct RunOutcome {
    nlohmann::json report;
    std::vector<Check> checks;
    std::vector<Artifact> files;

    bool ok() const;
};

// Normalized echo of the configuration (threads and output directory left out).
nlohmann::json echo(const RunConfig& cfg);

// Runs the selected pipeline in memory. Solver errors become failed checks.
RunOutcome execute(const RunConfig& cfg);

// Creates the directory, writes report.json and the CSV artifacts.
void write_outputs(const RunOutcome& out, const std::string& dir);

// CSV text: a comment header naming the field and run, then `columns`, then rows at 17 digits.
std::string csv_text(const std::string& field, const std::string& run_id, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

}  // namespace spiralflow
