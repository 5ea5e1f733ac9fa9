#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "neuralize.hpp"
#include "tm.hpp"

namespace sparsec {

/// Process exit codes shared by the pipeline and the command line.
enum class ExitCode : int { Ok = 0, CheckFailed = 1, InputError = 2, Infeasible = 3 };

ExitCode exit_code_for(ErrorCode code);

/// Source strings are file paths or "builtin:<name>".
struct PipelineConfig {
    std::optional<std::string> machine;
    std::optional<std::string> program;
    int n = 4;                          // machine: input bits; program: bits per coordinate
    int m_out = 4;
    std::optional<double> eps;          // default 2^-m_out
    GadgetMode mode = GadgetMode::Robust;
    double delta = 0.1;
    std::uint64_t seed = 1;
    std::size_t samples = 1000;
    std::optional<double> L_f;          // required for program checks
    std::optional<std::uint64_t> time_bound;
    bool check = true;
};

/// Unknown keys are rejected (Parse).
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& c);

struct PipelineResult {
    ExitCode exit = ExitCode::Ok;
    std::string failed_stage;             // empty when every stage ran
    std::vector<std::string> diagnostics; // "stage: message"
    nlohmann::json circuit;
    nlohmann::json network;
    std::string report_csv;               // stage,metric,value
};

/// Runs source -> circuit -> network -> checks. Errors are caught and tagged with their stage.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// Machine by file path or builtin name (identity takes its width from n).
TuringMachine load_machine(const std::string& source, std::size_t n);

std::string read_text_file(const std::string& path);

}  // namespace sparsec
