#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "error.hpp"
#include "pipeline.hpp"

using namespace sparsec;
using nlohmann::json;

namespace {

PipelineConfig square_config() {
    return config_from_json(json{{"program", "builtin:square"}, {"n", 6}, {"m_out", 4}, {"L_f", 2.0}, {"samples", 500}});
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = square_config();
    CHECK(c.program == std::optional<std::string>("builtin:square"));
    CHECK(c.mode == GadgetMode::Robust);
    CHECK(c.check);
    CHECK(config_from_json(config_to_json(c)).samples == 500);
    try {
        config_from_json(json{{"machine", "builtin:parity"}, {"colour", "blue"}});
        FAIL("expected Parse");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
    }
    CHECK_THROWS_AS(config_from_json(json{{"machine", "builtin:parity"}, {"mode", "fuzzy"}}), Error);
    CHECK_THROWS_AS(config_from_json(json::array()), Error);
}

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ErrorCode::Parse) == ExitCode::InputError);
    CHECK(exit_code_for(ErrorCode::InvalidMachine) == ExitCode::InputError);
    CHECK(exit_code_for(ErrorCode::BudgetInfeasible) == ExitCode::Infeasible);
    CHECK(exit_code_for(ErrorCode::WidthOverflow) == ExitCode::Infeasible);
    CHECK(exit_code_for(ErrorCode::TimeBoundExceeded) == ExitCode::Infeasible);
    CHECK(exit_code_for(ErrorCode::CheckFailed) == ExitCode::CheckFailed);
}

TEST_CASE("squaring program passes every stage") {
    const auto r = run_pipeline(square_config());
    CHECK(r.exit == ExitCode::Ok);
    CHECK(r.failed_stage.empty());
    CHECK(r.report_csv.rfind("stage,metric,value\n", 0) == 0);
    CHECK(r.report_csv.find("check,pass,true") != std::string::npos);
    CHECK(r.report_csv.find("config,seed,1") != std::string::npos);
    CHECK(r.circuit.contains("nodes"));
    CHECK(r.network.contains("layers"));
}

TEST_CASE("machines run through the pipeline") {
    for (const char* m : {"builtin:parity", "builtin:adder2", "builtin:identity", "builtin:constant_one"}) {
        PipelineConfig cfg;
        cfg.machine = m;
        cfg.n = 4;
        const auto r = run_pipeline(cfg);
        CHECK_MESSAGE(r.exit == ExitCode::Ok, m);
    }
}

TEST_CASE("malformed machine JSON is an input error") {
    const char* path = "pipeline_bad_machine.json";
    {
        std::ofstream f(path);
        f << "{\"states\": [";
    }
    PipelineConfig cfg;
    cfg.machine = path;
    const auto r = run_pipeline(cfg);
    std::remove(path);
    CHECK(r.exit == ExitCode::InputError);
    CHECK(r.failed_stage == "source");
    REQUIRE(!r.diagnostics.empty());
    CHECK(r.diagnostics[0].find("Parse") != std::string::npos);
}

TEST_CASE("infeasible budget") {
    PipelineConfig cfg;
    cfg.machine = "builtin:parity";
    cfg.eps = 1e-300;
    const auto r = run_pipeline(cfg);
    CHECK(r.exit == ExitCode::Infeasible);
    CHECK(r.failed_stage == "neuralize");
    CHECK(r.diagnostics[0].find("BudgetInfeasible") != std::string::npos);
}

TEST_CASE("missing pieces are input errors") {
    PipelineConfig none;
    CHECK(run_pipeline(none).exit == ExitCode::InputError);
    auto no_lf = square_config();
    no_lf.L_f.reset();
    CHECK(run_pipeline(no_lf).exit == ExitCode::InputError);
    PipelineConfig missing;
    missing.machine = "/nonexistent/machine.json";
    CHECK(run_pipeline(missing).exit == ExitCode::InputError);
}

TEST_CASE("reruns are byte-identical and the seed matters only where sampling happens") {
    const auto a = run_pipeline(square_config());
    const auto b = run_pipeline(square_config());
    CHECK(a.report_csv == b.report_csv);
    CHECK(a.circuit.dump() == b.circuit.dump());
    CHECK(a.network.dump() == b.network.dump());
    auto other = square_config();
    other.seed = 99;
    const auto c = run_pipeline(other);
    CHECK(c.circuit.dump() == a.circuit.dump());
    CHECK(c.report_csv.find("config,seed,99") != std::string::npos);
}
