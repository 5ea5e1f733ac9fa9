#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <json.hpp>
#include <string>
#include <vector>

#include <sparsec/sparsec.h>

using nlohmann::json;

namespace {

std::string take(char* s) {
    REQUIRE(s != nullptr);
    std::string out(s);
    sparsec_string_free(s);
    return out;
}

sparsec_circuit* builtin(const char* name, std::size_t n) {
    sparsec_circuit* c = nullptr;
    REQUIRE(sparsec_circuit_builtin(name, n, &c) == SPARSEC_OK);
    return c;
}

}  // namespace

TEST_CASE("status names and exit codes") {
    CHECK(std::string(sparsec_status_name(SPARSEC_OK)) == "Ok");
    CHECK(std::string(sparsec_status_name(SPARSEC_BUDGET_INFEASIBLE)) == "BudgetInfeasible");
    CHECK(sparsec_exit_code_for(SPARSEC_OK) == 0);
    CHECK(sparsec_exit_code_for(SPARSEC_CHECK_FAILED) == 1);
    CHECK(sparsec_exit_code_for(SPARSEC_PARSE) == 2);
    CHECK(sparsec_exit_code_for(SPARSEC_BUDGET_INFEASIBLE) == 3);
    CHECK(std::strlen(sparsec_version()) > 0);
}

TEST_CASE("null handles and bad JSON") {
    sparsec_machine* m = nullptr;
    CHECK(sparsec_machine_from_json(nullptr, &m) == SPARSEC_INVALID_ARGUMENT);
    CHECK(std::string(sparsec_last_error_message()).find("null") != std::string::npos);
    CHECK(sparsec_machine_from_json("{\"states\": [", &m) == SPARSEC_PARSE);
    CHECK(m == nullptr);
    CHECK(std::strlen(sparsec_last_error_message()) > 0);
    char* out = nullptr;
    CHECK(sparsec_circuit_to_json(nullptr, &out) == SPARSEC_INVALID_ARGUMENT);
    CHECK(sparsec_machine_builtin("nosuch", 3, &m) != SPARSEC_OK);

    sparsec_circuit* c = builtin("and", 0);
    CHECK(sparsec_circuit_to_json(c, &out) == SPARSEC_OK);
    take(out);
    CHECK(std::strlen(sparsec_last_error_message()) == 0);
    sparsec_circuit_free(c);

    sparsec_circuit_free(nullptr);
    sparsec_machine_free(nullptr);
    sparsec_network_free(nullptr);
    sparsec_string_free(nullptr);
}

TEST_CASE("machine run and unroll") {
    sparsec_machine* m = nullptr;
    REQUIRE(sparsec_machine_builtin("parity", 0, &m) == SPARSEC_OK);
    char* text = nullptr;
    REQUIRE(sparsec_machine_to_json(m, &text) == SPARSEC_OK);
    const auto mj = take(text);
    sparsec_machine* back = nullptr;
    REQUIRE(sparsec_machine_from_json(mj.c_str(), &back) == SPARSEC_OK);
    REQUIRE(sparsec_machine_to_json(back, &text) == SPARSEC_OK);
    CHECK(take(text) == mj);
    sparsec_machine_free(back);

    const std::uint8_t x[] = {1, 0, 1, 1};
    char* trace = nullptr;
    REQUIRE(sparsec_machine_run(m, x, 4, 0, &trace) == SPARSEC_OK);
    const auto t = json::parse(take(trace));
    CHECK(t["halted"] == true);
    CHECK(t["output"] == "1");
    CHECK(sparsec_machine_run(m, x, 4, 1, &trace) == SPARSEC_TIME_BOUND_EXCEEDED);

    sparsec_circuit* c = nullptr;
    char* report = nullptr;
    REQUIRE(sparsec_unroll(m, 4, 0, &c, &report) == SPARSEC_OK);
    const auto r = json::parse(take(report));
    CHECK(r["certificate"]["k"].get<int>() <= 2);
    CHECK(sparsec_circuit_input_count(c) == 4);
    std::uint8_t y[4] = {9, 9, 9, 9};
    CHECK(sparsec_circuit_evaluate(c, x, 4, y, 0) == SPARSEC_DIMENSION_MISMATCH);
    CHECK(sparsec_circuit_evaluate(c, x, 3, y, 4) == SPARSEC_ARITY_MISMATCH);
    REQUIRE(sparsec_circuit_evaluate(c, x, 4, y, 4) == SPARSEC_OK);
    CHECK(y[sparsec_circuit_output_count(c) - 1] == 1);

    const std::size_t ns[] = {2, 4, 6};
    char* csv = nullptr;
    REQUIRE(sparsec_build_report_csv(m, ns, 3, &csv) == SPARSEC_OK);
    CHECK(take(csv).find("slope") != std::string::npos);
    sparsec_circuit_free(c);
    sparsec_machine_free(m);
}

TEST_CASE("circuit JSON round trip, validation and equivalence") {
    sparsec_circuit* a = builtin("ripple_adder", 3);
    char* text = nullptr;
    REQUIRE(sparsec_circuit_to_json(a, &text) == SPARSEC_OK);
    const auto aj = take(text);
    sparsec_circuit* b = nullptr;
    REQUIRE(sparsec_circuit_from_json(aj.c_str(), &b) == SPARSEC_OK);
    REQUIRE(sparsec_circuit_to_json(b, &text) == SPARSEC_OK);
    CHECK(take(text) == aj);

    char* eq = nullptr;
    REQUIRE(sparsec_circuit_equiv(a, b, &eq) == SPARSEC_OK);
    CHECK(json::parse(take(eq))["equivalent"] == true);
    sparsec_circuit* p = builtin("parity_tree", 6);
    CHECK(sparsec_circuit_equiv(a, p, &eq) == SPARSEC_ARITY_MISMATCH);

    char* v = nullptr;
    REQUIRE(sparsec_circuit_validate(a, &v) == SPARSEC_OK);
    CHECK(json::parse(take(v)).empty());
    auto broken = json::parse(aj);
    broken["outputs"].push_back(999);
    CHECK(sparsec_circuit_from_json(broken.dump().c_str(), &b) != SPARSEC_OK);
    REQUIRE(sparsec_circuit_validate_json(broken.dump().c_str(), &v) == SPARSEC_OK);
    CHECK(!json::parse(take(v)).empty());

    char* cert = nullptr;
    REQUIRE(sparsec_circuit_certify(p, &cert) == SPARSEC_OK);
    const auto cj = json::parse(take(cert));
    CHECK(cj["k"] == 2);
    CHECK(cj["L"] == 3);
    sparsec_circuit_free(a);
    sparsec_circuit_free(b);
    sparsec_circuit_free(p);
}

TEST_CASE("ltf handles") {
    sparsec_circuit* c = builtin("and_tree", 4);
    sparsec_ltf* l = nullptr;
    REQUIRE(sparsec_ltf_from_circuit(c, &l) == SPARSEC_OK);
    char* text = nullptr;
    REQUIRE(sparsec_ltf_to_json(l, &text) == SPARSEC_OK);
    const auto lj = take(text);
    sparsec_ltf* l2 = nullptr;
    REQUIRE(sparsec_ltf_from_json(lj.c_str(), &l2) == SPARSEC_OK);
    REQUIRE(sparsec_ltf_to_json(l2, &text) == SPARSEC_OK);
    CHECK(take(text) == lj);
    sparsec_circuit* lowered = nullptr;
    REQUIRE(sparsec_ltf_lower(l2, &lowered) == SPARSEC_OK);
    char* eq = nullptr;
    REQUIRE(sparsec_circuit_equiv(c, lowered, &eq) == SPARSEC_OK);
    CHECK(json::parse(take(eq))["equivalent"] == true);
    char* rt = nullptr;
    REQUIRE(sparsec_ltf_roundtrip(c, &rt) == SPARSEC_OK);
    const auto r = json::parse(take(rt));
    CHECK(r["equivalent"] == true);
    CHECK(r["within_bounds"] == true);
    sparsec_circuit_free(lowered);
    sparsec_ltf_free(l);
    sparsec_ltf_free(l2);
    sparsec_circuit_free(c);
}

TEST_CASE("networks") {
    sparsec_circuit* c = builtin("xor", 0);
    sparsec_network* net = nullptr;
    char* report = nullptr;
    REQUIRE(sparsec_neuralize(c, 1e-3, SPARSEC_MODE_ROBUST, 0.1, &net, &report) == SPARSEC_OK);
    take(report);
    CHECK(sparsec_network_input_width(net) == 2);
    CHECK(sparsec_network_output_width(net) == 1);
    const double x[] = {1.0, 0.0};
    double y = -1;
    REQUIRE(sparsec_network_evaluate(net, x, 2, &y, 1) == SPARSEC_OK);
    CHECK(y == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(sparsec_network_evaluate(net, x, 2, &y, 0) == SPARSEC_DIMENSION_MISMATCH);
    char* text = nullptr;
    REQUIRE(sparsec_network_to_json(net, &text) == SPARSEC_OK);
    const auto nj = take(text);
    sparsec_network* n2 = nullptr;
    REQUIRE(sparsec_network_from_json(nj.c_str(), &n2) == SPARSEC_OK);
    REQUIRE(sparsec_network_to_json(n2, &text) == SPARSEC_OK);
    CHECK(take(text) == nj);
    std::uint64_t regions = 0;
    CHECK(sparsec_network_regions_1d(n2, 0, 1, &regions) == SPARSEC_NOT_UNIVARIATE);
    CHECK(sparsec_neuralize(c, 1e-320, SPARSEC_MODE_EXACT, 0, &net, &report) == SPARSEC_BUDGET_INFEASIBLE);
    CHECK(sparsec_neuralize(c, 1e-3, static_cast<sparsec_mode>(7), 0, &net, &report) == SPARSEC_INVALID_ARGUMENT);
    sparsec_network_free(net);
    sparsec_network_free(n2);
    sparsec_circuit_free(c);

    double eps_gate = 0;
    REQUIRE(sparsec_allocate_budget(4, 2.0, 1e-2, &eps_gate) == SPARSEC_OK);
    CHECK(eps_gate > 0);
    CHECK(4 * 8.0 * eps_gate <= 1e-2 * (1 + 1e-12));

    char* tel = nullptr;
    REQUIRE(sparsec_telgarsky(5, &tel) == SPARSEC_OK);
    const auto t = json::parse(take(tel));
    CHECK(t["region_count"] == 32);
    sparsec_network* tn = nullptr;
    REQUIRE(sparsec_network_from_json(t["network"].dump().c_str(), &tn) == SPARSEC_OK);
    REQUIRE(sparsec_network_regions_1d(tn, 0, 1, &regions) == SPARSEC_OK);
    CHECK(regions == 32);
    sparsec_network_free(tn);
    CHECK(sparsec_telgarsky(0, &tel) == SPARSEC_DEPTH_OUT_OF_RANGE);
}

TEST_CASE("fixed point and programs") {
    const double x[] = {0.625};
    std::uint8_t bits[3];
    REQUIRE(sparsec_encode(x, 1, 3, bits, 3) == SPARSEC_OK);
    CHECK(bits[0] == 1);
    CHECK(bits[1] == 0);
    CHECK(bits[2] == 1);
    CHECK(sparsec_encode(x, 1, 3, bits, 2) == SPARSEC_DIMENSION_MISMATCH);
    double back = 0;
    REQUIRE(sparsec_decode(bits, 3, 3, 0, 0, &back, 1) == SPARSEC_OK);
    CHECK(back == 0.625);
    CHECK(sparsec_decode(bits, 3, 2, 0, 0, &back, 1) == SPARSEC_WIDTH_MISMATCH);

    sparsec_program* p = nullptr;
    REQUIRE(sparsec_program_builtin("square", &p) == SPARSEC_OK);
    char* text = nullptr;
    REQUIRE(sparsec_program_to_json(p, &text) == SPARSEC_OK);
    const auto pj = take(text);
    sparsec_program* p2 = nullptr;
    REQUIRE(sparsec_program_from_json(pj.c_str(), &p2) == SPARSEC_OK);
    REQUIRE(sparsec_program_to_json(p2, &text) == SPARSEC_OK);
    CHECK(take(text) == pj);
    sparsec_circuit* c = nullptr;
    REQUIRE(sparsec_program_compile(p2, 4, 4, &c) == SPARSEC_OK);
    CHECK(sparsec_circuit_input_count(c) == 4);
    sparsec_circuit_free(c);
    char* rep = nullptr;
    REQUIRE(sparsec_program_check(p, 6, 4, 2.0, 300, 1, SPARSEC_MODE_ROBUST, 0.1, &rep) == SPARSEC_OK);
    CHECK(json::parse(take(rep))["pass"] == true);
    sparsec_program_free(p);
    sparsec_program_free(p2);
}

TEST_CASE("polynomials") {
    const char* fj = R"({"dim":2,"terms":[{"vars":[0,1],"coeff":"1"}]})";
    const char* gj = R"({"dim":3,"terms":[{"vars":[0],"coeff":"1/2"},{"vars":[2],"coeff":"1/2"}]})";
    sparsec_poly *f = nullptr, *g = nullptr, *h = nullptr;
    REQUIRE(sparsec_poly_from_json(fj, &f) == SPARSEC_OK);
    REQUIRE(sparsec_poly_from_json(gj, &g) == SPARSEC_OK);
    const sparsec_poly* gs[] = {g, g};
    REQUIRE(sparsec_poly_compose(f, gs, 2, &h) == SPARSEC_OK);
    char* b = nullptr;
    REQUIRE(sparsec_poly_check_bounds(f, gs, 2, h, &b) == SPARSEC_OK);
    const auto bj = json::parse(take(b));
    CHECK(bj["pass"] == true);
    CHECK(bj["pointwise_equal"] == true);
    const int pt[] = {1, 1, -1};
    char* val = nullptr;
    REQUIRE(sparsec_poly_evaluate(h, pt, 3, &val) == SPARSEC_OK);
    CHECK(take(val) == "0");
    char* text = nullptr;
    REQUIRE(sparsec_poly_to_json(h, &text) == SPARSEC_OK);
    const auto hj = take(text);
    sparsec_poly* h2 = nullptr;
    REQUIRE(sparsec_poly_from_json(hj.c_str(), &h2) == SPARSEC_OK);
    REQUIRE(sparsec_poly_to_json(h2, &text) == SPARSEC_OK);
    CHECK(take(text) == hj);
    char* act = nullptr;
    REQUIRE(sparsec_poly_active_variables(h2, &act) == SPARSEC_OK);
    CHECK(json::parse(take(act)) == json::array({0, 2}));
    CHECK(sparsec_poly_compose(f, gs, 1, &h) == SPARSEC_DIMENSION_MISMATCH);
    const int bad[] = {1, 0, 1};
    CHECK(sparsec_poly_evaluate(h2, bad, 3, &val) == SPARSEC_BAD_POINT);
    sparsec_poly_free(f);
    sparsec_poly_free(g);
    sparsec_poly_free(h);
    sparsec_poly_free(h2);

    char* sw = nullptr;
    REQUIRE(sparsec_fourier_sweep(20, 3, &sw) == SPARSEC_OK);
    CHECK(json::parse(take(sw))["bound_violations"] == 0);
    char* tree = nullptr;
    REQUIRE(sparsec_fourier_tree(3, &tree) == SPARSEC_OK);
    take(tree);
}

TEST_CASE("lift") {
    sparsec_circuit* c = builtin("and", 0);
    const double x[] = {0.5, 0.5};
    double y = 0;
    REQUIRE(sparsec_lift_evaluate(c, x, 2, &y, 1) == SPARSEC_OK);
    CHECK(y == 0.25);
    const double out_of[] = {0.5, 2.0};
    CHECK(sparsec_lift_evaluate(c, out_of, 2, &y, 1) == SPARSEC_OUT_OF_DOMAIN);
    char* rep = nullptr;
    REQUIRE(sparsec_lift_report(c, 0.01, 200, 1, &rep) == SPARSEC_OK);
    const auto r = json::parse(take(rep));
    CHECK(r["vertex_mismatches"] == 0);
    CHECK(r["ranges_within_unit"] == true);
    CHECK(r["neighborhood"]["violations"] == 0);
    sparsec_circuit_free(c);
}

TEST_CASE("trace learning") {
    sparsec_circuit* c = builtin("parity_tree", 4);
    char* data = nullptr;
    REQUIRE(sparsec_arlearn_generate(c, 200, 1, &data) == SPARSEC_OK);
    const auto jsonl = take(data);
    sparsec_predictor* p = nullptr;
    REQUIRE(sparsec_arlearn_fit(c, jsonl.c_str(), &p) == SPARSEC_OK);
    char* text = nullptr;
    REQUIRE(sparsec_predictor_to_json(p, &text) == SPARSEC_OK);
    const auto pj = take(text);
    sparsec_predictor* p2 = nullptr;
    REQUIRE(sparsec_predictor_from_json(pj.c_str(), &p2) == SPARSEC_OK);
    REQUIRE(sparsec_predictor_to_json(p2, &text) == SPARSEC_OK);
    CHECK(take(text) == pj);
    const std::uint8_t x[] = {1, 1, 0, 1};
    std::uint8_t y = 9;
    REQUIRE(sparsec_arlearn_predict(p2, c, x, 4, &y, 1) == SPARSEC_OK);
    CHECK(y == 1);
    char* ev = nullptr;
    REQUIRE(sparsec_arlearn_eval(p2, c, &ev) == SPARSEC_OK);
    CHECK(json::parse(take(ev))["equivalent"] == true);
    char* tr = nullptr;
    REQUIRE(sparsec_arlearn_trials(c, 100, 20, 1, &tr) == SPARSEC_OK);
    take(tr);
    const double d[] = {0.1};
    char* cv = nullptr;
    REQUIRE(sparsec_arlearn_curve(c, d, 1, 10, 1, &cv) == SPARSEC_OK);
    take(cv);
    CHECK(sparsec_arlearn_curve(c, d, 1, 3, 1, &cv) != SPARSEC_OK);
    sparsec_predictor_free(p);
    sparsec_predictor_free(p2);
    sparsec_circuit_free(c);
}

TEST_CASE("pipeline") {
    char* res = nullptr;
    REQUIRE(sparsec_pipeline_run(R"({"machine":"builtin:parity","n":4})", &res) == SPARSEC_OK);
    const auto r = json::parse(take(res));
    CHECK(r["exit"] == 0);
    CHECK(r["report_csv"].get<std::string>().find("network,vertex_mismatches,0") != std::string::npos);
    REQUIRE(sparsec_pipeline_run(R"({"machine":"builtin:parity","eps":1e-300})", &res) == SPARSEC_OK);
    CHECK(json::parse(take(res))["exit"] == 3);
    CHECK(sparsec_pipeline_run(R"({"machine":"builtin:parity","bogus":1})", &res) == SPARSEC_PARSE);
}
