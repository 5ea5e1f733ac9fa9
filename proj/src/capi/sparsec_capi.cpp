#include "sparsec/sparsec.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "arlearn.hpp"
#include "circuit.hpp"
#include "error.hpp"
#include "fourier.hpp"
#include "ltf.hpp"
#include "neuralize.hpp"
#include "pipeline.hpp"
#include "precision.hpp"
#include "smoothlift.hpp"
#include "tm.hpp"
#include "tm2circuit.hpp"

using nlohmann::json;
using namespace sparsec;

struct sparsec_machine { TuringMachine v; };
struct sparsec_circuit { Circuit v; };
struct sparsec_ltf { LtfCircuit v; };
struct sparsec_network { ReluNetwork v; };
struct sparsec_poly { FourierPoly v; };
struct sparsec_program { BitProgram v; };
struct sparsec_predictor { Predictors v; };

namespace {

thread_local std::string g_last_error;

template <class F>
sparsec_status guard(F&& f) {
    try {
        g_last_error.clear();
        f();
        return SPARSEC_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<sparsec_status>(static_cast<int>(e.code()));
    } catch (const json::exception& e) {
        g_last_error = std::string("Parse: ") + e.what();
        return SPARSEC_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "Internal: out of memory";
        return SPARSEC_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = std::string("Internal: ") + e.what();
        return SPARSEC_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put(char** out, const std::string& s) {
    need(out, "output pointer");
    *out = dup(s);
}

void put(char** out, const json& j) { put(out, j.dump()); }

json parse(const char* text) {
    need(text, "json text");
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, e.what());
    }
}

template <class H, class T>
void emit(H** out, T&& value) {
    need(out, "output handle");
    *out = new H{std::forward<T>(value)};
}

template <class T>
void copy_out(const std::vector<T>& v, T* out, std::size_t capacity) {
    if (v.size() > capacity)
        fail(ErrorCode::DimensionMismatch, "output buffer holds " + std::to_string(capacity) + ", need " +
                                               std::to_string(v.size()));
    if (!v.empty()) need(out, "output buffer");
    std::copy(v.begin(), v.end(), out);
}

std::vector<std::uint8_t> bits_in(const std::uint8_t* p, std::size_t n) {
    if (n) need(p, "input");
    return std::vector<std::uint8_t>(p, p + n);
}

std::vector<double> reals_in(const double* p, std::size_t n) {
    if (n) need(p, "input");
    return std::vector<double>(p, p + n);
}

NeuralizeOptions mode_opts(sparsec_mode mode, double delta) {
    if (mode != SPARSEC_MODE_EXACT && mode != SPARSEC_MODE_ROBUST) fail(ErrorCode::InvalidArgument, "unknown mode");
    return NeuralizeOptions{mode == SPARSEC_MODE_EXACT ? GadgetMode::Exact : GadgetMode::Robust, delta};
}

std::vector<FourierPoly> polys_in(const sparsec_poly* const* g, std::size_t count) {
    if (count) need(g, "polynomial list");
    std::vector<FourierPoly> out;
    for (std::size_t i = 0; i < count; ++i) {
        need(g[i], "polynomial");
        out.push_back(g[i]->v);
    }
    return out;
}

json bits_json(const std::vector<std::uint8_t>& b) {
    json a = json::array();
    for (auto x : b) a.push_back(static_cast<int>(x));
    return a;
}

}  // namespace

extern "C" {

const char* sparsec_version(void) { return "0.1.0"; }

const char* sparsec_status_name(sparsec_status s) {
    if (s == SPARSEC_OK) return "Ok";
    return error_code_name(static_cast<ErrorCode>(s));
}

const char* sparsec_last_error_message(void) { return g_last_error.c_str(); }

void sparsec_string_free(char* s) { std::free(s); }

int sparsec_exit_code_for(sparsec_status s) {
    if (s == SPARSEC_OK) return 0;
    return static_cast<int>(exit_code_for(static_cast<ErrorCode>(s)));
}

sparsec_status sparsec_machine_from_json(const char* text, sparsec_machine** out) {
    return guard([&] { emit(out, machine_from_json(parse(text))); });
}

sparsec_status sparsec_machine_builtin(const char* name, size_t n, sparsec_machine** out) {
    return guard([&] {
        need(name, "name");
        emit(out, load_machine(std::string("builtin:") + name, n));
    });
}

sparsec_status sparsec_machine_to_json(const sparsec_machine* m, char** out) {
    return guard([&] {
        need(m, "machine");
        put(out, machine_to_json(m->v));
    });
}

void sparsec_machine_free(sparsec_machine* m) { delete m; }

sparsec_status sparsec_machine_run(const sparsec_machine* m, const uint8_t* input, size_t n, uint64_t time_bound,
                                   char** out) {
    return guard([&] {
        need(m, "machine");
        const auto T = time_bound ? time_bound : time_bound_poly(m->v, n, m->v.output_cells);
        put(out, trace_to_json(m->v, simulate(m->v, bits_in(input, n), T)));
    });
}

sparsec_status sparsec_machine_time_bound(const sparsec_machine* m, size_t n, uint64_t* out) {
    return guard([&] {
        need(m, "machine");
        need(out, "output");
        *out = auto_time_bound(m->v, n);
    });
}

sparsec_status sparsec_unroll(const sparsec_machine* m, size_t n, uint64_t time_bound, sparsec_circuit** out,
                              char** out_report) {
    return guard([&] {
        need(m, "machine");
        const auto T = time_bound ? time_bound : auto_time_bound(m->v, n);
        auto u = unroll(m->v, n, T);
        const auto cert = certify_sparsity(u.circuit);
        json rep{{"n", n},
                 {"time_bound", T},
                 {"tape_length", tape_length(m->v, n, T)},
                 {"certificate", certificate_to_json(cert)},
                 {"size_bound", unroll_size_bound(m->v, n, T)},
                 {"depth_bound", unroll_depth_bound(m->v, n, T)}};
        if (out_report) put(out_report, rep);
        emit(out, std::move(u.circuit));
    });
}

sparsec_status sparsec_build_report_csv(const sparsec_machine* m, const size_t* n_values, size_t count, char** out) {
    return guard([&] {
        need(m, "machine");
        if (count) need(n_values, "n values");
        put(out, report_to_csv(build_report(m->v, std::vector<std::size_t>(n_values, n_values + count))));
    });
}

sparsec_status sparsec_circuit_from_json(const char* text, sparsec_circuit** out) {
    return guard([&] {
        auto c = circuit_from_json(parse(text));
        require_valid(c);
        emit(out, std::move(c));
    });
}

sparsec_status sparsec_circuit_builtin(const char* name, size_t n, sparsec_circuit** out) {
    return guard([&] {
        need(name, "name");
        const std::string s = name;
        Circuit c;
        if (s == "and_tree") c = circuits::and_tree(n);
        else if (s == "parity_tree") c = circuits::parity_tree(n);
        else if (s == "ripple_adder") c = circuits::ripple_adder(n);
        else if (s == "not") c = circuits::single_gate(GateKind::Not);
        else if (s == "and") c = circuits::single_gate(GateKind::And2);
        else if (s == "or") c = circuits::single_gate(GateKind::Or2);
        else if (s == "xor") c = circuits::single_gate(GateKind::Xor2);
        else fail(ErrorCode::InvalidArgument, "unknown builtin circuit '" + s + "'");
        emit(out, std::move(c));
    });
}

sparsec_status sparsec_circuit_to_json(const sparsec_circuit* c, char** out) {
    return guard([&] {
        need(c, "circuit");
        put(out, circuit_to_json(c->v));
    });
}

void sparsec_circuit_free(sparsec_circuit* c) { delete c; }

size_t sparsec_circuit_input_count(const sparsec_circuit* c) { return c ? c->v.inputs.size() : 0; }

size_t sparsec_circuit_output_count(const sparsec_circuit* c) { return c ? c->v.outputs.size() : 0; }

sparsec_status sparsec_circuit_evaluate(const sparsec_circuit* c, const uint8_t* input, size_t n, uint8_t* out,
                                        size_t cap) {
    return guard([&] {
        need(c, "circuit");
        copy_out(evaluate(c->v, bits_in(input, n)), out, cap);
    });
}

sparsec_status sparsec_circuit_certify(const sparsec_circuit* c, char** out) {
    return guard([&] {
        need(c, "circuit");
        put(out, certificate_to_json(certify_sparsity(c->v)));
    });
}

static json violations_json(const Circuit& c) {
    json a = json::array();
    for (const auto& v : validate(c))
        a.push_back(json{{"node", v.node}, {"rule", violation_rule_name(v.rule)}, {"detail", v.detail}});
    return a;
}

sparsec_status sparsec_circuit_validate(const sparsec_circuit* c, char** out) {
    return guard([&] {
        need(c, "circuit");
        put(out, violations_json(c->v));
    });
}

sparsec_status sparsec_circuit_validate_json(const char* text, char** out) {
    return guard([&] { put(out, violations_json(circuit_from_json(parse(text)))); });
}

sparsec_status sparsec_circuit_equiv(const sparsec_circuit* a, const sparsec_circuit* b, char** out) {
    return guard([&] {
        need(a, "circuit a");
        need(b, "circuit b");
        const auto r = brute_force_equiv(a->v, b->v);
        json j{{"equivalent", r.equivalent}};
        j["counterexample"] = r.equivalent ? json(nullptr) : bits_json(r.counterexample);
        put(out, j);
    });
}

sparsec_status sparsec_ltf_from_circuit(const sparsec_circuit* c, sparsec_ltf** out) {
    return guard([&] {
        need(c, "circuit");
        emit(out, bool_to_ltf(c->v));
    });
}

sparsec_status sparsec_ltf_from_json(const char* text, sparsec_ltf** out) {
    return guard([&] {
        auto l = ltf_from_json(parse(text));
        require_valid(l);
        emit(out, std::move(l));
    });
}

sparsec_status sparsec_ltf_to_json(const sparsec_ltf* l, char** out) {
    return guard([&] {
        need(l, "ltf");
        put(out, ltf_to_json(l->v));
    });
}

void sparsec_ltf_free(sparsec_ltf* l) { delete l; }

sparsec_status sparsec_ltf_lower(const sparsec_ltf* l, sparsec_circuit** out) {
    return guard([&] {
        need(l, "ltf");
        emit(out, ltf_to_bfi(l->v));
    });
}

sparsec_status sparsec_ltf_roundtrip(const sparsec_circuit* c, char** out) {
    return guard([&] {
        need(c, "circuit");
        put(out, roundtrip_to_json(roundtrip_check(c->v)));
    });
}

sparsec_status sparsec_neuralize(const sparsec_circuit* c, double eps_total, sparsec_mode mode, double delta,
                                 sparsec_network** out, char** out_report) {
    return guard([&] {
        need(c, "circuit");
        const auto opts = mode_opts(mode, delta);
        const auto budget = plan_budget(c->v, eps_total, opts);
        auto nn = neuralize_circuit(c->v, budget, opts);
        if (out_report) {
            put(out_report, json{{"layers", nn.net.layers.size()},
                                 {"max_width", nn.net.max_width()},
                                 {"units", nn.net.unit_count()},
                                 {"gadget_stages", nn.gadget_stages},
                                 {"circuit_depth", nn.circuit_depth},
                                 {"circuit_width", nn.circuit_width},
                                 {"max_layer_norm", nn.max_layer_norm},
                                 {"max_stage_lipschitz", nn.max_stage_lipschitz},
                                 {"budget", {{"L", budget.L}, {"K", budget.K}, {"eps_gate", budget.eps_gate},
                                             {"eps_total", budget.eps_total}}}});
        }
        emit(out, std::move(nn.net));
    });
}

sparsec_status sparsec_network_from_json(const char* text, sparsec_network** out) {
    return guard([&] { emit(out, network_from_json(parse(text))); });
}

sparsec_status sparsec_network_to_json(const sparsec_network* net, char** out) {
    return guard([&] {
        need(net, "network");
        put(out, network_to_json(net->v));
    });
}

void sparsec_network_free(sparsec_network* net) { delete net; }

size_t sparsec_network_input_width(const sparsec_network* net) { return net ? net->v.input_width : 0; }

size_t sparsec_network_output_width(const sparsec_network* net) { return net ? net->v.output_width() : 0; }

sparsec_status sparsec_network_evaluate(const sparsec_network* net, const double* x, size_t n, double* out,
                                        size_t cap) {
    return guard([&] {
        need(net, "network");
        copy_out(net_evaluate(net->v, reals_in(x, n)), out, cap);
    });
}

sparsec_status sparsec_network_regions_1d(const sparsec_network* net, double lo, double hi, uint64_t* out) {
    return guard([&] {
        need(net, "network");
        need(out, "output");
        *out = count_linear_regions_1d(net->v, lo, hi);
    });
}

sparsec_status sparsec_allocate_budget(size_t L, double K, double eps_total, double* out) {
    return guard([&] {
        need(out, "output");
        *out = allocate_budget(L, K, eps_total);
    });
}

sparsec_status sparsec_telgarsky(int depth, char** out) {
    return guard([&] {
        const auto r = telgarsky_demo(depth);
        put(out, json{{"depth", depth},
                      {"region_count", r.region_count},
                      {"shallow_units_needed", r.shallow_units_needed},
                      {"network", network_to_json(r.deep)}});
    });
}

sparsec_status sparsec_encode(const double* x, size_t d, int n, uint8_t* out, size_t cap) {
    return guard([&] { copy_out(encode(reals_in(x, d), n), out, cap); });
}

sparsec_status sparsec_decode(const uint8_t* bits, size_t count, int frac_bits, int int_bits, int is_signed,
                              double* out, size_t cap) {
    return guard([&] {
        copy_out(decode(bits_in(bits, count), FixedPointFormat{frac_bits, int_bits, is_signed != 0}), out, cap);
    });
}

sparsec_status sparsec_program_from_json(const char* text, sparsec_program** out) {
    return guard([&] { emit(out, program_from_json(parse(text))); });
}

sparsec_status sparsec_program_builtin(const char* name, sparsec_program** out) {
    return guard([&] {
        need(name, "name");
        const std::string s = name;
        BitProgram p;
        if (s == "square") p = programs::square();
        else if (s == "identity") p = programs::identity();
        else if (s == "doubling") p = programs::doubling();
        else if (s == "zero") p = programs::zero();
        else fail(ErrorCode::InvalidArgument, "unknown builtin program '" + s + "'");
        emit(out, std::move(p));
    });
}

sparsec_status sparsec_program_to_json(const sparsec_program* p, char** out) {
    return guard([&] {
        need(p, "program");
        put(out, program_to_json(p->v));
    });
}

void sparsec_program_free(sparsec_program* p) { delete p; }

sparsec_status sparsec_program_compile(const sparsec_program* p, int n, int m_out, sparsec_circuit** out) {
    return guard([&] {
        need(p, "program");
        emit(out, compile_bitprogram(p->v, n, m_out));
    });
}

sparsec_status sparsec_program_check(const sparsec_program* p, int n, int m_out, double L_f, size_t samples,
                                     uint64_t seed, sparsec_mode mode, double delta, char** out) {
    return guard([&] {
        need(p, "program");
        EndToEndOptions eo;
        eo.neuralize = mode_opts(mode, delta);
        eo.seed = seed;
        const auto& prog = p->v;
        const auto r = end_to_end_check(family_from_program(prog, n, m_out),
                                        [&prog](std::span<const double> x) { return program_real_eval(prog, x); }, L_f,
                                        samples, eo);
        put(out, end_to_end_to_json(r));
    });
}

sparsec_status sparsec_poly_from_json(const char* text, sparsec_poly** out) {
    return guard([&] { emit(out, poly_from_json(parse(text))); });
}

sparsec_status sparsec_poly_to_json(const sparsec_poly* p, char** out) {
    return guard([&] {
        need(p, "polynomial");
        put(out, poly_to_json(p->v));
    });
}

void sparsec_poly_free(sparsec_poly* p) { delete p; }

sparsec_status sparsec_poly_compose(const sparsec_poly* f, const sparsec_poly* const* g, size_t count,
                                    sparsec_poly** out) {
    return guard([&] {
        need(f, "f");
        emit(out, compose(f->v, polys_in(g, count)));
    });
}

sparsec_status sparsec_poly_check_bounds(const sparsec_poly* f, const sparsec_poly* const* g, size_t count,
                                         const sparsec_poly* h, char** out) {
    return guard([&] {
        need(f, "f");
        need(h, "h");
        const auto gs = polys_in(g, count);
        auto j = bounds_to_json(check_bounds(f->v, gs, h->v));
        if (h->v.dim <= 12 && gs.size() == f->v.dim) j["pointwise_equal"] = pointwise_equal(f->v, gs, h->v);
        put(out, j);
    });
}

sparsec_status sparsec_poly_evaluate(const sparsec_poly* p, const int* x, size_t n, char** out) {
    return guard([&] {
        need(p, "polynomial");
        if (n) need(x, "point");
        put(out, rational_to_string(poly_evaluate(p->v, std::span<const int>(x, n))));
    });
}

sparsec_status sparsec_poly_active_variables(const sparsec_poly* p, char** out) {
    return guard([&] {
        need(p, "polynomial");
        put(out, json(active_variables(p->v)));
    });
}

sparsec_status sparsec_fourier_sweep(size_t instances, uint64_t seed, char** out) {
    return guard([&] {
        SweepOptions o;
        o.instances = instances;
        o.seed = seed;
        const auto r = random_sweep(o);
        put(out, json{{"instances", r.instances},
                      {"seed", r.seed},
                      {"bound_violations", r.bound_violations},
                      {"pointwise_failures", r.pointwise_failures},
                      {"max_ratio", r.max_ratio}});
    });
}

sparsec_status sparsec_fourier_tree(int levels, char** out) {
    return guard([&] {
        json stages = json::array();
        for (const auto& st : tree_product_example(levels))
            stages.push_back(json{{"level", st.level}, {"h", poly_to_json(st.h)}, {"bounds", bounds_to_json(st.bounds)}});
        put(out, stages);
    });
}

sparsec_status sparsec_lift_evaluate(const sparsec_circuit* c, const double* x, size_t n, double* out, size_t cap) {
    return guard([&] {
        need(c, "circuit");
        copy_out(lift_evaluate(lift(c->v), reals_in(x, n)), out, cap);
    });
}

sparsec_status sparsec_lift_report(const sparsec_circuit* c, double eps, size_t samples, uint64_t seed, char** out) {
    return guard([&] {
        need(c, "circuit");
        const auto l = lift(c->v);
        const std::size_t n = c->v.inputs.size();
        json j;
        if (n <= 20) {
            std::size_t mismatches = 0;
            for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
                const auto v = assignment_bits(idx, n);
                const std::vector<double> x(v.begin(), v.end());
                const auto y = lift_evaluate(l, x);
                const auto e = evaluate(c->v, v);
                for (std::size_t o = 0; o < y.size(); ++o)
                    if (y[o] != static_cast<double>(e[o])) ++mismatches;
            }
            j["vertex_mismatches"] = mismatches;
        }
        bool in_unit = true;
        for (const auto& r : certify_ranges(l)) in_unit = in_unit && r.lo >= 0.0 && r.hi <= 1.0;
        j["ranges_within_unit"] = in_unit;
        j["k_lift"] = output_lipschitz(l);
        j["neighborhood"] = neighborhood_to_json(neighborhood_sweep(l, eps, samples, seed));
        put(out, j);
    });
}

sparsec_status sparsec_arlearn_generate(const sparsec_circuit* c, size_t samples, uint64_t seed, char** out) {
    return guard([&] {
        need(c, "circuit");
        put(out, dataset_to_jsonl(generate_dataset(c->v, samples, seed)));
    });
}

sparsec_status sparsec_arlearn_fit(const sparsec_circuit* c, const char* jsonl, sparsec_predictor** out) {
    return guard([&] {
        need(c, "circuit");
        need(jsonl, "dataset");
        emit(out, fit(c->v, dataset_from_jsonl(jsonl)));
    });
}

sparsec_status sparsec_predictor_from_json(const char* text, sparsec_predictor** out) {
    return guard([&] { emit(out, predictors_from_json(parse(text))); });
}

sparsec_status sparsec_predictor_to_json(const sparsec_predictor* p, char** out) {
    return guard([&] {
        need(p, "predictor");
        put(out, predictors_to_json(p->v));
    });
}

void sparsec_predictor_free(sparsec_predictor* p) { delete p; }

namespace {

// Predictors read from JSON only list gate nodes; pad them to the circuit's node count.
Predictors aligned(const Predictors& p, const Circuit& c) {
    Predictors out = p;
    if (out.size() > c.size()) fail(ErrorCode::DimensionMismatch, "predictor names nodes beyond the circuit");
    while (out.size() < c.size()) {
        GatePredictor g;
        g.node = static_cast<NodeId>(out.size());
        g.is_input = true;
        out.push_back(g);
    }
    for (NodeId v = 0; v < c.size(); ++v) {
        const bool is_input = c.nodes[v].kind == GateKind::Input;
        if (is_input != out[v].is_input || (!is_input && out[v].fan_in != c.nodes[v].fan_in))
            fail(ErrorCode::DimensionMismatch, "predictor does not match the circuit at node " + std::to_string(v));
    }
    return out;
}

}  // namespace

sparsec_status sparsec_arlearn_predict(const sparsec_predictor* p, const sparsec_circuit* c, const uint8_t* input,
                                       size_t n, uint8_t* out, size_t cap) {
    return guard([&] {
        need(p, "predictor");
        need(c, "circuit");
        copy_out(chain_predict(aligned(p->v, c->v), c->v, bits_in(input, n)), out, cap);
    });
}

sparsec_status sparsec_arlearn_eval(const sparsec_predictor* p, const sparsec_circuit* c, char** out) {
    return guard([&] {
        need(p, "predictor");
        need(c, "circuit");
        const auto ps = aligned(p->v, c->v);
        const auto cov = coverage(ps, c->v);
        put(out, json{{"equivalent", chain_equivalent(ps, c->v)},
                      {"coverage", {{"reachable", cov.reachable}, {"covered", cov.covered}, {"unseen", cov.unseen}}}});
    });
}

sparsec_status sparsec_arlearn_curve(const sparsec_circuit* c, const double* deltas, size_t count, size_t trials,
                                     uint64_t seed, char** out) {
    return guard([&] {
        need(c, "circuit");
        CurveOptions o;
        o.trials = trials;
        o.seed = seed;
        put(out, curve_to_json(sample_complexity_curve(c->v, reals_in(deltas, count), o)));
    });
}

sparsec_status sparsec_arlearn_trials(const sparsec_circuit* c, size_t samples, size_t trials, uint64_t seed,
                                      char** out) {
    return guard([&] {
        need(c, "circuit");
        const auto r = recovery_trials(c->v, samples, trials, seed);
        put(out, json{{"trials", r.trials}, {"successes", r.successes}, {"N", r.N}, {"seed", r.seed}});
    });
}

sparsec_status sparsec_pipeline_run(const char* config_json, char** out) {
    return guard([&] {
        const auto r = run_pipeline(config_from_json(parse(config_json)));
        put(out, json{{"exit", static_cast<int>(r.exit)},
                      {"failed_stage", r.failed_stage},
                      {"diagnostics", r.diagnostics},
                      {"circuit", r.circuit},
                      {"network", r.network},
                      {"report_csv", r.report_csv}});
    });
}

}  // extern "C"
