// Command-line front end. Talks to the library only through the C API.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsec/sparsec.h"

using nlohmann::json;

namespace {

struct Failure {
    int exit;
    std::string message;
};

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
    Handle& operator=(Handle&& o) noexcept {
        std::swap(p, o.p);
        return *this;
    }
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};

using Machine = Handle<sparsec_machine, sparsec_machine_free>;
using Circuit = Handle<sparsec_circuit, sparsec_circuit_free>;
using Ltf = Handle<sparsec_ltf, sparsec_ltf_free>;
using Network = Handle<sparsec_network, sparsec_network_free>;
using Poly = Handle<sparsec_poly, sparsec_poly_free>;
using Program = Handle<sparsec_program, sparsec_program_free>;
using Predictor = Handle<sparsec_predictor, sparsec_predictor_free>;

void check(sparsec_status s, const std::string& stage) {
    if (s == SPARSEC_OK) return;
    throw Failure{sparsec_exit_code_for(s), stage + ": " + sparsec_last_error_message()};
}

std::string take(char* s) {
    std::string out = s ? s : "";
    sparsec_string_free(s);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{2, "cannot open '" + path + "'"};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{2, "cannot write '" + path + "'"};
    out << text;
}

// Writes to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        write_file(path, text.back() == '\n' ? text : text + '\n');
    }
}

std::string pretty(const std::string& compact) { return json::parse(compact).dump(2); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::uint8_t> parse_bits(const std::string& s) {
    std::vector<std::uint8_t> bits;
    for (char c : s) {
        if (c == '0' || c == '1')
            bits.push_back(static_cast<std::uint8_t>(c - '0'));
        else if (c != ',' && c != ' ')
            throw Failure{2, "input must be a bit string, got '" + s + "'"};
    }
    return bits;
}

std::vector<double> parse_reals(const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split(s, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw Failure{2, "not a number: '" + t + "'"};
        }
    }
    return out;
}

std::string bit_string(const std::vector<std::uint8_t>& b) {
    std::string s;
    for (auto x : b) s.push_back(x ? '1' : '0');
    return s;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SPARSEC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw Failure{2, "SPARSEC_SEED must be an unsigned integer"};
        }
    }
    return 1;
}

// "auto" or a step count; auto maps to 0, which the library resolves.
std::uint64_t parse_bound(const std::string& s) {
    if (s.empty() || s == "auto") return 0;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Failure{2, "bound must be 'auto' or a step count, got '" + s + "'"};
}

void flatten(const json& j, const std::string& prefix, std::string& csv) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, csv);
        return;
    }
    csv += prefix + "," + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
}

// metric,value rows; a .json path gets the report as-is.
std::string report_text(const std::string& path, const json& rep) {
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) return rep.dump(2);
    std::string csv = "metric,value\n";
    flatten(rep, "", csv);
    return csv;
}

constexpr const char* kBuiltin = "builtin:";

bool builtin(const std::string& s) { return s.rfind(kBuiltin, 0) == 0; }

Machine load_machine(const std::string& src, std::size_t n) {
    Machine m;
    if (builtin(src))
        check(sparsec_machine_builtin(src.substr(8).c_str(), n, m.out()), "machine");
    else
        check(sparsec_machine_from_json(read_file(src).c_str(), m.out()), "machine");
    return m;
}

// builtin:<name>:<n> or a circuit JSON file.
Circuit load_circuit(const std::string& src) {
    Circuit c;
    if (builtin(src)) {
        const auto parts = split(src.substr(8), ':');
        if (parts.empty()) throw Failure{2, "empty builtin circuit name"};
        std::size_t n = 0;
        if (parts.size() > 1) n = std::stoul(parts[1]);
        check(sparsec_circuit_builtin(parts[0].c_str(), n, c.out()), "circuit");
    } else {
        check(sparsec_circuit_from_json(read_file(src).c_str(), c.out()), "circuit");
    }
    return c;
}

Poly load_poly(const std::string& path) {
    Poly p;
    check(sparsec_poly_from_json(read_file(path).c_str(), p.out()), "fourier");
    return p;
}

sparsec_mode parse_mode(const std::string& m) {
    if (m == "exact") return SPARSEC_MODE_EXACT;
    if (m == "robust") return SPARSEC_MODE_ROBUST;
    throw Failure{2, "mode must be exact or robust"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparsec: compositional sparsity toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sparsec_version()));

    std::string machine_src, circuit_src, out_path, report_path, input_bits;
    std::size_t n = 4;
    std::string bound = "auto";
    std::function<int()> action;

    // tm
    auto* tm = app.add_subcommand("tm", "Run a Turing machine");
    tm->require_subcommand(1);
    auto* tm_run = tm->add_subcommand("simulate", "Simulate and print the configuration trace");
    tm_run->alias("run");
    tm_run->add_option("--machine", machine_src, "Machine JSON or builtin:<name>")->required();
    tm_run->add_option("--input", input_bits, "Input bits")->required();
    tm_run->add_option("--bound,--time-bound", bound, "Step limit (auto: declared polynomial)");
    tm_run->add_option("--out", out_path);
    tm_run->callback([&] {
        action = [&] {
            const auto bits = parse_bits(input_bits);
            auto m = load_machine(machine_src, bits.size());
            char* s = nullptr;
            check(sparsec_machine_run(m.get(), bits.data(), bits.size(), parse_bound(bound), &s), "tm");
            emit(out_path, pretty(take(s)));
            return 0;
        };
    });
    auto* tm_exp = tm->add_subcommand("export", "Write a machine as JSON");
    tm_exp->add_option("--machine", machine_src)->required();
    tm_exp->add_option("--n", n, "Width for size-parameterized builtins");
    tm_exp->add_option("--out", out_path);
    tm_exp->callback([&] {
        action = [&] {
            auto m = load_machine(machine_src, n);
            char* s = nullptr;
            check(sparsec_machine_to_json(m.get(), &s), "tm");
            emit(out_path, pretty(take(s)));
            return 0;
        };
    });
    auto* tm_bound = tm->add_subcommand("bound", "Declared time bound p(n + m_out)");
    tm_bound->add_option("--machine", machine_src)->required();
    tm_bound->add_option("--n", n)->required();
    tm_bound->callback([&] {
        action = [&] {
            auto m = load_machine(machine_src, n);
            std::uint64_t T = 0;
            check(sparsec_machine_time_bound(m.get(), n, &T), "tm");
            std::cout << T << '\n';
            return 0;
        };
    });

    // unroll
    std::string sweep, csv_path;
    auto* un = app.add_subcommand("unroll", "Compile a machine into a Boolean circuit");
    un->add_option("--machine", machine_src)->required();
    un->add_option("--n", n, "Input length");
    un->add_option("--bound,--time-bound", bound, "Steps, or auto");
    un->add_option("--out", out_path, "Circuit JSON");
    un->add_option("--report", report_path, "Certificate and bounds (CSV, or JSON for a .json path)");
    un->add_option("--sweep", sweep, "Comma-separated n values for a size/depth CSV");
    un->add_option("--csv", csv_path, "Where the sweep CSV goes (stdout if omitted)");
    un->callback([&] {
        action = [&] {
            auto m = load_machine(machine_src, n);
            if (!sweep.empty()) {
                std::vector<std::size_t> ns;
                for (const auto& t : split(sweep, ',')) ns.push_back(std::stoul(t));
                char* csv = nullptr;
                check(sparsec_build_report_csv(m.get(), ns.data(), ns.size(), &csv), "unroll");
                emit(csv_path, take(csv));
                if (out_path.empty()) return 0;
            }
            Circuit c;
            char* rep = nullptr;
            check(sparsec_unroll(m.get(), n, parse_bound(bound), c.out(), &rep), "unroll");
            const auto rj = json::parse(take(rep));
            char* cj = nullptr;
            check(sparsec_circuit_to_json(c.get(), &cj), "unroll");
            emit(out_path, take(cj));
            if (!report_path.empty()) emit(report_path, report_text(report_path, rj));
            else if (!out_path.empty()) std::cout << rj.dump(2) << '\n';
            return 0;
        };
    });

    // circuit
    std::string other_src, builtin_name;
    auto* ci = app.add_subcommand("circuit", "Inspect Boolean circuits");
    ci->require_subcommand(1);
    auto* ci_eval = ci->add_subcommand("eval", "Evaluate on one input");
    ci_eval->add_option("--circuit", circuit_src, "Circuit JSON or builtin:<name>:<n>")->required();
    ci_eval->add_option("--input", input_bits)->required();
    ci_eval->callback([&] {
        action = [&] {
            auto c = load_circuit(circuit_src);
            const auto bits = parse_bits(input_bits);
            std::vector<std::uint8_t> out(sparsec_circuit_output_count(c.get()));
            check(sparsec_circuit_evaluate(c.get(), bits.data(), bits.size(), out.data(), out.size()), "circuit");
            std::cout << bit_string(out) << '\n';
            return 0;
        };
    });
    auto* ci_cert = ci->add_subcommand("certify", "Sparsity certificate (k, s, L)");
    ci_cert->add_option("--circuit", circuit_src)->required();
    ci_cert->callback([&] {
        action = [&] {
            auto c = load_circuit(circuit_src);
            char* s = nullptr;
            check(sparsec_circuit_certify(c.get(), &s), "circuit");
            std::cout << pretty(take(s)) << '\n';
            return 0;
        };
    });
    auto* ci_val = ci->add_subcommand("validate", "List structural violations");
    ci_val->add_option("--circuit", circuit_src)->required();
    ci_val->callback([&] {
        action = [&] {
            char* s = nullptr;
            if (builtin(circuit_src)) {
                auto c = load_circuit(circuit_src);
                check(sparsec_circuit_validate(c.get(), &s), "circuit");
            } else {
                check(sparsec_circuit_validate_json(read_file(circuit_src).c_str(), &s), "circuit");
            }
            const auto v = json::parse(take(s));
            std::cout << v.dump(2) << '\n';
            return v.empty() ? 0 : 1;
        };
    });
    auto* ci_eq = ci->add_subcommand("equiv", "Exhaustive equivalence check");
    ci_eq->add_option("--a", circuit_src)->required();
    ci_eq->add_option("--b", other_src)->required();
    ci_eq->callback([&] {
        action = [&] {
            auto a = load_circuit(circuit_src);
            auto b = load_circuit(other_src);
            char* s = nullptr;
            check(sparsec_circuit_equiv(a.get(), b.get(), &s), "circuit");
            const auto r = json::parse(take(s));
            std::cout << r.dump(2) << '\n';
            return r.at("equivalent").get<bool>() ? 0 : 1;
        };
    });
    auto* ci_b = ci->add_subcommand("builtin", "Write a corpus circuit");
    ci_b->add_option("--name", builtin_name, "and_tree, parity_tree, ripple_adder, not, and, or, xor")->required();
    ci_b->add_option("--n", n);
    ci_b->add_option("--out", out_path);
    ci_b->callback([&] {
        action = [&] {
            Circuit c;
            check(sparsec_circuit_builtin(builtin_name.c_str(), n, c.out()), "circuit");
            char* s = nullptr;
            check(sparsec_circuit_to_json(c.get(), &s), "circuit");
            emit(out_path, take(s));
            return 0;
        };
    });

    // ltf
    std::string ltf_src;
    auto* lt = app.add_subcommand("ltf", "Threshold circuits");
    lt->require_subcommand(1);
    auto* lt_from = lt->add_subcommand("from-bool", "Gate-for-gate threshold circuit");
    lt_from->alias("from-circuit");
    lt_from->add_option("--circuit", circuit_src)->required();
    lt_from->add_option("--out", out_path);
    lt_from->callback([&] {
        action = [&] {
            auto c = load_circuit(circuit_src);
            Ltf l;
            check(sparsec_ltf_from_circuit(c.get(), l.out()), "ltf");
            char* s = nullptr;
            check(sparsec_ltf_to_json(l.get(), &s), "ltf");
            emit(out_path, take(s));
            return 0;
        };
    });
    auto* lt_low = lt->add_subcommand("lower", "Lower threshold gates to fan-in-2 logic");
    lt_low->add_option("--ltf", ltf_src)->required();
    lt_low->add_option("--out", out_path);
    lt_low->callback([&] {
        action = [&] {
            Ltf l;
            check(sparsec_ltf_from_json(read_file(ltf_src).c_str(), l.out()), "ltf");
            Circuit c;
            check(sparsec_ltf_lower(l.get(), c.out()), "ltf");
            char* s = nullptr;
            check(sparsec_circuit_to_json(c.get(), &s), "ltf");
            emit(out_path, take(s));
            return 0;
        };
    });
    auto* lt_rt = lt->add_subcommand("roundtrip", "Circuit -> LTF -> circuit, exhaustively compared");
    lt_rt->add_option("--circuit", circuit_src)->required();
    lt_rt->callback([&] {
        action = [&] {
            auto c = load_circuit(circuit_src);
            char* s = nullptr;
            check(sparsec_ltf_roundtrip(c.get(), &s), "ltf");
            const auto r = json::parse(take(s));
            std::cout << r.dump(2) << '\n';
            return r.at("equivalent").get<bool>() && r.at("within_bounds").get<bool>() ? 0 : 1;
        };
    });

    // neuralize
    double eps = 1e-3, delta = 0.1;
    std::string mode = "exact", net_src, eval_point;
    auto* ne = app.add_subcommand("neuralize", "Compile a circuit into a ReLU network, or evaluate one");
    ne->add_option("--circuit", circuit_src);
    ne->add_option("--eps", eps, "Total error budget");
    ne->add_option("--mode", mode, "exact or robust");
    ne->add_option("--delta", delta, "Robust-mode snapping radius");
    ne->add_option("--out", out_path, "Network JSON");
    ne->add_option("--report", report_path);
    ne->add_option("--net", net_src, "Evaluate this network instead of compiling");
    ne->add_option("--eval", eval_point, "Comma-separated input");
    ne->callback([&] {
        action = [&] {
            if (!net_src.empty()) {
                Network net;
                check(sparsec_network_from_json(read_file(net_src).c_str(), net.out()), "neuralize");
                const auto x = parse_reals(eval_point);
                std::vector<double> y(sparsec_network_output_width(net.get()));
                check(sparsec_network_evaluate(net.get(), x.data(), x.size(), y.data(), y.size()), "neuralize");
                std::cout << json(y).dump() << '\n';
                return 0;
            }
            if (circuit_src.empty()) throw Failure{2, "neuralize: --circuit or --net is required"};
            auto c = load_circuit(circuit_src);
            Network net;
            char* rep = nullptr;
            check(sparsec_neuralize(c.get(), eps, parse_mode(mode), delta, net.out(), &rep), "neuralize");
            const auto report = pretty(take(rep));
            char* s = nullptr;
            check(sparsec_network_to_json(net.get(), &s), "neuralize");
            emit(out_path, take(s));
            if (!report_path.empty()) emit(report_path, report);
            else if (!out_path.empty()) std::cout << report << '\n';
            return 0;
        };
    });

    // pipeline
    std::string config_path, program_src, out_dir = ".";
    int p_n = 0, p_mout = 0;
    double p_eps = 0, p_lf = -1, p_delta = -1;
    std::string p_mode;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    bool p_check = false, p_no_check = false;
    auto* pi = app.add_subcommand("pipeline", "Source -> circuit -> network -> checks");
    pi->add_option("--config", config_path, "JSON config; flags override it");
    auto* o_machine = pi->add_option("--machine", machine_src);
    auto* o_program = pi->add_option("--program", program_src, "Bit-program JSON or builtin:<name>");
    auto* o_n = pi->add_option("--n", p_n);
    auto* o_mout = pi->add_option("--mout", p_mout);
    auto* o_eps = pi->add_option("--eps", p_eps);
    auto* o_mode = pi->add_option("--mode", p_mode);
    auto* o_delta = pi->add_option("--delta", p_delta);
    auto* o_seed = pi->add_option("--seed", seed);
    auto* o_samples = pi->add_option("--samples", samples);
    auto* o_lf = pi->add_option("--lf", p_lf, "Lipschitz constant of the target function");
    pi->add_flag("--check", p_check, "Run the stage checks (default)");
    pi->add_flag("--no-check", p_no_check);
    pi->add_option("--out-dir", out_dir);
    pi->callback([&] {
        action = [&] {
            json cfg = json::object();
            if (!config_path.empty()) {
                try {
                    cfg = json::parse(read_file(config_path));
                } catch (const json::exception& e) {
                    throw Failure{2, std::string("config: ") + e.what()};
                }
                if (!cfg.is_object()) throw Failure{2, "config: expected a JSON object"};
            }
            if (!cfg.contains("seed")) cfg["seed"] = default_seed();
            if (*o_machine) {
                cfg["machine"] = machine_src;
                cfg.erase("program");
            }
            if (*o_program) {
                cfg["program"] = program_src;
                cfg.erase("machine");
            }
            if (*o_n) cfg["n"] = p_n;
            if (*o_mout) cfg["m_out"] = p_mout;
            if (*o_eps) cfg["eps"] = p_eps;
            if (*o_mode) cfg["mode"] = p_mode;
            if (*o_delta) cfg["delta"] = p_delta;
            if (*o_seed) cfg["seed"] = seed;
            if (*o_samples) cfg["samples"] = samples;
            if (*o_lf) cfg["L_f"] = p_lf;
            if (p_check) cfg["check"] = true;
            if (p_no_check) cfg["check"] = false;

            char* s = nullptr;
            check(sparsec_pipeline_run(cfg.dump().c_str(), &s), "pipeline");
            const auto r = json::parse(take(s));
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            if (!r.at("circuit").is_null()) write_file((dir / "circuit.json").string(), r.at("circuit").dump() + "\n");
            if (!r.at("network").is_null()) write_file((dir / "net.json").string(), r.at("network").dump() + "\n");
            write_file((dir / "report.csv").string(), r.at("report_csv").get<std::string>());
            for (const auto& d : r.at("diagnostics")) std::cerr << d.get<std::string>() << '\n';
            const int code = r.at("exit").get<int>();
            std::cout << (code == 0 ? "pipeline ok" : "pipeline failed") << " (exit " << code << ")\n";
            return code;
        };
    });

    // fourier
    std::string f_src, h_src, point;
    std::vector<std::string> g_src;
    std::size_t instances = 100;
    int levels = 3;
    auto* fo = app.add_subcommand("fourier", "Sparse Fourier polynomials");
    fo->require_subcommand(1);
    auto load_g = [&] {
        std::vector<Poly> gs;
        for (const auto& p : g_src) gs.push_back(load_poly(p));
        return gs;
    };
    auto raw = [](const std::vector<Poly>& gs) {
        std::vector<const sparsec_poly*> v;
        for (const auto& g : gs) v.push_back(g.get());
        return v;
    };
    auto* fo_c = fo->add_subcommand("compose", "h = f(g_1, ..., g_d)");
    fo_c->add_option("--f", f_src)->required();
    fo_c->add_option("--g", g_src, "One per variable of f, in order")->required();
    fo_c->add_option("--out", out_path);
    fo_c->callback([&] {
        action = [&] {
            auto f = load_poly(f_src);
            auto gs = load_g();
            const auto gv = raw(gs);
            Poly h;
            check(sparsec_poly_compose(f.get(), gv.data(), gv.size(), h.out()), "fourier");
            char* s = nullptr;
            check(sparsec_poly_to_json(h.get(), &s), "fourier");
            emit(out_path, take(s));
            return 0;
        };
    });
    auto* fo_k = fo->add_subcommand("check", "Degree and sparsity bounds of a composition");
    fo_k->add_option("--f", f_src)->required();
    fo_k->add_option("--g", g_src)->required();
    fo_k->add_option("--composed", h_src, "Composition to check (computed if omitted)");
    fo_k->callback([&] {
        action = [&] {
            auto f = load_poly(f_src);
            auto gs = load_g();
            const auto gv = raw(gs);
            Poly h;
            if (h_src.empty())
                check(sparsec_poly_compose(f.get(), gv.data(), gv.size(), h.out()), "fourier");
            else
                h = load_poly(h_src);
            char* s = nullptr;
            check(sparsec_poly_check_bounds(f.get(), gv.data(), gv.size(), h.get(), &s), "fourier");
            const auto r = json::parse(take(s));
            std::cout << r.dump(2) << '\n';
            return r.at("pass").get<bool>() && r.value("pointwise_equal", true) ? 0 : 1;
        };
    });
    auto* fo_s = fo->add_subcommand("sweep", "Random compositions against the bounds");
    fo_s->add_option("--instances", instances);
    auto* fo_seed = fo_s->add_option("--seed", seed);
    fo_s->callback([&] {
        action = [&] {
            if (!*fo_seed) seed = default_seed();
            char* s = nullptr;
            check(sparsec_fourier_sweep(instances, seed, &s), "fourier");
            const auto r = json::parse(take(s));
            std::cout << r.dump(2) << '\n';
            return r.at("bound_violations").get<int>() == 0 && r.at("pointwise_failures").get<int>() == 0 ? 0 : 1;
        };
    });
    auto* fo_t = fo->add_subcommand("tree", "Binary-tree product of 2^levels variables");
    fo_t->add_option("--levels", levels);
    fo_t->callback([&] {
        action = [&] {
            char* s = nullptr;
            check(sparsec_fourier_tree(levels, &s), "fourier");
            std::cout << pretty(take(s)) << '\n';
            return 0;
        };
    });
    auto* fo_e = fo->add_subcommand("eval", "Exact value at a point of {-1,1}^d");
    fo_e->add_option("--poly", f_src)->required();
    fo_e->add_option("--point", point, "Comma-separated +-1 entries")->required();
    fo_e->callback([&] {
        action = [&] {
            auto p = load_poly(f_src);
            std::vector<int> x;
            for (const auto& t : split(point, ',')) x.push_back(std::stoi(t));
            char* s = nullptr;
            check(sparsec_poly_evaluate(p.get(), x.data(), x.size(), &s), "fourier");
            std::cout << take(s) << '\n';
            return 0;
        };
    });
    auto* fo_a = fo->add_subcommand("active", "Variables the polynomial depends on");
    fo_a->add_option("--poly", f_src)->required();
    fo_a->callback([&] {
        action = [&] {
            auto p = load_poly(f_src);
            char* s = nullptr;
            check(sparsec_poly_active_variables(p.get(), &s), "fourier");
            std::cout << take(s) << '\n';
            return 0;
        };
    });

    // lift
    double lift_eps = 0.01;
    std::size_t lift_samples = 1000;
    bool lift_report = false;
    auto* li = app.add_subcommand("lift", "Multilinear extension of a circuit");
    li->add_option("--circuit", circuit_src)->required();
    li->add_option("--eval", eval_point, "Comma-separated point in [0,1]^n");
    li->add_flag("--report", lift_report, "Vertex, range and neighborhood checks");
    li->add_option("--eps", lift_eps);
    li->add_option("--samples", lift_samples);
    auto* li_seed = li->add_option("--seed", seed);
    li->callback([&] {
        action = [&] {
            auto c = load_circuit(circuit_src);
            if (!eval_point.empty()) {
                const auto x = parse_reals(eval_point);
                std::vector<double> y(sparsec_circuit_output_count(c.get()));
                check(sparsec_lift_evaluate(c.get(), x.data(), x.size(), y.data(), y.size()), "lift");
                std::cout << json(y).dump() << '\n';
            }
            if (lift_report || eval_point.empty()) {
                if (!*li_seed) seed = default_seed();
                char* s = nullptr;
                check(sparsec_lift_report(c.get(), lift_eps, lift_samples, seed, &s), "lift");
                const auto r = json::parse(take(s));
                std::cout << r.dump(2) << '\n';
                const bool ok = r.value("vertex_mismatches", 0) == 0 && r.at("ranges_within_unit").get<bool>() &&
                                r.at("neighborhood").at("violations").get<int>() == 0;
                return ok ? 0 : 1;
            }
            return 0;
        };
    });

    // arlearn
    std::string data_path, pred_path, deltas = "0.1,0.05";
    std::size_t trials = 20;
    auto* ar = app.add_subcommand("arlearn", "Learn gate tables from computation traces");
    ar->require_subcommand(1);
    auto* ar_g = ar->add_subcommand("gen", "Sample a trace dataset (JSON lines)");
    ar_g->add_option("--circuit", circuit_src)->required();
    ar_g->add_option("--samples", samples)->required();
    auto* ar_g_seed = ar_g->add_option("--seed", seed);
    ar_g->add_option("--out", out_path);
    ar_g->callback([&] {
        action = [&] {
            if (!*ar_g_seed) seed = default_seed();
            auto c = load_circuit(circuit_src);
            char* s = nullptr;
            check(sparsec_arlearn_generate(c.get(), samples, seed, &s), "arlearn");
            emit(out_path, take(s));
            return 0;
        };
    });
    auto* ar_f = ar->add_subcommand("fit", "Per-node majority tables");
    ar_f->add_option("--circuit", circuit_src)->required();
    ar_f->add_option("--data", data_path)->required();
    ar_f->add_option("--out", out_path);
    ar_f->callback([&] {
        action = [&] {
            auto c = load_circuit(circuit_src);
            Predictor p;
            check(sparsec_arlearn_fit(c.get(), read_file(data_path).c_str(), p.out()), "arlearn");
            char* s = nullptr;
            check(sparsec_predictor_to_json(p.get(), &s), "arlearn");
            emit(out_path, take(s));
            return 0;
        };
    });
    auto* ar_e = ar->add_subcommand("eval", "Chain the tables; compare with the circuit");
    ar_e->add_option("--circuit", circuit_src)->required();
    ar_e->add_option("--predictor", pred_path)->required();
    ar_e->add_option("--input", input_bits, "Predict one input instead of the exhaustive check");
    ar_e->callback([&] {
        action = [&] {
            auto c = load_circuit(circuit_src);
            Predictor p;
            check(sparsec_predictor_from_json(read_file(pred_path).c_str(), p.out()), "arlearn");
            if (!input_bits.empty()) {
                const auto bits = parse_bits(input_bits);
                std::vector<std::uint8_t> out(sparsec_circuit_output_count(c.get()));
                check(sparsec_arlearn_predict(p.get(), c.get(), bits.data(), bits.size(), out.data(), out.size()),
                      "arlearn");
                std::cout << bit_string(out) << '\n';
                return 0;
            }
            char* s = nullptr;
            check(sparsec_arlearn_eval(p.get(), c.get(), &s), "arlearn");
            const auto r = json::parse(take(s));
            std::cout << r.dump(2) << '\n';
            return r.at("equivalent").get<bool>() ? 0 : 1;
        };
    });
    auto* ar_c = ar->add_subcommand("curve", "Empirical sample complexity per delta");
    ar_c->add_option("--circuit", circuit_src)->required();
    ar_c->add_option("--deltas", deltas);
    ar_c->add_option("--trials", trials);
    auto* ar_c_seed = ar_c->add_option("--seed", seed);
    ar_c->callback([&] {
        action = [&] {
            if (!*ar_c_seed) seed = default_seed();
            auto c = load_circuit(circuit_src);
            const auto ds = parse_reals(deltas);
            char* s = nullptr;
            check(sparsec_arlearn_curve(c.get(), ds.data(), ds.size(), trials, seed, &s), "arlearn");
            std::cout << pretty(take(s)) << '\n';
            return 0;
        };
    });

    // demo
    int depth = 10;
    std::size_t L = 1;
    double K = 1;
    auto* de = app.add_subcommand("demo", "Small self-contained demonstrations");
    de->require_subcommand(1);
    auto* de_t = de->add_subcommand("telgarsky", "Tent-map composition: pieces versus depth");
    de_t->add_option("--depth", depth);
    de_t->add_option("--out", out_path, "Network JSON");
    de_t->callback([&] {
        action = [&] {
            char* s = nullptr;
            check(sparsec_telgarsky(depth, &s), "demo");
            const auto r = json::parse(take(s));
            std::cout << "depth " << depth << ": " << r.at("region_count") << " linear pieces on [0,1]; "
                      << "one hidden layer needs at least " << r.at("shallow_units_needed") << " units\n";
            if (!out_path.empty()) emit(out_path, r.at("network").dump());
            return 0;
        };
    });
    auto* de_b = de->add_subcommand("budget", "Per-gate accuracy eps / (L K^(L-1))");
    de_b->add_option("--L", L)->required();
    de_b->add_option("--K", K)->required();
    de_b->add_option("--eps", eps)->required();
    de_b->callback([&] {
        action = [&] {
            double g = 0;
            check(sparsec_allocate_budget(L, K, eps, &g), "demo");
            std::cout << json(g).dump() << '\n';
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        return action ? action() : 2;
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.exit;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
