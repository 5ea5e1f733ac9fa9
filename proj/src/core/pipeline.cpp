#include "pipeline.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "precision.hpp"
#include "tm.hpp"
#include "tm2circuit.hpp"

namespace sparsec {

using nlohmann::json;

ExitCode exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::BudgetInfeasible:
        case ErrorCode::WidthOverflow:
        case ErrorCode::TimeBoundExceeded:
        case ErrorCode::TooManyInputs:
        case ErrorCode::DepthOutOfRange: return ExitCode::Infeasible;
        case ErrorCode::CheckFailed:
        case ErrorCode::Internal: return ExitCode::CheckFailed;
        default: return ExitCode::InputError;
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

json parse_file(const std::string& path) {
    const auto text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, "'" + path + "': " + e.what());
    }
}

constexpr const char* kBuiltin = "builtin:";

bool is_builtin(const std::string& s) { return s.rfind(kBuiltin, 0) == 0; }

BitProgram load_program(const std::string& source) {
    if (is_builtin(source)) {
        const auto name = source.substr(8);
        if (name == "square") return programs::square();
        if (name == "identity") return programs::identity();
        if (name == "doubling") return programs::doubling();
        if (name == "zero") return programs::zero();
        fail(ErrorCode::InvalidArgument, "unknown builtin program '" + name + "'");
    }
    return program_from_json(parse_file(source));
}

std::string num(double v) { return json(v).dump(); }

class Report {
public:
    template <class T>
    void add(const std::string& stage, const std::string& metric, const T& value) {
        std::ostringstream os;
        if constexpr (std::is_floating_point_v<T>)
            os << num(value);
        else if constexpr (std::is_same_v<T, bool>)
            os << (value ? "true" : "false");
        else
            os << value;
        rows_ << stage << ',' << metric << ',' << os.str() << '\n';
    }
    std::string str() const { return "stage,metric,value\n" + rows_.str(); }

private:
    std::ostringstream rows_;
};

}  // namespace

TuringMachine load_machine(const std::string& source, std::size_t n) {
    if (is_builtin(source)) {
        const auto name = source.substr(8);
        if (name == "identity") return machines::identity(static_cast<std::uint32_t>(n));
        if (name == "parity") return machines::parity();
        if (name == "adder2") return machines::adder2();
        if (name == "constant_one") return machines::constant_one();
        fail(ErrorCode::InvalidArgument, "unknown builtin machine '" + name + "'");
    }
    return machine_from_json(parse_file(source));
}

PipelineConfig config_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Parse, "config must be a JSON object");
    PipelineConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "machine") c.machine = v.get<std::string>();
            else if (key == "program") c.program = v.get<std::string>();
            else if (key == "n") c.n = v.get<int>();
            else if (key == "m_out") c.m_out = v.get<int>();
            else if (key == "eps") c.eps = v.get<double>();
            else if (key == "mode") {
                const auto m = v.get<std::string>();
                if (m != "exact" && m != "robust") fail(ErrorCode::Parse, "mode must be exact or robust");
                c.mode = m == "exact" ? GadgetMode::Exact : GadgetMode::Robust;
            } else if (key == "delta") c.delta = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "samples") c.samples = v.get<std::size_t>();
            else if (key == "L_f") c.L_f = v.get<double>();
            else if (key == "time_bound") c.time_bound = v.get<std::uint64_t>();
            else if (key == "check") c.check = v.get<bool>();
            else fail(ErrorCode::Parse, "unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("config: ") + e.what());
    }
    return c;
}

json config_to_json(const PipelineConfig& c) {
    json j;
    if (c.machine) j["machine"] = *c.machine;
    if (c.program) j["program"] = *c.program;
    j["n"] = c.n;
    j["m_out"] = c.m_out;
    if (c.eps) j["eps"] = *c.eps;
    j["mode"] = c.mode == GadgetMode::Exact ? "exact" : "robust";
    j["delta"] = c.delta;
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    if (c.L_f) j["L_f"] = *c.L_f;
    if (c.time_bound) j["time_bound"] = *c.time_bound;
    j["check"] = c.check;
    return j;
}

namespace {

void machine_checks(const TuringMachine& m, const UnrollResult& u, std::size_t n, Report& rep,
                    std::vector<std::string>& failures, std::uint64_t seed) {
    const auto& c = u.circuit;
    std::size_t mismatches = 0, checked = 0;
    auto compare = [&](const std::vector<std::uint8_t>& x) {
        ++checked;
        if (evaluate(c, x) != run_outputs(m, x, u.time_bound)) ++mismatches;
    };
    if (n <= 12) {
        for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) compare(assignment_bits(idx, n));
    } else {
        std::mt19937_64 rng(seed);
        std::vector<std::uint8_t> x(n);
        for (int t = 0; t < 4096; ++t) {
            for (auto& b : x) b = static_cast<std::uint8_t>(rng() >> 63);
            compare(x);
        }
    }
    rep.add("circuit", "simulate_inputs_checked", checked);
    rep.add("circuit", "simulate_mismatches", mismatches);
    if (mismatches) failures.push_back("circuit: " + std::to_string(mismatches) + " inputs disagree with simulate");

    const auto cert = certify_sparsity(c);
    const double sb = unroll_size_bound(m, n, u.time_bound), db = unroll_depth_bound(m, n, u.time_bound);
    rep.add("circuit", "size_bound", sb);
    rep.add("circuit", "depth_bound", db);
    const bool within = cert.k <= 2 && static_cast<double>(cert.s) <= sb && static_cast<double>(cert.L) <= db;
    rep.add("circuit", "within_bounds", within);
    if (!within) failures.push_back("circuit: sparsity certificate exceeds the closed-form bounds");
}

void network_checks(const Circuit& c, const Neuralized& nn, const PipelineConfig& cfg, double eps_total, Report& rep,
                    std::vector<std::string>& failures) {
    const std::size_t n = c.inputs.size();
    std::size_t mismatches = 0, checked = 0;
    std::vector<double> xd(n);
    auto vertex = [&](const std::vector<std::uint8_t>& x) {
        ++checked;
        for (std::size_t i = 0; i < n; ++i) xd[i] = x[i];
        if (threshold_outputs(net_evaluate(nn.net, xd)) != evaluate(c, x)) ++mismatches;
    };
    std::mt19937_64 rng(cfg.seed);
    if (n <= 14) {
        for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) vertex(assignment_bits(idx, n));
    } else {
        std::vector<std::uint8_t> x(n);
        for (std::size_t t = 0; t < cfg.samples; ++t) {
            for (auto& b : x) b = static_cast<std::uint8_t>(rng() >> 63);
            vertex(x);
        }
    }
    rep.add("network", "vertex_inputs_checked", checked);
    rep.add("network", "vertex_mismatches", mismatches);
    if (mismatches) failures.push_back("network: " + std::to_string(mismatches) + " vertices disagree with the circuit");

    if (cfg.mode != GadgetMode::Robust) return;
    double worst = 0;
    std::vector<std::uint8_t> x(n);
    for (std::size_t t = 0; t < cfg.samples; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<std::uint8_t>(rng() >> 63);
            const double u = cfg.delta * std::ldexp(static_cast<double>(rng() >> 11), -53);
            xd[i] = x[i] ? 1.0 - u : u;
        }
        const auto y = net_evaluate(nn.net, xd);
        const auto ref = evaluate(c, x);
        for (std::size_t o = 0; o < y.size(); ++o) worst = std::max(worst, std::abs(y[o] - ref[o]));
    }
    rep.add("network", "perturbed_samples", cfg.samples);
    rep.add("network", "perturbed_max_error", worst);
    if (worst > eps_total) failures.push_back("network: perturbed error " + num(worst) + " exceeds eps " + num(eps_total));
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult res;
    Report rep;
    std::string stage = "config";
    std::vector<std::string> failures;
    try {
        if (cfg.machine.has_value() == cfg.program.has_value())
            fail(ErrorCode::InvalidArgument, "exactly one of machine or program must be given");
        if (cfg.n < 1 || cfg.m_out < 1) fail(ErrorCode::InvalidArgument, "n and m_out must be at least 1");
        const double eps_total = cfg.eps.value_or(std::ldexp(1.0, -cfg.m_out));
        if (!(eps_total > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
        const NeuralizeOptions nopts{cfg.mode, cfg.delta};
        rep.add("config", "seed", cfg.seed);
        rep.add("config", "n", cfg.n);
        rep.add("config", "m_out", cfg.m_out);
        rep.add("config", "eps_total", eps_total);
        rep.add("config", "mode", cfg.mode == GadgetMode::Exact ? "exact" : "robust");
        rep.add("config", "delta", cfg.delta);

        stage = "source";
        std::optional<TuringMachine> machine;
        std::optional<BitProgram> program;
        if (cfg.machine) {
            machine = load_machine(*cfg.machine, static_cast<std::size_t>(cfg.n));
            rep.add("source", "machine", machine->name);
        } else {
            program = load_program(*cfg.program);
            analyze_program(*program, cfg.n, cfg.m_out);
            rep.add("source", "program", program->name);
        }

        stage = "circuit";
        Circuit circuit;
        std::optional<UnrollResult> unrolled;
        if (machine) {
            const auto n = static_cast<std::size_t>(cfg.n);
            const auto T = cfg.time_bound.value_or(auto_time_bound(*machine, n));
            unrolled = unroll(*machine, n, T);
            circuit = unrolled->circuit;
            rep.add("circuit", "time_bound", T);
            rep.add("circuit", "tape_length", tape_length(*machine, n, T));
        } else {
            circuit = compile_bitprogram(*program, cfg.n, cfg.m_out);
        }
        const auto cert = certify_sparsity(circuit);
        rep.add("circuit", "k", cert.k);
        rep.add("circuit", "s", cert.s);
        rep.add("circuit", "L", cert.L);
        rep.add("circuit", "input_bits", cert.input_bits);
        rep.add("circuit", "output_bits", cert.output_bits);
        rep.add("circuit", "max_level_width", max_level_width(circuit));
        res.circuit = circuit_to_json(circuit);
        if (cfg.check && machine)
            machine_checks(*machine, *unrolled, static_cast<std::size_t>(cfg.n), rep, failures, cfg.seed);

        stage = "neuralize";
        const auto budget = plan_budget(circuit, eps_total, nopts);
        rep.add("neuralize", "budget_L", budget.L);
        rep.add("neuralize", "budget_K", budget.K);
        rep.add("neuralize", "eps_gate", budget.eps_gate);
        const auto nn = neuralize_circuit(circuit, budget, nopts);
        rep.add("neuralize", "layers", nn.net.layers.size());
        rep.add("neuralize", "max_width", nn.net.max_width());
        rep.add("neuralize", "units", nn.net.unit_count());
        rep.add("neuralize", "gadget_stages", nn.gadget_stages);
        rep.add("neuralize", "max_layer_norm", nn.max_layer_norm);
        rep.add("neuralize", "max_stage_lipschitz", nn.max_stage_lipschitz);
        res.network = network_to_json(nn.net);

        if (cfg.check) {
            stage = "check";
            network_checks(circuit, nn, cfg, eps_total, rep, failures);
            if (program) {
                if (!cfg.L_f) fail(ErrorCode::InvalidArgument, "program checks need L_f");
                EndToEndOptions eo;
                eo.neuralize = nopts;
                eo.seed = cfg.seed;
                const auto prog = *program;
                const auto e2e = end_to_end_check(family_from_program(prog, cfg.n, cfg.m_out),
                                                  [&prog](std::span<const double> x) { return program_real_eval(prog, x); },
                                                  *cfg.L_f, cfg.samples, eo);
                rep.add("check", "L_f", e2e.L_f);
                rep.add("check", "samples", e2e.samples);
                rep.add("check", "measured_error", e2e.measured_error);
                rep.add("check", "bound", e2e.bound);
                rep.add("check", "network_mismatches", e2e.network_mismatches);
                rep.add("check", "pass", e2e.pass);
                if (!e2e.pass)
                    failures.push_back("check: measured error " + num(e2e.measured_error) + " exceeds bound " +
                                       num(e2e.bound));
            }
        }
        stage.clear();
    } catch (const Error& e) {
        res.exit = exit_code_for(e.code());
        res.failed_stage = stage;
        res.diagnostics.push_back(stage + ": " + e.what());
    } catch (const std::exception& e) {
        res.exit = ExitCode::CheckFailed;
        res.failed_stage = stage;
        res.diagnostics.push_back(stage + ": " + e.what());
    }
    if (res.exit == ExitCode::Ok && !failures.empty()) res.exit = ExitCode::CheckFailed;
    for (auto& f : failures) res.diagnostics.push_back(std::move(f));
    rep.add("result", "exit_code", static_cast<int>(res.exit));
    res.report_csv = rep.str();
    return res;
}

}  // namespace sparsec
