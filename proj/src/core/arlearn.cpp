#include "arlearn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "error.hpp"

namespace sparsec {

using nlohmann::json;

TraceDataset generate_dataset(const Circuit& c, std::size_t num_samples, std::uint64_t seed) {
    require_valid(c);
    if (num_samples < 1) fail(ErrorCode::InvalidArgument, "num_samples must be at least 1");
    TraceDataset ds;
    ds.circuit = c.name;
    ds.nodes = c.size();
    ds.seed = seed;
    ds.samples.reserve(num_samples);
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> x(c.inputs.size());
    for (std::size_t t = 0; t < num_samples; ++t) {
        for (auto& b : x) b = static_cast<std::uint8_t>(rng() >> 63);
        ds.samples.push_back(evaluate_nodes(c, x));
    }
    return ds;
}

namespace {

std::size_t pattern_of(const GatePredictor& g, std::span<const std::uint8_t> values) {
    std::size_t p = 0;
    for (auto f : g.fan_in) p = (p << 1) | (values[f] ? 1u : 0u);
    return p;
}

std::string pattern_string(std::size_t p, std::size_t arity) {
    std::string s;
    for (std::size_t k = arity; k-- > 0;) s.push_back(((p >> k) & 1) ? '1' : '0');
    return s;
}

Predictors empty_predictors(const Circuit& c) {
    Predictors ps(c.size());
    for (NodeId v = 0; v < c.size(); ++v) {
        ps[v].node = v;
        ps[v].is_input = c.nodes[v].kind == GateKind::Input;
        ps[v].fan_in = c.nodes[v].fan_in;
    }
    return ps;
}

void finalize(Predictors& ps) {
    for (auto& g : ps) {
        for (std::size_t p = 0; p < 4; ++p) {
            const auto& ct = g.counts[p];
            if (ct[0] + ct[1] == 0)
                g.predict[p].reset();
            else
                g.predict[p] = ct[1] > ct[0] ? 1 : 0;
        }
    }
}

}  // namespace

Predictors fit_prefix(const Circuit& c, const TraceDataset& ds, std::size_t prefix) {
    require_valid(c);
    if (ds.nodes != c.size()) fail(ErrorCode::DimensionMismatch, "dataset was generated from a different circuit");
    auto ps = empty_predictors(c);
    const std::size_t N = std::min(prefix, ds.samples.size());
    for (std::size_t t = 0; t < N; ++t) {
        const auto& seq = ds.samples[t];
        if (seq.size() != c.size()) fail(ErrorCode::DimensionMismatch, "sequence length differs from node count");
        for (auto& g : ps) {
            if (g.is_input) continue;
            ++g.counts[pattern_of(g, seq)][seq[g.node] ? 1 : 0];
        }
    }
    finalize(ps);
    return ps;
}

Predictors fit(const Circuit& c, const TraceDataset& ds) { return fit_prefix(c, ds, ds.samples.size()); }

std::vector<std::uint8_t> chain_predict(const Predictors& p, const Circuit& c, std::span<const std::uint8_t> input) {
    if (p.size() != c.size()) fail(ErrorCode::DimensionMismatch, "predictor count differs from node count");
    if (input.size() != c.inputs.size()) fail(ErrorCode::ArityMismatch, "wrong number of input bits");
    std::vector<std::uint8_t> val(c.size(), 0);
    for (std::size_t i = 0; i < c.inputs.size(); ++i) val[c.inputs[i]] = input[i] ? 1 : 0;
    for (const auto& g : p) {
        if (g.is_input) continue;
        const auto pat = pattern_of(g, val);
        if (!g.predict[pat])
            fail(ErrorCode::UncoveredPattern,
                 "node " + std::to_string(g.node) + " pattern " + pattern_string(pat, g.fan_in.size()));
        val[g.node] = *g.predict[pat];
    }
    std::vector<std::uint8_t> out;
    for (auto o : c.outputs) out.push_back(val[o]);
    return out;
}

Coverage coverage(const Predictors& p, const Circuit& c) {
    const std::size_t n = c.inputs.size();
    if (n > 20) fail(ErrorCode::TooManyInputs, "reachability needs n <= 20");
    std::vector<std::array<std::uint8_t, 4>> reach(c.size(), {0, 0, 0, 0});
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
        const auto val = evaluate_nodes(c, assignment_bits(idx, n));
        for (const auto& g : p)
            if (!g.is_input) reach[g.node][pattern_of(g, val)] = 1;
    }
    Coverage cov;
    for (const auto& g : p) {
        if (g.is_input) continue;
        for (std::size_t k = 0; k < g.pattern_count(); ++k) {
            if (reach[g.node][k]) {
                ++cov.reachable;
                if (g.predict[k]) ++cov.covered;
            }
            if (!g.predict[k]) ++cov.unseen;
        }
    }
    return cov;
}

bool chain_equivalent(const Predictors& p, const Circuit& c) {
    const std::size_t n = c.inputs.size();
    if (n > kMaxExhaustiveInputs) fail(ErrorCode::TooManyInputs, "exhaustive check limited to 24 inputs");
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
        const auto x = assignment_bits(idx, n);
        try {
            if (chain_predict(p, c, x) != evaluate(c, x)) return false;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UncoveredPattern) return false;
            throw;
        }
    }
    return true;
}

std::size_t recovery_sample_size(std::size_t s, double delta) {
    if (s < 1 || !(delta > 0.0 && delta < 1.0)) fail(ErrorCode::InvalidArgument, "need s >= 1 and delta in (0,1)");
    const double k = 4.0 * static_cast<double>(s);
    return static_cast<std::size_t>(std::ceil(k * std::log(k / delta)));
}

namespace {

std::size_t gate_count(const Circuit& c) {
    std::size_t s = 0;
    for (const auto& g : c.nodes)
        if (g.kind != GateKind::Input) ++s;
    return s;
}

}  // namespace

Curve sample_complexity_curve(const Circuit& c, std::span<const double> deltas, const CurveOptions& opts) {
    require_valid(c);
    if (opts.trials < 10) fail(ErrorCode::InvalidArgument, "need at least 10 trials");
    for (double d : deltas)
        if (!(d > 0.0 && d < 1.0)) fail(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
    Curve curve;
    curve.circuit = c.name;
    curve.s = gate_count(c);
    curve.trials = opts.trials;
    curve.seed = opts.seed;

    for (std::size_t t = 0; t < opts.trials; ++t) {
        // grow the dataset by doubling, then binary search the prefix length
        TraceDataset ds = generate_dataset(c, 1, opts.seed + t);
        auto ok = [&](std::size_t N) {
            if (ds.samples.size() < N) ds = generate_dataset(c, N, opts.seed + t);
            return chain_equivalent(fit_prefix(c, ds, N), c);
        };
        std::size_t hi = 1;
        while (hi < opts.max_samples && !ok(hi)) hi = std::min(hi * 2, opts.max_samples);
        if (!ok(hi)) {
            curve.per_trial_N.push_back(opts.max_samples + 1);
            continue;
        }
        std::size_t lo = hi / 2;   // ok(lo) is false or lo == 0
        while (hi - lo > 1) {
            const auto mid = lo + (hi - lo) / 2;
            (ok(mid) ? hi : lo) = mid;
        }
        curve.per_trial_N.push_back(hi);
    }

    auto sorted = curve.per_trial_N;
    std::sort(sorted.begin(), sorted.end());
    const double s = static_cast<double>(curve.s);
    for (double d : deltas) {
        CurveRow row;
        row.delta = d;
        const auto need = static_cast<std::size_t>(std::ceil((1.0 - d) * static_cast<double>(opts.trials) - 1e-9));
        const auto idx = std::max<std::size_t>(need, 1) - 1;
        row.N = sorted[idx];
        row.capped = row.N > opts.max_samples;
        if (row.capped) row.N = opts.max_samples;
        row.reference = s * std::log(s / d);
        row.coupon_reference = 4.0 * s * std::log(4.0 * s / d);
        curve.rows.push_back(row);
    }
    return curve;
}

TrialSummary recovery_trials(const Circuit& c, std::size_t N, std::size_t trials, std::uint64_t seed) {
    TrialSummary r;
    r.trials = trials;
    r.N = N;
    r.seed = seed;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto ds = generate_dataset(c, N, seed + t);
        if (chain_equivalent(fit(c, ds), c)) ++r.successes;
    }
    return r;
}

std::string dataset_to_jsonl(const TraceDataset& ds) {
    std::ostringstream os;
    os << json{{"circuit", ds.circuit}, {"nodes", ds.nodes}, {"seed", ds.seed}, {"distribution", ds.distribution},
               {"samples", ds.samples.size()}}
              .dump()
       << '\n';
    for (const auto& seq : ds.samples) {
        json row = json::array();
        for (auto b : seq) row.push_back(static_cast<int>(b));
        os << row.dump() << '\n';
    }
    return os.str();
}

TraceDataset dataset_from_jsonl(const std::string& text) {
    TraceDataset ds;
    std::istringstream is(text);
    std::string line;
    bool header = false;
    try {
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto j = json::parse(line);
            if (j.is_object()) {
                ds.circuit = j.value("circuit", std::string());
                ds.nodes = j.at("nodes").get<std::size_t>();
                ds.seed = j.value("seed", std::uint64_t{0});
                ds.distribution = j.value("distribution", std::string("uniform"));
                header = true;
                continue;
            }
            std::vector<std::uint8_t> seq;
            for (const auto& b : j) {
                const int v = b.get<int>();
                if (v != 0 && v != 1) fail(ErrorCode::Parse, "token outside {0,1}");
                seq.push_back(static_cast<std::uint8_t>(v));
            }
            if (!header) ds.nodes = seq.size();
            if (seq.size() != ds.nodes) fail(ErrorCode::Parse, "sequence length differs from node count");
            ds.samples.push_back(std::move(seq));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("dataset: ") + e.what());
    }
    return ds;
}

json predictors_to_json(const Predictors& ps) {
    json out = json::array();
    for (const auto& g : ps) {
        if (g.is_input) continue;
        json table = json::array();
        for (std::size_t p = 0; p < g.pattern_count(); ++p) {
            json row{{"pattern", pattern_string(p, g.fan_in.size())},
                     {"count0", g.counts[p][0]},
                     {"count1", g.counts[p][1]}};
            row["predict"] = g.predict[p] ? json(static_cast<int>(*g.predict[p])) : json(nullptr);
            table.push_back(std::move(row));
        }
        out.push_back(json{{"node", g.node}, {"fan_in", g.fan_in}, {"table", std::move(table)}});
    }
    return out;
}

Predictors predictors_from_json(const json& j) {
    try {
        Predictors ps;
        std::size_t max_node = 0;
        for (const auto& jg : j) max_node = std::max<std::size_t>(max_node, jg.at("node").get<std::size_t>() + 1);
        ps.resize(max_node);
        for (NodeId v = 0; v < max_node; ++v) {
            ps[v].node = v;
            ps[v].is_input = true;
        }
        for (const auto& jg : j) {
            auto& g = ps[jg.at("node").get<std::size_t>()];
            g.is_input = false;
            g.fan_in = jg.at("fan_in").get<std::vector<NodeId>>();
            if (g.fan_in.size() > 2) fail(ErrorCode::ArityMismatch, "fan-in above 2");
            const auto& table = jg.at("table");
            if (table.size() != g.pattern_count()) fail(ErrorCode::Parse, "table size differs from 2^fan_in");
            for (std::size_t p = 0; p < table.size(); ++p) {
                g.counts[p] = {table[p].at("count0").get<std::uint64_t>(), table[p].at("count1").get<std::uint64_t>()};
            }
        }
        finalize(ps);
        return ps;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("predictors: ") + e.what());
    }
}

json curve_to_json(const Curve& c) {
    json rows = json::array();
    for (const auto& r : c.rows)
        rows.push_back(json{{"delta", r.delta},
                            {"N", r.N},
                            {"capped", r.capped},
                            {"reference", r.reference},
                            {"coupon_reference", r.coupon_reference}});
    return json{{"circuit", c.circuit}, {"s", c.s},           {"trials", c.trials},
                {"seed", c.seed},       {"per_trial_N", c.per_trial_N}, {"rows", std::move(rows)}};
}

}  // namespace sparsec
