#include "ltf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>

#include "error.hpp"

namespace sparsec {

std::size_t LtfCircuit::r_max() const {
    std::size_t r = 0;
    for (const auto& n : nodes) {
        if (n.kind == LtfKind::Threshold) r = std::max(r, n.fan_in.size());
    }
    return r;
}

void require_valid(const LtfCircuit& l, std::int64_t weight_limit) {
    std::vector<int> listed(l.nodes.size(), 0);
    for (NodeId id = 0; id < l.nodes.size(); ++id) {
        const auto& n = l.nodes[id];
        if (n.kind != LtfKind::Threshold) {
            if (!n.fan_in.empty()) fail(ErrorCode::InvalidArgument, "node " + std::to_string(id) + " has fan-in");
            continue;
        }
        if (n.fan_in.empty()) fail(ErrorCode::InvalidArgument, "threshold node " + std::to_string(id) + " has r = 0");
        if (n.fan_in.size() != n.weights.size()) {
            fail(ErrorCode::ArityMismatch, "threshold node " + std::to_string(id) + " has mismatched weights");
        }
        for (auto f : n.fan_in) {
            if (f >= id) fail(ErrorCode::CyclicGraph, "threshold node " + std::to_string(id) + " reads a later node");
        }
        for (auto w : n.weights) {
            if (std::llabs(w) > weight_limit) {
                fail(ErrorCode::WeightOverflow, "weight " + std::to_string(w) + " exceeds W_max");
            }
        }
    }
    for (auto i : l.inputs) {
        if (i >= l.nodes.size() || l.nodes[i].kind != LtfKind::Input || listed[i]++) {
            fail(ErrorCode::InvalidArgument, "bad input list entry " + std::to_string(i));
        }
    }
    for (NodeId id = 0; id < l.nodes.size(); ++id) {
        if (l.nodes[id].kind == LtfKind::Input && !listed[id]) {
            fail(ErrorCode::InvalidArgument, "INPUT node " + std::to_string(id) + " missing from the input list");
        }
    }
    for (auto o : l.outputs) {
        if (o >= l.nodes.size()) fail(ErrorCode::InvalidArgument, "output references a missing node");
    }
}

LtfCircuit bool_to_ltf(const Circuit& c) {
    const auto plain = desugar_xor(c);
    LtfCircuit l;
    l.name = c.name + "_ltf";
    l.inputs = plain.inputs;
    l.outputs = plain.outputs;
    l.nodes.reserve(plain.nodes.size());
    for (const auto& g : plain.nodes) {
        LtfNode n;
        switch (g.kind) {
            case GateKind::Input: n.kind = LtfKind::Input; break;
            case GateKind::Const0:
            case GateKind::Const1:
                n.kind = LtfKind::Const;
                n.value = g.kind == GateKind::Const1;
                break;
            case GateKind::Not: n = {LtfKind::Threshold, {-1}, 0, g.fan_in, false}; break;
            case GateKind::And2: n = {LtfKind::Threshold, {1, 1}, 2, g.fan_in, false}; break;
            case GateKind::Or2: n = {LtfKind::Threshold, {1, 1}, 1, g.fan_in, false}; break;
            case GateKind::Xor2: fail(ErrorCode::Internal, "XOR2 survived desugaring");
        }
        l.nodes.push_back(std::move(n));
    }
    return l;
}

std::vector<std::uint8_t> ltf_evaluate(const LtfCircuit& l, std::span<const std::uint8_t> input) {
    if (input.size() != l.inputs.size()) fail(ErrorCode::ArityMismatch, "wrong number of input bits");
    std::vector<std::uint8_t> v(l.nodes.size(), 0);
    for (std::size_t i = 0; i < input.size(); ++i) v[l.inputs[i]] = input[i] ? 1 : 0;
    for (NodeId id = 0; id < l.nodes.size(); ++id) {
        const auto& n = l.nodes[id];
        if (n.kind == LtfKind::Const) {
            v[id] = n.value;
        } else if (n.kind == LtfKind::Threshold) {
            std::int64_t sum = 0;
            for (std::size_t i = 0; i < n.fan_in.size(); ++i) sum += n.weights[i] * v[n.fan_in[i]];
            v[id] = sum >= n.theta;
        }
    }
    std::vector<std::uint8_t> out;
    for (auto o : l.outputs) out.push_back(v[o]);
    return out;
}

NodeId lower_threshold(CircuitBuilder& b, std::span<const NodeId> inputs, std::span<const std::int64_t> weights,
                       std::int64_t theta, const LowerOptions& opts) {
    if (inputs.size() != weights.size()) fail(ErrorCode::ArityMismatch, "weights and fan-in differ in length");
    std::int64_t total = 0, negative = 0;
    const std::int64_t word_limit = std::int64_t{1} << (opts.word_bits - 1);
    for (auto w : weights) {
        if (std::llabs(w) > opts.weight_limit) fail(ErrorCode::WeightOverflow, "weight exceeds W_max");
        total += std::llabs(w);
        if (w < 0) negative += -w;
        if (total >= word_limit) fail(ErrorCode::WeightOverflow, "sum of |w| exceeds the configured word width");
    }
    if (std::llabs(theta) >= word_limit) fail(ErrorCode::WeightOverflow, "threshold exceeds the configured word width");

    // S' = sum w+ x + sum |w-| (1 - x) ranges over [0, total]; compare against theta + |w-|.
    const std::int64_t shifted = theta + negative;
    if (shifted <= 0) return b.constant(true);
    if (shifted > total) return b.constant(false);

    // 2^width > total, so S' + (2^width - shifted) has bit `width` set iff S' >= shifted.
    const unsigned width = static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(total)));
    std::vector<std::vector<NodeId>> cols(width + 1);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto w = weights[i];
        if (w == 0) continue;
        const NodeId term = w > 0 ? inputs[i] : b.not_(inputs[i]);
        const auto mag = static_cast<std::uint64_t>(std::llabs(w));
        if (mag < 8) {
            for (std::uint64_t k = 0; k < mag; ++k) cols[0].push_back(term);
        } else {
            for (unsigned k = 0; k <= width; ++k) {
                if ((mag >> k) & 1) cols[k].push_back(term);
            }
        }
    }
    const auto offset = (std::uint64_t{1} << width) - static_cast<std::uint64_t>(shifted);
    for (unsigned k = 0; k < width; ++k) {
        if ((offset >> k) & 1) cols[k].push_back(b.constant(true));
    }

    auto keep = [&](std::vector<NodeId>& col, NodeId id) {
        if (auto v = b.constant_value(id); v && !*v) return;
        col.push_back(id);
    };

    // Carry-save reduction: full adders on triples until every column holds at most two bits.
    auto tallest = [&] {
        std::size_t h = 0;
        for (const auto& c : cols) h = std::max(h, c.size());
        return h;
    };
    while (tallest() > 2) {
        std::vector<std::vector<NodeId>> next(width + 1);
        for (unsigned k = 0; k <= width; ++k) {
            const auto& col = cols[k];
            std::size_t i = 0;
            for (; i + 3 <= col.size(); i += 3) {
                const auto x = col[i], y = col[i + 1], z = col[i + 2];
                const auto p = b.xor_(x, y);
                keep(next[k], b.xor_(p, z));
                if (k < width) keep(next[k + 1], b.or_(b.and_(x, y), b.and_(z, p)));
            }
            for (; i < col.size(); ++i) next[k].push_back(col[i]);
        }
        cols = std::move(next);
    }

    // Ripple the two remaining rows; only the carry into column `width` matters.
    auto bit = [&](unsigned k, std::size_t row) { return row < cols[k].size() ? cols[k][row] : b.constant(false); };
    NodeId carry = b.constant(false);
    for (unsigned k = 0; k < width; ++k) {
        const auto x = bit(k, 0), y = bit(k, 1);
        const auto p = b.xor_(x, y);
        carry = b.or_(b.and_(x, y), b.and_(carry, p));
    }
    return b.xor_(b.xor_(bit(width, 0), bit(width, 1)), carry);
}

Circuit ltf_to_bfi(const LtfCircuit& l, const LowerOptions& opts) {
    require_valid(l, opts.weight_limit);
    CircuitBuilder b(l.name + "_bfi");
    std::vector<NodeId> map(l.nodes.size());
    for (NodeId id = 0; id < l.nodes.size(); ++id) {
        const auto& n = l.nodes[id];
        switch (n.kind) {
            case LtfKind::Input: map[id] = b.input(); break;
            case LtfKind::Const: map[id] = b.constant(n.value); break;
            case LtfKind::Threshold: {
                std::vector<NodeId> ins;
                for (auto f : n.fan_in) ins.push_back(map[f]);
                map[id] = lower_threshold(b, ins, n.weights, n.theta, opts);
                break;
            }
        }
    }
    for (auto o : l.outputs) b.output(map[o]);
    return std::move(b).finish();
}

double lowered_gate_depth_bound(std::size_t r, std::int64_t w_max) {
    const double rw = static_cast<double>(std::max<std::size_t>(r, 1)) * static_cast<double>(std::max<std::int64_t>(w_max, 1));
    return kLowerDepthSlope * std::log2(rw) + kLowerDepthIntercept;
}

double lowered_gate_size_bound(std::size_t r, std::int64_t w_max) {
    const auto w = static_cast<std::uint64_t>(std::max<std::int64_t>(w_max, 1));
    const double per_input = w < 8 ? static_cast<double>(w) : static_cast<double>(std::bit_width(w));
    const double bits = static_cast<double>(r) * per_input;
    const double word = static_cast<double>(std::bit_width(static_cast<std::uint64_t>(r) * w)) + 1.0;
    // full adders consume one bit each, 5 gates apiece; ripple costs 5 gates per column
    return 5.0 * (bits + 2.0 * word) + static_cast<double>(r) + 2.0;
}

std::size_t ltf_depth(const LtfCircuit& l) {
    std::vector<std::size_t> depth(l.nodes.size(), 0);
    std::size_t best = 0;
    for (NodeId id = 0; id < l.nodes.size(); ++id) {
        for (auto f : l.nodes[id].fan_in) depth[id] = std::max(depth[id], depth[f] + 1);
    }
    for (auto o : l.outputs) best = std::max(best, depth[o]);
    return best;
}

RoundtripReport roundtrip_check(const Circuit& c) {
    RoundtripReport r;
    const auto cert = certify_sparsity(c);
    const auto l = bool_to_ltf(c);
    const auto bfi = ltf_to_bfi(l);
    const auto verdict = brute_force_equiv(c, bfi);
    r.equivalent = verdict.equivalent;
    r.counterexample = verdict.counterexample;
    r.bool_size = cert.s;
    r.bool_depth = cert.L;
    r.ltf_size = 0;
    for (const auto& n : l.nodes) {
        if (n.kind != LtfKind::Input) ++r.ltf_size;
        for (auto w : n.weights) r.w_max = std::max<std::int64_t>(r.w_max, std::llabs(w));
    }
    r.ltf_depth = ltf_depth(l);
    r.r_max = l.r_max();
    const auto lowered = certify_sparsity(bfi);
    r.bfi_size = lowered.s;
    r.bfi_depth = lowered.L;
    r.size_inflation = r.bool_size ? static_cast<double>(r.bfi_size) / static_cast<double>(r.bool_size) : 0.0;
    r.depth_inflation = r.bool_depth ? static_cast<double>(r.bfi_depth) / static_cast<double>(r.bool_depth) : 0.0;
    r.size_bound = static_cast<double>(r.ltf_size) * lowered_gate_size_bound(r.r_max, r.w_max);
    r.depth_bound = static_cast<double>(r.ltf_depth) * lowered_gate_depth_bound(r.r_max, r.w_max);
    r.within_bounds = static_cast<double>(r.bfi_size) <= r.size_bound && static_cast<double>(r.bfi_depth) <= r.depth_bound;
    return r;
}

LtfCircuit ltf_from_json(const nlohmann::json& j) {
    LtfCircuit l;
    try {
        l.name = j.value("name", std::string("ltf"));
        for (const auto& node : j.at("nodes")) {
            const auto kind = node.at("kind").get<std::string>();
            LtfNode n;
            if (kind == "INPUT") {
                n.kind = LtfKind::Input;
            } else if (kind == "CONST") {
                n.kind = LtfKind::Const;
                n.value = node.at("value").get<int>() != 0;
            } else if (kind == "LTF") {
                n.kind = LtfKind::Threshold;
                n.weights = node.at("weights").get<std::vector<std::int64_t>>();
                n.theta = node.at("theta").get<std::int64_t>();
                n.fan_in = node.at("fan_in").get<std::vector<NodeId>>();
            } else {
                fail(ErrorCode::Parse, "unknown LTF node kind '" + kind + "'");
            }
            l.nodes.push_back(std::move(n));
        }
        l.inputs = j.at("inputs").get<std::vector<NodeId>>();
        l.outputs = j.at("outputs").get<std::vector<NodeId>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("LTF JSON: ") + e.what());
    }
    return l;
}

nlohmann::json ltf_to_json(const LtfCircuit& l) {
    nlohmann::json j;
    j["name"] = l.name;
    auto nodes = nlohmann::json::array();
    for (const auto& n : l.nodes) {
        switch (n.kind) {
            case LtfKind::Input: nodes.push_back({{"kind", "INPUT"}}); break;
            case LtfKind::Const: nodes.push_back({{"kind", "CONST"}, {"value", n.value ? 1 : 0}}); break;
            case LtfKind::Threshold:
                nodes.push_back({{"kind", "LTF"}, {"weights", n.weights}, {"theta", n.theta}, {"fan_in", n.fan_in}});
                break;
        }
    }
    j["nodes"] = std::move(nodes);
    j["inputs"] = l.inputs;
    j["outputs"] = l.outputs;
    return j;
}

nlohmann::json roundtrip_to_json(const RoundtripReport& r) {
    nlohmann::json j{{"equivalent", r.equivalent},
                     {"bool_size", r.bool_size},
                     {"bool_depth", r.bool_depth},
                     {"ltf_size", r.ltf_size},
                     {"ltf_depth", r.ltf_depth},
                     {"r_max", r.r_max},
                     {"w_max", r.w_max},
                     {"bfi_size", r.bfi_size},
                     {"bfi_depth", r.bfi_depth},
                     {"size_inflation", r.size_inflation},
                     {"depth_inflation", r.depth_inflation},
                     {"size_bound", r.size_bound},
                     {"depth_bound", r.depth_bound},
                     {"within_bounds", r.within_bounds}};
    if (!r.equivalent) j["counterexample"] = r.counterexample;
    return j;
}

LtfCircuit single_ltf(std::vector<std::int64_t> weights, std::int64_t theta) {
    LtfCircuit l;
    l.name = "ltf_gate";
    const auto r = weights.size();
    for (NodeId i = 0; i < r; ++i) {
        l.nodes.push_back(LtfNode{});
        l.inputs.push_back(i);
    }
    LtfNode g{LtfKind::Threshold, std::move(weights), theta, {}, false};
    for (NodeId i = 0; i < r; ++i) g.fan_in.push_back(i);
    l.nodes.push_back(std::move(g));
    l.outputs.push_back(static_cast<NodeId>(r));
    return l;
}

}  // namespace sparsec
