#include "circuit.hpp"

#include <algorithm>
#include <bit>
#include <thread>

#include "error.hpp"

namespace sparsec {

const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::Input: return "INPUT";
        case GateKind::Const0: return "CONST0";
        case GateKind::Const1: return "CONST1";
        case GateKind::Not: return "NOT";
        case GateKind::And2: return "AND2";
        case GateKind::Or2: return "OR2";
        case GateKind::Xor2: return "XOR2";
    }
    return "?";
}

std::optional<GateKind> parse_gate_kind(const std::string& s) {
    for (auto k : {GateKind::Input, GateKind::Const0, GateKind::Const1, GateKind::Not, GateKind::And2, GateKind::Or2,
                   GateKind::Xor2}) {
        if (s == gate_kind_name(k)) return k;
    }
    return std::nullopt;
}

std::size_t gate_arity(GateKind k) {
    switch (k) {
        case GateKind::Input:
        case GateKind::Const0:
        case GateKind::Const1: return 0;
        case GateKind::Not: return 1;
        default: return 2;
    }
}

const char* violation_rule_name(ViolationRule r) {
    switch (r) {
        case ViolationRule::ArityViolation: return "ArityViolation";
        case ViolationRule::CycleOrOrderViolation: return "CycleOrOrderViolation";
        case ViolationRule::DanglingReference: return "DanglingReference";
        case ViolationRule::BadInputList: return "BadInputList";
        case ViolationRule::BadOutput: return "BadOutput";
    }
    return "?";
}

// ---------------------------------------------------------------- builder

CircuitBuilder::CircuitBuilder(std::string name, bool fold_constants) : fold_(fold_constants) {
    circuit_.name = std::move(name);
}

NodeId CircuitBuilder::push(GateKind kind, std::vector<NodeId> fan_in) {
    const auto id = static_cast<NodeId>(circuit_.nodes.size());
    circuit_.nodes.push_back(Gate{kind, std::move(fan_in)});
    return id;
}

NodeId CircuitBuilder::input() {
    const auto id = push(GateKind::Input, {});
    circuit_.inputs.push_back(id);
    return id;
}

NodeId CircuitBuilder::constant(bool value) {
    auto& slot = const_[value ? 1 : 0];
    if (!slot) slot = push(value ? GateKind::Const1 : GateKind::Const0, {});
    return *slot;
}

std::optional<bool> CircuitBuilder::constant_value(NodeId id) const {
    const auto kind = circuit_.nodes.at(id).kind;
    if (kind == GateKind::Const0) return false;
    if (kind == GateKind::Const1) return true;
    return std::nullopt;
}

NodeId CircuitBuilder::not_(NodeId a) {
    if (fold_) {
        if (auto v = constant_value(a)) return constant(!*v);
        const auto& g = circuit_.nodes[a];
        if (g.kind == GateKind::Not) return g.fan_in[0];
    }
    return push(GateKind::Not, {a});
}

NodeId CircuitBuilder::and_(NodeId a, NodeId b) {
    if (fold_) {
        const auto ca = constant_value(a), cb = constant_value(b);
        if ((ca && !*ca) || (cb && !*cb)) return constant(false);
        if (ca) return b;
        if (cb) return a;
        if (a == b) return a;
    }
    return push(GateKind::And2, {a, b});
}

NodeId CircuitBuilder::or_(NodeId a, NodeId b) {
    if (fold_) {
        const auto ca = constant_value(a), cb = constant_value(b);
        if ((ca && *ca) || (cb && *cb)) return constant(true);
        if (ca) return b;
        if (cb) return a;
        if (a == b) return a;
    }
    return push(GateKind::Or2, {a, b});
}

NodeId CircuitBuilder::xor_(NodeId a, NodeId b) {
    if (fold_) {
        const auto ca = constant_value(a), cb = constant_value(b);
        if (ca && cb) return constant(*ca != *cb);
        if (ca) return *ca ? not_(b) : b;
        if (cb) return *cb ? not_(a) : a;
        if (a == b) return constant(false);
    }
    return push(GateKind::Xor2, {a, b});
}

NodeId CircuitBuilder::gate(GateKind kind, std::span<const NodeId> fan_in) {
    if (fan_in.size() != gate_arity(kind)) fail(ErrorCode::ArityMismatch, "wrong fan-in count for gate");
    switch (kind) {
        case GateKind::Input: return input();
        case GateKind::Const0: return constant(false);
        case GateKind::Const1: return constant(true);
        case GateKind::Not: return not_(fan_in[0]);
        case GateKind::And2: return and_(fan_in[0], fan_in[1]);
        case GateKind::Or2: return or_(fan_in[0], fan_in[1]);
        case GateKind::Xor2: return xor_(fan_in[0], fan_in[1]);
    }
    fail(ErrorCode::Internal, "unknown gate kind");
}

NodeId CircuitBuilder::reduce(GateKind kind, std::span<const NodeId> xs, bool empty_value) {
    if (xs.empty()) return constant(empty_value);
    std::vector<NodeId> level(xs.begin(), xs.end());
    while (level.size() > 1) {
        std::vector<NodeId> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            const NodeId pair[2] = {level[i], level[i + 1]};
            next.push_back(gate(kind, pair));
        }
        if (level.size() % 2) next.push_back(level.back());
        level = std::move(next);
    }
    return level.front();
}

NodeId CircuitBuilder::and_all(std::span<const NodeId> xs) { return reduce(GateKind::And2, xs, true); }
NodeId CircuitBuilder::or_all(std::span<const NodeId> xs) { return reduce(GateKind::Or2, xs, false); }
NodeId CircuitBuilder::xor_all(std::span<const NodeId> xs) { return reduce(GateKind::Xor2, xs, false); }

Circuit CircuitBuilder::finish() && { return std::move(circuit_); }

// ------------------------------------------------------------- validation

std::vector<Violation> validate(const Circuit& c) {
    std::vector<Violation> out;
    const auto n = c.nodes.size();
    for (NodeId id = 0; id < n; ++id) {
        const auto& g = c.nodes[id];
        if (g.fan_in.size() != gate_arity(g.kind)) {
            out.push_back({id, ViolationRule::ArityViolation,
                           std::string(gate_kind_name(g.kind)) + " has " + std::to_string(g.fan_in.size()) +
                               " fan-in ids"});
        }
        for (auto f : g.fan_in) {
            if (f >= n) {
                out.push_back({id, ViolationRule::DanglingReference, "fan-in id " + std::to_string(f) + " does not exist"});
            } else if (f >= id) {
                out.push_back({id, ViolationRule::CycleOrOrderViolation,
                               "fan-in id " + std::to_string(f) + " is not before node " + std::to_string(id)});
            }
        }
    }
    std::vector<int> listed(n, 0);
    for (auto i : c.inputs) {
        if (i >= n || c.nodes[i].kind != GateKind::Input) {
            out.push_back({i, ViolationRule::BadInputList, "input list entry is not an INPUT node"});
        } else if (++listed[i] > 1) {
            out.push_back({i, ViolationRule::BadInputList, "INPUT node listed twice"});
        }
    }
    for (NodeId id = 0; id < n; ++id) {
        if (c.nodes[id].kind == GateKind::Input && listed[id] == 0) {
            out.push_back({id, ViolationRule::BadInputList, "INPUT node missing from the input list"});
        }
    }
    for (auto o : c.outputs) {
        if (o >= n) out.push_back({o, ViolationRule::BadOutput, "output references a missing node"});
    }
    return out;
}

void require_valid(const Circuit& c) {
    const auto violations = validate(c);
    if (violations.empty()) return;
    for (const auto& v : violations) {
        if (v.rule == ViolationRule::CycleOrOrderViolation) {
            fail(ErrorCode::CyclicGraph, "node " + std::to_string(v.node) + ": " + v.detail);
        }
    }
    const auto& v = violations.front();
    fail(ErrorCode::InvalidArgument,
         std::string(violation_rule_name(v.rule)) + " at node " + std::to_string(v.node) + ": " + v.detail);
}

// -------------------------------------------------------------- evaluation

std::vector<std::uint8_t> evaluate_nodes(const Circuit& c, std::span<const std::uint8_t> input) {
    if (input.size() != c.inputs.size()) {
        fail(ErrorCode::ArityMismatch, "expected " + std::to_string(c.inputs.size()) + " input bits, got " +
                                           std::to_string(input.size()));
    }
    std::vector<std::uint8_t> v(c.nodes.size(), 0);
    for (std::size_t i = 0; i < input.size(); ++i) v[c.inputs[i]] = input[i] ? 1 : 0;
    for (NodeId id = 0; id < c.nodes.size(); ++id) {
        const auto& g = c.nodes[id];
        switch (g.kind) {
            case GateKind::Input: break;
            case GateKind::Const0: v[id] = 0; break;
            case GateKind::Const1: v[id] = 1; break;
            case GateKind::Not: v[id] = v[g.fan_in[0]] ^ 1; break;
            case GateKind::And2: v[id] = v[g.fan_in[0]] & v[g.fan_in[1]]; break;
            case GateKind::Or2: v[id] = v[g.fan_in[0]] | v[g.fan_in[1]]; break;
            case GateKind::Xor2: v[id] = v[g.fan_in[0]] ^ v[g.fan_in[1]]; break;
        }
    }
    return v;
}

std::vector<std::uint8_t> evaluate(const Circuit& c, std::span<const std::uint8_t> input) {
    const auto v = evaluate_nodes(c, input);
    std::vector<std::uint8_t> out;
    out.reserve(c.outputs.size());
    for (auto o : c.outputs) out.push_back(v[o]);
    return out;
}

std::vector<std::uint64_t> evaluate_packed(const Circuit& c, std::span<const std::uint64_t> input_words) {
    if (input_words.size() != c.inputs.size()) fail(ErrorCode::ArityMismatch, "packed input width mismatch");
    std::vector<std::uint64_t> v(c.nodes.size(), 0);
    for (std::size_t i = 0; i < input_words.size(); ++i) v[c.inputs[i]] = input_words[i];
    for (NodeId id = 0; id < c.nodes.size(); ++id) {
        const auto& g = c.nodes[id];
        switch (g.kind) {
            case GateKind::Input: break;
            case GateKind::Const0: v[id] = 0; break;
            case GateKind::Const1: v[id] = ~std::uint64_t{0}; break;
            case GateKind::Not: v[id] = ~v[g.fan_in[0]]; break;
            case GateKind::And2: v[id] = v[g.fan_in[0]] & v[g.fan_in[1]]; break;
            case GateKind::Or2: v[id] = v[g.fan_in[0]] | v[g.fan_in[1]]; break;
            case GateKind::Xor2: v[id] = v[g.fan_in[0]] ^ v[g.fan_in[1]]; break;
        }
    }
    return v;
}

std::vector<std::size_t> node_depths(const Circuit& c) {
    std::vector<std::size_t> depth(c.nodes.size(), 0);
    for (NodeId id = 0; id < c.nodes.size(); ++id) {
        const auto& g = c.nodes[id];
        if (g.fan_in.empty()) continue;
        std::size_t d = 0;
        for (auto f : g.fan_in) d = std::max(d, depth[f]);
        depth[id] = d + 1;
    }
    return depth;
}

SparsityCertificate certify_sparsity(const Circuit& c) {
    require_valid(c);
    SparsityCertificate cert;
    for (const auto& g : c.nodes) {
        cert.k = std::max(cert.k, g.fan_in.size());
        if (g.kind != GateKind::Input) ++cert.s;
    }
    const auto depth = node_depths(c);
    for (auto o : c.outputs) cert.L = std::max(cert.L, depth[o]);
    cert.input_bits = c.inputs.size();
    cert.output_bits = c.outputs.size();
    return cert;
}

std::size_t max_level_width(const Circuit& c) {
    const auto depth = node_depths(c);
    std::size_t top = 0;
    for (auto d : depth) top = std::max(top, d);
    std::vector<std::size_t> last_use(c.nodes.size(), 0);
    for (NodeId id = 0; id < c.nodes.size(); ++id) {
        last_use[id] = depth[id];
        for (auto f : c.nodes[id].fan_in) last_use[f] = std::max(last_use[f], depth[id]);
    }
    for (auto o : c.outputs) last_use[o] = top + 1;
    // alive[l] counts wires w with depth[w] < l <= last_use[w]
    std::vector<long long> diff(top + 3, 0);
    std::vector<std::size_t> gates_at(top + 2, 0);
    for (NodeId id = 0; id < c.nodes.size(); ++id) {
        if (last_use[id] > depth[id]) {
            diff[depth[id] + 1] += 1;
            diff[last_use[id] + 1] -= 1;
        }
        if (!c.nodes[id].fan_in.empty()) ++gates_at[depth[id]];
    }
    std::size_t best = 0;
    long long alive = 0;
    for (std::size_t l = 0; l <= top + 1; ++l) {
        alive += diff[l];
        best = std::max(best, static_cast<std::size_t>(alive) + gates_at[l]);
    }
    return best;
}

std::vector<std::uint8_t> assignment_bits(std::uint64_t index, std::size_t n) {
    std::vector<std::uint8_t> bits(n);
    for (std::size_t k = 0; k < n; ++k) bits[k] = (index >> (n - 1 - k)) & 1;
    return bits;
}

namespace {

// Lane patterns for the six least significant assignment bits.
constexpr std::uint64_t kLanePattern[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                                           0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};

std::optional<std::uint64_t> first_difference(const Circuit& a, const Circuit& b, std::uint64_t begin,
                                              std::uint64_t end) {
    const auto n = a.inputs.size();
    std::vector<std::uint64_t> words(n);
    for (std::uint64_t base = begin; base < end; base += 64) {
        for (std::size_t k = 0; k < n; ++k) {
            const auto shift = n - 1 - k;
            words[k] = shift < 6 ? kLanePattern[shift] : (((base >> shift) & 1) ? ~std::uint64_t{0} : 0);
        }
        const auto va = evaluate_packed(a, words);
        const auto vb = evaluate_packed(b, words);
        const auto lanes = std::min<std::uint64_t>(64, end - base);
        const std::uint64_t valid = lanes == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << lanes) - 1);
        std::uint64_t diff = 0;
        for (std::size_t o = 0; o < a.outputs.size(); ++o) diff |= va[a.outputs[o]] ^ vb[b.outputs[o]];
        diff &= valid;
        if (diff) return base + static_cast<std::uint64_t>(std::countr_zero(diff));
    }
    return std::nullopt;
}

}  // namespace

EquivalenceResult brute_force_equiv(const Circuit& a, const Circuit& b) {
    require_valid(a);
    require_valid(b);
    if (a.inputs.size() != b.inputs.size() || a.outputs.size() != b.outputs.size()) {
        fail(ErrorCode::ArityMismatch, "circuits differ in input or output count");
    }
    const auto n = a.inputs.size();
    if (n > kMaxExhaustiveInputs) {
        fail(ErrorCode::TooManyInputs, std::to_string(n) + " inputs exceed the exhaustive limit of " +
                                           std::to_string(kMaxExhaustiveInputs));
    }
    const std::uint64_t total = std::uint64_t{1} << n;

    // Disjoint 64-aligned ranges per worker; the smallest counterexample wins.
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = total >= (1u << 16) ? std::min(hw, 8u) : 1u;
    std::vector<std::optional<std::uint64_t>> found(workers);
    if (workers == 1) {
        found[0] = first_difference(a, b, 0, total);
    } else {
        const std::uint64_t chunk = ((total / workers + 63) / 64) * 64;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            const auto lo = std::min(total, w * chunk), hi = std::min(total, (w + 1) * chunk);
            pool.emplace_back([&, w, lo, hi] { found[w] = first_difference(a, b, lo, hi); });
        }
        for (auto& t : pool) t.join();
    }
    EquivalenceResult r;
    for (const auto& f : found) {
        if (f) {
            r.equivalent = false;
            r.counterexample = assignment_bits(*f, n);
            break;
        }
    }
    return r;
}

Circuit desugar_xor(const Circuit& c) {
    require_valid(c);
    CircuitBuilder b(c.name, false);
    std::vector<NodeId> map(c.nodes.size());
    for (NodeId id = 0; id < c.nodes.size(); ++id) {
        const auto& g = c.nodes[id];
        switch (g.kind) {
            case GateKind::Input: map[id] = b.input(); break;
            case GateKind::Const0: map[id] = b.constant(false); break;
            case GateKind::Const1: map[id] = b.constant(true); break;
            case GateKind::Not: map[id] = b.not_(map[g.fan_in[0]]); break;
            case GateKind::And2: map[id] = b.and_(map[g.fan_in[0]], map[g.fan_in[1]]); break;
            case GateKind::Or2: map[id] = b.or_(map[g.fan_in[0]], map[g.fan_in[1]]); break;
            case GateKind::Xor2: {
                const auto x = map[g.fan_in[0]], y = map[g.fan_in[1]];
                map[id] = b.and_(b.or_(x, y), b.not_(b.and_(x, y)));
                break;
            }
        }
    }
    for (auto o : c.outputs) b.output(map[o]);
    return std::move(b).finish();
}

// -------------------------------------------------------------------- JSON

Circuit circuit_from_json(const nlohmann::json& j) {
    Circuit c;
    try {
        c.name = j.value("name", std::string("circuit"));
        for (const auto& node : j.at("nodes")) {
            const auto kind_name = node.at("kind").get<std::string>();
            const auto kind = parse_gate_kind(kind_name);
            if (!kind) fail(ErrorCode::Parse, "unknown gate kind '" + kind_name + "'");
            Gate g{*kind, {}};
            if (node.contains("fan_in")) g.fan_in = node.at("fan_in").get<std::vector<NodeId>>();
            c.nodes.push_back(std::move(g));
        }
        c.inputs = j.at("inputs").get<std::vector<NodeId>>();
        c.outputs = j.at("outputs").get<std::vector<NodeId>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("circuit JSON: ") + e.what());
    }
    return c;
}

nlohmann::json circuit_to_json(const Circuit& c) {
    nlohmann::json j;
    j["name"] = c.name;
    auto nodes = nlohmann::json::array();
    for (const auto& g : c.nodes) nodes.push_back({{"kind", gate_kind_name(g.kind)}, {"fan_in", g.fan_in}});
    j["nodes"] = std::move(nodes);
    j["inputs"] = c.inputs;
    j["outputs"] = c.outputs;
    return j;
}

nlohmann::json certificate_to_json(const SparsityCertificate& cert) {
    return {{"k", cert.k}, {"s", cert.s}, {"L", cert.L}, {"input_bits", cert.input_bits},
            {"output_bits", cert.output_bits}};
}

// ------------------------------------------------------------------ corpus

namespace circuits {

Circuit single_gate(GateKind kind) {
    CircuitBuilder b(gate_kind_name(kind), false);
    std::vector<NodeId> ins;
    for (std::size_t i = 0; i < gate_arity(kind); ++i) ins.push_back(b.input());
    b.output(b.gate(kind, ins));
    return std::move(b).finish();
}

Circuit and_tree(std::size_t n) {
    CircuitBuilder b("and_tree_" + std::to_string(n), false);
    std::vector<NodeId> ins;
    for (std::size_t i = 0; i < n; ++i) ins.push_back(b.input());
    b.output(b.and_all(ins));
    return std::move(b).finish();
}

Circuit parity_tree(std::size_t n) {
    CircuitBuilder b("parity_tree_" + std::to_string(n), false);
    std::vector<NodeId> ins;
    for (std::size_t i = 0; i < n; ++i) ins.push_back(b.input());
    b.output(b.xor_all(ins));
    return std::move(b).finish();
}

Circuit ripple_adder(std::size_t n) {
    CircuitBuilder b("ripple_adder_" + std::to_string(n), false);
    std::vector<NodeId> a(n), bb(n);
    for (std::size_t i = 0; i < n; ++i) a[n - 1 - i] = b.input();   // a[k] has weight 2^k
    for (std::size_t i = 0; i < n; ++i) bb[n - 1 - i] = b.input();
    std::vector<NodeId> sum(n);
    std::optional<NodeId> carry;
    for (std::size_t k = 0; k < n; ++k) {
        const auto p = b.xor_(a[k], bb[k]);
        const auto g = b.and_(a[k], bb[k]);
        if (!carry) {
            sum[k] = p;
            carry = g;
        } else {
            sum[k] = b.xor_(p, *carry);
            carry = b.or_(g, b.and_(*carry, p));
        }
    }
    b.output(*carry);
    for (std::size_t k = n; k-- > 0;) b.output(sum[k]);
    return std::move(b).finish();
}

Circuit ripple_adder2() {
    auto c = ripple_adder(2);
    c.name = "ripple_adder_2";
    return c;
}

}  // namespace circuits

}  // namespace sparsec
