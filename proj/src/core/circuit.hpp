#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace sparsec {

using NodeId = std::uint32_t;

enum class GateKind : std::uint8_t { Input, Const0, Const1, Not, And2, Or2, Xor2 };

const char* gate_kind_name(GateKind k);
std::optional<GateKind> parse_gate_kind(const std::string& s);
std::size_t gate_arity(GateKind k);

struct Gate {
    GateKind kind = GateKind::Input;
    std::vector<NodeId> fan_in;
};

/// Bounded-fan-in Boolean DAG. Nodes are stored in topological order and
/// every fan-in id is strictly smaller than the id of the node reading it.
struct Circuit {
    std::string name;
    std::vector<Gate> nodes;
    std::vector<NodeId> inputs;
    std::vector<NodeId> outputs;

    std::size_t size() const { return nodes.size(); }
};

struct SparsityCertificate {
    std::size_t k = 0;             // max fan-in
    std::size_t s = 0;             // non-INPUT nodes
    std::size_t L = 0;             // longest input-to-output path
    std::size_t input_bits = 0;
    std::size_t output_bits = 0;
};

enum class ViolationRule { ArityViolation, CycleOrOrderViolation, DanglingReference, BadInputList, BadOutput };

struct Violation {
    NodeId node = 0;
    ViolationRule rule = ViolationRule::ArityViolation;
    std::string detail;
};

const char* violation_rule_name(ViolationRule r);

struct EquivalenceResult {
    bool equivalent = true;
    std::vector<std::uint8_t> counterexample;  // set when !equivalent
};

/// Appends gates to a circuit. With folding on, gates whose value is fixed by
/// constant operands (or repeated operands) collapse to an existing node.
class CircuitBuilder {
public:
    explicit CircuitBuilder(std::string name = "circuit", bool fold_constants = true);

    NodeId input();
    NodeId constant(bool value);
    NodeId not_(NodeId a);
    NodeId and_(NodeId a, NodeId b);
    NodeId or_(NodeId a, NodeId b);
    NodeId xor_(NodeId a, NodeId b);
    NodeId gate(GateKind kind, std::span<const NodeId> fan_in);

    /// Balanced fan-in-2 reductions; empty spans give the identity element.
    NodeId and_all(std::span<const NodeId> xs);
    NodeId or_all(std::span<const NodeId> xs);
    NodeId xor_all(std::span<const NodeId> xs);

    std::optional<bool> constant_value(NodeId id) const;

    void output(NodeId id) { circuit_.outputs.push_back(id); }
    const Circuit& peek() const { return circuit_; }
    Circuit finish() &&;

private:
    NodeId push(GateKind kind, std::vector<NodeId> fan_in);
    NodeId reduce(GateKind kind, std::span<const NodeId> xs, bool empty_value);

    Circuit circuit_;
    bool fold_;
    std::optional<NodeId> const_[2];
};

std::vector<Violation> validate(const Circuit& c);

/// Throws CyclicGraph (order violations) or InvalidArgument (other violations).
void require_valid(const Circuit& c);

std::vector<std::uint8_t> evaluate(const Circuit& c, std::span<const std::uint8_t> input);

/// Value of every node, indexed by node id.
std::vector<std::uint8_t> evaluate_nodes(const Circuit& c, std::span<const std::uint8_t> input);

/// 64 input assignments at once; lane b of word i is input i of assignment b.
/// Returns one word per node, indexed by node id.
std::vector<std::uint64_t> evaluate_packed(const Circuit& c, std::span<const std::uint64_t> input_words);

/// Depth of every node (inputs and constants at depth 0).
std::vector<std::size_t> node_depths(const Circuit& c);

SparsityCertificate certify_sparsity(const Circuit& c);

/// Max number of wires alive across any depth level cut, plus the gates on it.
std::size_t max_level_width(const Circuit& c);

inline constexpr std::size_t kMaxExhaustiveInputs = 24;

/// Exhaustive comparison; the counterexample is lexicographically first with
/// input 0 as the most significant position.
EquivalenceResult brute_force_equiv(const Circuit& a, const Circuit& b);

/// Replaces every XOR2 by AND/OR/NOT gates.
Circuit desugar_xor(const Circuit& c);

/// Assignment index -> bit vector in lexicographic order (position 0 is the MSB).
std::vector<std::uint8_t> assignment_bits(std::uint64_t index, std::size_t n);

Circuit circuit_from_json(const nlohmann::json& j);
nlohmann::json circuit_to_json(const Circuit& c);
nlohmann::json certificate_to_json(const SparsityCertificate& cert);

namespace circuits {

Circuit single_gate(GateKind kind);
/// Balanced AND tree over n inputs.
Circuit and_tree(std::size_t n);
/// Balanced XOR tree over n inputs.
Circuit parity_tree(std::size_t n);
/// Inputs a1 a0 b1 b0 (most significant first); outputs s2 s1 s0.
Circuit ripple_adder2();
/// n-bit ripple adder; inputs a (MSB first) then b; outputs n+1 sum bits MSB first.
Circuit ripple_adder(std::size_t n);

}  // namespace circuits

}  // namespace sparsec
