#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"

namespace sparsec {

enum class LtfKind : std::uint8_t { Input, Const, Threshold };

/// Threshold nodes output 1{sum_i weights[i] * x[fan_in[i]] >= theta}.
struct LtfNode {
    LtfKind kind = LtfKind::Input;
    std::vector<std::int64_t> weights;
    std::int64_t theta = 0;
    std::vector<NodeId> fan_in;
    bool value = false;   // Const only
};

struct LtfCircuit {
    std::string name;
    std::vector<LtfNode> nodes;
    std::vector<NodeId> inputs;
    std::vector<NodeId> outputs;

    std::size_t size() const { return nodes.size(); }
    /// Largest threshold fan-in.
    std::size_t r_max() const;
};

inline constexpr std::int64_t kDefaultWeightLimit = std::int64_t{1} << 15;

struct LowerOptions {
    std::int64_t weight_limit = kDefaultWeightLimit;   // W_max
    unsigned word_bits = 32;                           // sum of |w| must fit in word_bits - 1 bits
};

/// Throws CyclicGraph / InvalidArgument / WeightOverflow on broken invariants.
void require_valid(const LtfCircuit& l, std::int64_t weight_limit = kDefaultWeightLimit);

/// Gate-for-gate replacement after XOR desugaring:
/// AND -> (1,1;2), OR -> (1,1;1), NOT -> (-1;0).
LtfCircuit bool_to_ltf(const Circuit& c);

std::vector<std::uint8_t> ltf_evaluate(const LtfCircuit& l, std::span<const std::uint8_t> input);

/// Lowers one threshold gate over existing builder nodes and returns its output node.
NodeId lower_threshold(CircuitBuilder& b, std::span<const NodeId> inputs, std::span<const std::int64_t> weights,
                       std::int64_t theta, const LowerOptions& opts = {});

/// Every threshold gate becomes an offset carry-save adder tree plus a ripple comparator.
Circuit ltf_to_bfi(const LtfCircuit& l, const LowerOptions& opts = {});

// Ceilings for a single lowered gate of fan-in r and max |w| = w_max:
//   depth <= kLowerDepthSlope * log2(r * w_max) + kLowerDepthIntercept
inline constexpr double kLowerDepthSlope = 8.0;
inline constexpr double kLowerDepthIntercept = 20.0;

double lowered_gate_depth_bound(std::size_t r, std::int64_t w_max);
double lowered_gate_size_bound(std::size_t r, std::int64_t w_max);

struct RoundtripReport {
    bool equivalent = true;
    std::vector<std::uint8_t> counterexample;
    std::size_t bool_size = 0, bool_depth = 0;
    std::size_t ltf_size = 0, ltf_depth = 0, r_max = 0;
    std::int64_t w_max = 0;
    std::size_t bfi_size = 0, bfi_depth = 0;
    double size_inflation = 0, depth_inflation = 0;
    double size_bound = 0, depth_bound = 0;   // ltf size (depth) times the per-gate ceilings
    bool within_bounds = true;
};

/// c == ltf_to_bfi(bool_to_ltf(c)) exhaustively, plus inflation bookkeeping.
RoundtripReport roundtrip_check(const Circuit& c);

std::size_t ltf_depth(const LtfCircuit& l);

LtfCircuit ltf_from_json(const nlohmann::json& j);
nlohmann::json ltf_to_json(const LtfCircuit& l);
nlohmann::json roundtrip_to_json(const RoundtripReport& r);

/// Single threshold gate over r fresh inputs.
LtfCircuit single_ltf(std::vector<std::int64_t> weights, std::int64_t theta);

}  // namespace sparsec
