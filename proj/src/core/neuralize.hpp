#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"

namespace sparsec {

/// One affine layer followed by a per-unit activation (ReLU or identity).
/// Rows are stored sparsely. JSON keeps row-major order: dense for small layers,
/// per-row [col, weight] pairs otherwise.
struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<std::vector<std::uint32_t>> cols;   // per output unit
    std::vector<std::vector<double>> vals;          // matching weights
    std::vector<double> bias;
    std::vector<std::uint8_t> relu;                 // 1 = relu, 0 = identity

    double inf_norm() const;   // max_i sum_j |w_ij|
};

struct ReluNetwork {
    std::size_t input_width = 0;
    std::vector<Layer> layers;

    std::size_t output_width() const { return layers.empty() ? input_width : layers.back().out; }
    std::size_t max_width() const;
    std::size_t unit_count() const;

    /// Throws DimensionMismatch / InvalidArgument on broken invariants.
    void check() const;
};

std::vector<double> net_evaluate(const ReluNetwork& net, std::span<const double> x);

/// Bits by thresholding each output at 1/2.
std::vector<std::uint8_t> threshold_outputs(std::span<const double> y);

enum class GadgetMode { Exact, Robust };

struct NeuralizeOptions {
    GadgetMode mode = GadgetMode::Exact;
    double delta = 0.1;   // robust mode: inputs within delta of {0,1} are snapped exactly
};

struct GateGadget {
    GateKind kind = GateKind::And2;
    GadgetMode mode = GadgetMode::Exact;
    double delta = 0;
    ReluNetwork net;
};

/// Constant-size network for one gate. Robust mode first applies
/// H(t) = clamp01((t - delta) / (1 - 2 delta)) to each input.
GateGadget gate_gadget(GateKind kind, const NeuralizeOptions& opts = {});

struct ErrorBudget {
    std::size_t L = 1;        // gadget stages
    double K = 1;             // per-stage Lipschitz bound
    double eps_gate = 0;
    double eps_total = 0;

    /// L * K^(L-1) * eps_gate <= eps_total (relative slack 1e-12).
    bool holds() const;
};

/// eps_total / (L * K^(L-1)); BudgetInfeasible when that is not above machine epsilon.
double allocate_budget(std::size_t L, double K, double eps_total);

/// sum_i (prod_{j>i} K_j) * eps, the sharper form of the composition bound.
double telescoping_bound(std::span<const double> stage_lipschitz, double eps);

struct Neuralized {
    ReluNetwork net;
    std::size_t gadget_stages = 0;     // circuit levels holding a two-input gate
    std::size_t circuit_depth = 0;
    std::size_t circuit_width = 0;     // max_level_width of the source circuit
    double max_layer_norm = 0;         // max over layers of the operator inf-norm
    double max_stage_lipschitz = 0;    // max over stages of the product of their layer norms
    ErrorBudget budget;
};

/// Stages of the network built from c (at least 1): levels with a two-input gate,
/// or in robust mode any level with a gate, since each consumed wire is hardened.
std::size_t gadget_stage_count(const Circuit& c, const NeuralizeOptions& opts = {});

/// Budget for compiling c: L = gadget stages and K = 1, the Lipschitz constant of
/// every stage on the set its signals occupy (vertices in exact mode, the
/// delta-tube around vertices in robust mode, where hardening is locally constant).
ErrorBudget plan_budget(const Circuit& c, double eps_total, const NeuralizeOptions& opts = {});

/// Wires gadgets level by level. Wires that skip levels ride on identity units.
Neuralized neuralize_circuit(const Circuit& c, const ErrorBudget& budget, const NeuralizeOptions& opts = {});

struct TelgarskyResult {
    ReluNetwork deep;
    std::uint64_t region_count = 0;
    std::uint64_t shallow_units_needed = 0;   // region_count - 1, from the W + 1 ceiling
};

/// L-fold composition of t(x) = 2 relu(x) - 4 relu(x - 1/2) with width-2 layers.
TelgarskyResult telgarsky_demo(int L);

/// Exact number of maximal affine pieces of a univariate network on [lo, hi].
std::uint64_t count_linear_regions_1d(const ReluNetwork& net, double lo = 0.0, double hi = 1.0);

/// A single hidden layer of width W has at most W + 1 pieces on a line.
inline std::uint64_t shallow_piece_ceiling(std::uint64_t width) { return width + 1; }

ReluNetwork network_from_json(const nlohmann::json& j);
nlohmann::json network_to_json(const ReluNetwork& net);

/// Builds a layer from dense row-major weights.
Layer dense_layer(std::size_t in, std::size_t out, std::span<const double> weights, std::span<const double> bias,
                  std::span<const std::uint8_t> relu);

}  // namespace sparsec
