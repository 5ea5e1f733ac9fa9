#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"

namespace sparsec {

/// Same DAG as the source circuit, every gate read as its multilinear extension:
/// NOT 1-x, AND xy, OR x+y-xy, XOR x+y-2xy.
struct LiftedCircuit {
    Circuit dag;
    std::vector<double> k_lift;   // per node: Lipschitz bound in the sup norm over [0,1]^n
};

LiftedCircuit lift(const Circuit& c);

/// x must lie in [0,1]^n (OutOfDomain) and have n entries (DimensionMismatch).
std::vector<double> lift_evaluate(const LiftedCircuit& l, std::span<const double> x);
std::vector<double> lift_evaluate_nodes(const LiftedCircuit& l, std::span<const double> x);

/// Output Lipschitz bound: max of k_lift over output nodes.
double output_lipschitz(const LiftedCircuit& l);

struct Interval {
    double lo = 0, hi = 0;
};

/// Per-node ranges by corner evaluation of each gate over its fan-in box.
std::vector<Interval> certify_ranges(const LiftedCircuit& l);

struct NeighborhoodReport {
    double eps = 0;
    std::size_t samples = 0;
    double max_deviation = 0;   // |lift(x) - F(round(x))|
    double max_ratio = 0;       // deviation / (K_lift * ||x - round(x)||)
    double measured_c = 0;      // max deviation / (s * eps)
    double k_lift = 0;
    std::size_t violations = 0;
    std::uint64_t seed = 0;
};

/// Random vertices pushed inward by up to eps per coordinate.
NeighborhoodReport neighborhood_sweep(const LiftedCircuit& l, double eps, std::size_t samples, std::uint64_t seed);

nlohmann::json neighborhood_to_json(const NeighborhoodReport& r);

}  // namespace sparsec
