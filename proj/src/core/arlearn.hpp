#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"

namespace sparsec {

/// One token per node in topological order; token = that node's value.
struct TraceDataset {
    std::string circuit;
    std::size_t nodes = 0;
    std::uint64_t seed = 0;
    std::string distribution = "uniform";
    std::vector<std::vector<std::uint8_t>> samples;
};

/// Inputs uniform on {0,1}^n; deterministic in seed.
TraceDataset generate_dataset(const Circuit& c, std::size_t num_samples, std::uint64_t seed);

/// Pattern index: fan-in bits read MSB first (first fan-in is the high bit).
struct GatePredictor {
    NodeId node = 0;
    bool is_input = false;
    std::vector<NodeId> fan_in;
    std::array<std::array<std::uint64_t, 2>, 4> counts{};   // [pattern][label]
    std::array<std::optional<std::uint8_t>, 4> predict{};    // majority label, ties to 0

    std::size_t pattern_count() const { return std::size_t{1} << fan_in.size(); }
};

using Predictors = std::vector<GatePredictor>;

/// Counts (pattern, label) pairs per node. The circuit supplies the DAG edges.
Predictors fit(const Circuit& c, const TraceDataset& ds);

/// Same, over the first `prefix` samples.
Predictors fit_prefix(const Circuit& c, const TraceDataset& ds, std::size_t prefix);

/// Autoregressive pass in topological order. Throws UncoveredPattern on an unseen pattern.
std::vector<std::uint8_t> chain_predict(const Predictors& p, const Circuit& c, std::span<const std::uint8_t> input);

struct Coverage {
    std::size_t reachable = 0;   // (node, pattern) pairs hit by some input
    std::size_t covered = 0;     // reachable pairs seen in the data
    std::size_t unseen = 0;      // defined-arity pairs never seen (reachable or not)
};

/// Reachability is exhaustive (n <= 20).
Coverage coverage(const Predictors& p, const Circuit& c);

/// chain_predict == evaluate on all 2^n inputs; an uncovered pattern counts as a failure.
bool chain_equivalent(const Predictors& p, const Circuit& c);

struct CurveRow {
    double delta = 0;
    std::size_t N = 0;              // smallest N with success in >= (1 - delta) of trials
    bool capped = false;            // N hit max_samples without reaching the target
    double reference = 0;           // s * ln(s / delta)
    double coupon_reference = 0;    // 4 s ln(4 s / delta)
};

struct Curve {
    std::string circuit;
    std::size_t s = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> per_trial_N;   // first N at which each trial succeeds
    std::vector<CurveRow> rows;
};

struct CurveOptions {
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    std::size_t max_samples = std::size_t{1} << 20;
};

/// Success is monotone along a trial's sample prefix, so each trial is binary searched once.
Curve sample_complexity_curve(const Circuit& c, std::span<const double> deltas, const CurveOptions& opts = {});

/// Samples from the coupon-collector style bound ceil(4 s ln(4 s / delta)).
std::size_t recovery_sample_size(std::size_t s, double delta);

struct TrialSummary {
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::size_t N = 0;
    std::uint64_t seed = 0;
};

/// Fresh dataset of size N per trial (seed + t); counts exact recoveries.
TrialSummary recovery_trials(const Circuit& c, std::size_t N, std::size_t trials, std::uint64_t seed);

std::string dataset_to_jsonl(const TraceDataset& ds);
TraceDataset dataset_from_jsonl(const std::string& text);
nlohmann::json predictors_to_json(const Predictors& p);
Predictors predictors_from_json(const nlohmann::json& j);
nlohmann::json curve_to_json(const Curve& c);

}  // namespace sparsec
