#include "smoothlift.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "error.hpp"

namespace sparsec {

namespace {

double gate_value(GateKind k, double x, double y) {
    switch (k) {
        case GateKind::Const0: return 0.0;
        case GateKind::Const1: return 1.0;
        case GateKind::Not: return 1.0 - x;
        case GateKind::And2: return x * y;
        case GateKind::Or2: return x + y - x * y;
        case GateKind::Xor2: return x + y - 2.0 * x * y;
        default: return x;
    }
}

}  // namespace

LiftedCircuit lift(const Circuit& c) {
    require_valid(c);
    LiftedCircuit l;
    l.dag = c;
    l.k_lift.assign(c.size(), 0.0);
    for (NodeId v = 0; v < c.size(); ++v) {
        const auto& g = c.nodes[v];
        switch (g.kind) {
            case GateKind::Input: l.k_lift[v] = 1.0; break;
            case GateKind::Const0:
            case GateKind::Const1: l.k_lift[v] = 0.0; break;
            case GateKind::Not: l.k_lift[v] = l.k_lift[g.fan_in[0]]; break;
            // each partial derivative is at most 1 in magnitude on the unit square
            default: l.k_lift[v] = l.k_lift[g.fan_in[0]] + l.k_lift[g.fan_in[1]]; break;
        }
    }
    return l;
}

std::vector<double> lift_evaluate_nodes(const LiftedCircuit& l, std::span<const double> x) {
    const auto& c = l.dag;
    if (x.size() != c.inputs.size())
        fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(c.inputs.size()) + " inputs, got " +
                                               std::to_string(x.size()));
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::OutOfDomain, "input " + std::to_string(v) + " outside [0,1]");
    std::vector<double> val(c.size(), 0.0);
    for (std::size_t i = 0; i < c.inputs.size(); ++i) val[c.inputs[i]] = x[i];
    for (NodeId v = 0; v < c.size(); ++v) {
        const auto& g = c.nodes[v];
        if (g.kind == GateKind::Input) continue;
        const double a = g.fan_in.size() > 0 ? val[g.fan_in[0]] : 0.0;
        const double b = g.fan_in.size() > 1 ? val[g.fan_in[1]] : 0.0;
        val[v] = gate_value(g.kind, a, b);
    }
    return val;
}

std::vector<double> lift_evaluate(const LiftedCircuit& l, std::span<const double> x) {
    const auto val = lift_evaluate_nodes(l, x);
    std::vector<double> out;
    out.reserve(l.dag.outputs.size());
    for (auto o : l.dag.outputs) out.push_back(val[o]);
    return out;
}

double output_lipschitz(const LiftedCircuit& l) {
    double k = 0;
    for (auto o : l.dag.outputs) k = std::max(k, l.k_lift[o]);
    return k;
}

std::vector<Interval> certify_ranges(const LiftedCircuit& l) {
    const auto& c = l.dag;
    std::vector<Interval> r(c.size());
    for (NodeId v = 0; v < c.size(); ++v) {
        const auto& g = c.nodes[v];
        if (g.kind == GateKind::Input) {
            r[v] = {0.0, 1.0};
            continue;
        }
        const Interval a = g.fan_in.size() > 0 ? r[g.fan_in[0]] : Interval{};
        const Interval b = g.fan_in.size() > 1 ? r[g.fan_in[1]] : Interval{};
        // multilinear in (x, y), so extremes over the box sit at its corners
        const double xs[2] = {a.lo, a.hi}, ys[2] = {b.lo, b.hi};
        Interval out{gate_value(g.kind, xs[0], ys[0]), gate_value(g.kind, xs[0], ys[0])};
        for (double x : xs)
            for (double y : ys) {
                const double z = gate_value(g.kind, x, y);
                out.lo = std::min(out.lo, z);
                out.hi = std::max(out.hi, z);
            }
        r[v] = out;
    }
    return r;
}

NeighborhoodReport neighborhood_sweep(const LiftedCircuit& l, double eps, std::size_t samples, std::uint64_t seed) {
    if (!(eps >= 0.0 && eps <= 0.5)) fail(ErrorCode::InvalidArgument, "eps must lie in [0, 1/2]");
    const auto& c = l.dag;
    const std::size_t n = c.inputs.size();
    NeighborhoodReport rep;
    rep.eps = eps;
    rep.samples = samples;
    rep.seed = seed;
    rep.k_lift = output_lipschitz(l);
    std::size_t s = 0;
    for (const auto& g : c.nodes)
        if (g.kind != GateKind::Input) ++s;

    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> v(n);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < samples; ++t) {
        double dist = 0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = static_cast<std::uint8_t>(rng() >> 63);
            const double u = eps * std::ldexp(static_cast<double>(rng() >> 11), -53);
            x[i] = v[i] ? 1.0 - u : u;
            dist = std::max(dist, u);
        }
        const auto exact = evaluate(c, v);
        const auto y = lift_evaluate(l, x);
        double dev = 0;
        for (std::size_t o = 0; o < y.size(); ++o) dev = std::max(dev, std::abs(y[o] - exact[o]));
        rep.max_deviation = std::max(rep.max_deviation, dev);
        const double allowed = rep.k_lift * dist;
        if (dev > allowed + 1e-12) ++rep.violations;
        if (allowed > 0) rep.max_ratio = std::max(rep.max_ratio, dev / allowed);
    }
    if (s > 0 && eps > 0) rep.measured_c = rep.max_deviation / (static_cast<double>(s) * eps);
    return rep;
}

nlohmann::json neighborhood_to_json(const NeighborhoodReport& r) {
    return nlohmann::json{{"eps", r.eps},
                          {"samples", r.samples},
                          {"seed", r.seed},
                          {"k_lift", r.k_lift},
                          {"max_deviation", r.max_deviation},
                          {"max_ratio", r.max_ratio},
                          {"measured_c", r.measured_c},
                          {"violations", r.violations}};
}

}  // namespace sparsec
