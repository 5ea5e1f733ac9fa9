// Reference implementations the tests compare against. Nothing here calls the
// code under test except for reading plain data structures.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "circuit.hpp"

namespace oracle {

inline std::vector<std::uint8_t> bits_msb(std::uint64_t v, std::size_t n) {
    std::vector<std::uint8_t> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = (v >> (n - 1 - i)) & 1u;
    return b;
}

inline std::uint64_t value_msb(const std::vector<std::uint8_t>& b) {
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 1) | x;
    return v;
}

inline bool gate(sparsec::GateKind k, bool a, bool b) {
    using sparsec::GateKind;
    switch (k) {
        case GateKind::Const0: return false;
        case GateKind::Const1: return true;
        case GateKind::Not: return !a;
        case GateKind::And2: return a && b;
        case GateKind::Or2: return a || b;
        case GateKind::Xor2: return a != b;
        default: return a;
    }
}

// Memoized recursion from the outputs down, no topological assumptions.
inline std::vector<std::uint8_t> eval(const sparsec::Circuit& c, const std::vector<std::uint8_t>& x) {
    std::vector<int> val(c.size(), -1);
    for (std::size_t i = 0; i < c.inputs.size(); ++i) val[c.inputs[i]] = x[i];
    std::function<int(std::uint32_t)> go = [&](std::uint32_t id) -> int {
        if (val[id] >= 0) return val[id];
        const auto& g = c.nodes[id];
        const bool a = g.fan_in.size() > 0 ? go(g.fan_in[0]) : false;
        const bool b = g.fan_in.size() > 1 ? go(g.fan_in[1]) : false;
        return val[id] = gate(g.kind, a, b);
    };
    std::vector<std::uint8_t> out;
    for (auto o : c.outputs) out.push_back(static_cast<std::uint8_t>(go(o)));
    return out;
}

// Longest input-to-node path by plain DFS over fan-ins.
inline std::size_t depth(const sparsec::Circuit& c) {
    std::vector<long> d(c.size(), -1);
    std::function<long(std::uint32_t)> go = [&](std::uint32_t id) -> long {
        if (d[id] >= 0) return d[id];
        long best = -1;
        for (auto f : c.nodes[id].fan_in) best = std::max(best, go(f));
        return d[id] = c.nodes[id].fan_in.empty() ? 0 : best + 1;
    };
    long L = 0;
    for (auto o : c.outputs) L = std::max(L, go(o));
    return static_cast<std::size_t>(L);
}

}  // namespace oracle
