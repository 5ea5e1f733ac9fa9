#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "neuralize.hpp"
#include "oracles.hpp"
#include "smoothlift.hpp"

using namespace sparsec;

namespace {

Circuit passthrough(std::size_t n) {
    CircuitBuilder b("identity");
    for (std::size_t i = 0; i < n; ++i) b.output(b.input());
    return std::move(b).finish();
}

// Multilinear extension by the vertex expansion sum_v F(v) prod_i (x_i or 1 - x_i).
std::vector<double> extension(const Circuit& c, const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> out(c.outputs.size(), 0.0);
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
        const auto bits = oracle::bits_msb(v, n);
        double w = 1;
        for (std::size_t i = 0; i < n; ++i) w *= bits[i] ? x[i] : 1 - x[i];
        const auto y = oracle::eval(c, bits);
        for (std::size_t o = 0; o < y.size(); ++o) out[o] += w * y[o];
    }
    return out;
}

}  // namespace

TEST_CASE("gate values") {
    const auto a = lift(circuits::single_gate(GateKind::And2));
    CHECK(lift_evaluate(a, std::vector<double>{1, 1})[0] == 1.0);
    CHECK(lift_evaluate(a, std::vector<double>{0.5, 0.5})[0] == 0.25);
    const auto o = lift(circuits::single_gate(GateKind::Or2));
    CHECK(lift_evaluate(o, std::vector<double>{0.3, 0.4})[0] == doctest::Approx(0.58));
    const auto id = lift(passthrough(4));
    const std::vector<double> x{0.1, 0.7, 0.0, 1.0};
    CHECK(lift_evaluate(id, x) == x);
}

TEST_CASE("vertex exactness, with neuralized gadgets as a second reference") {
    for (const auto& c : {circuits::parity_tree(12), circuits::and_tree(8), circuits::ripple_adder(4)}) {
        const auto l = lift(c);
        const auto net = neuralize_circuit(c, plan_budget(c, 1e-3)).net;
        const std::size_t n = c.inputs.size();
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
            const auto bits = oracle::bits_msb(v, n);
            const std::vector<double> x(bits.begin(), bits.end());
            const auto y = lift_evaluate(l, x);
            const auto want = oracle::eval(c, bits);
            const auto z = net_evaluate(net, x);
            for (std::size_t o = 0; o < want.size(); ++o) {
                CHECK(y[o] == want[o]);
                CHECK(z[o] == y[o]);
            }
        }
    }
}

TEST_CASE("equals the multilinear extension off the vertices when the DAG is a tree") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (const auto& c : {circuits::parity_tree(6), circuits::and_tree(6)}) {
        const auto l = lift(c);
        for (int t = 0; t < 100; ++t) {
            std::vector<double> x(6);
            for (auto& v : x) v = u(rng);
            CHECK(lift_evaluate(l, x)[0] == doctest::Approx(extension(c, x)[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("affine in each coordinate on trees") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    const auto l = lift(circuits::parity_tree(6));
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(6);
        for (auto& v : x) v = u(rng);
        const std::size_t i = rng() % 6;
        auto x0 = x, x1 = x;
        x0[i] = 0;
        x1[i] = 1;
        const double y = lift_evaluate(l, x)[0];
        const double y0 = lift_evaluate(l, x0)[0], y1 = lift_evaluate(l, x1)[0];
        CHECK(y == doctest::Approx((1 - x[i]) * y0 + x[i] * y1).epsilon(1e-12));
    }
}

TEST_CASE("interval ranges stay inside [0,1] and contain sampled values") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    for (const auto& c : {circuits::parity_tree(8), circuits::ripple_adder(3), circuits::and_tree(8)}) {
        const auto l = lift(c);
        const auto ranges = certify_ranges(l);
        for (const auto& r : ranges) {
            CHECK(r.lo >= 0.0);
            CHECK(r.hi <= 1.0);
        }
        for (int t = 0; t < 300; ++t) {
            std::vector<double> x(c.inputs.size());
            for (auto& v : x) v = u(rng);
            const auto vals = lift_evaluate_nodes(l, x);
            for (std::size_t i = 0; i < vals.size(); ++i) {
                CHECK(vals[i] >= ranges[i].lo - 1e-12);
                CHECK(vals[i] <= ranges[i].hi + 1e-12);
            }
        }
    }
}

TEST_CASE("neighborhood deviation within K_lift times the perturbation") {
    for (const auto& c : {circuits::parity_tree(8), circuits::ripple_adder(3)}) {
        const auto l = lift(c);
        const double K = output_lipschitz(l);
        CHECK(K <= std::ldexp(1.0, static_cast<int>(certify_sparsity(c).L)));
        for (double eps : {1e-3, 1e-2, 0.05}) {
            const auto r = neighborhood_sweep(l, eps, 2000, 1);
            CHECK(r.violations == 0);
            CHECK(r.max_deviation <= K * eps + 1e-12);
            CHECK(r.max_ratio <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("k_lift of a parity tree doubles per level") {
    const auto l = lift(circuits::parity_tree(8));
    CHECK(output_lipschitz(l) == 8.0);
}

TEST_CASE("domain errors") {
    const auto l = lift(circuits::single_gate(GateKind::And2));
    try {
        lift_evaluate(l, std::vector<double>{0.5});
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    try {
        lift_evaluate(l, std::vector<double>{0.5, 1.2});
        FAIL("expected OutOfDomain");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfDomain);
    }
}
