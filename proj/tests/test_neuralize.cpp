#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "neuralize.hpp"
#include "oracles.hpp"
#include "tm2circuit.hpp"

using namespace sparsec;

namespace {

const GateKind kGates[] = {GateKind::Not, GateKind::And2, GateKind::Or2, GateKind::Xor2};

double relu(double x) { return x > 0 ? x : 0; }

// Plain dense forward pass, independent of the sparse evaluator.
std::vector<double> manual_forward(const std::vector<std::vector<std::vector<double>>>& W,
                                   const std::vector<std::vector<double>>& B, const std::vector<std::vector<int>>& act,
                                   std::vector<double> x) {
    for (std::size_t l = 0; l < W.size(); ++l) {
        std::vector<double> y(W[l].size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            double s = B[l][i];
            for (std::size_t j = 0; j < x.size(); ++j) s += W[l][i][j] * x[j];
            y[i] = act[l][i] ? relu(s) : s;
        }
        x = std::move(y);
    }
    return x;
}

Layer to_layer(const std::vector<std::vector<double>>& W, const std::vector<double>& b, const std::vector<int>& act) {
    std::vector<double> flat;
    for (const auto& row : W) flat.insert(flat.end(), row.begin(), row.end());
    std::vector<std::uint8_t> mask(act.begin(), act.end());
    return dense_layer(W.front().size(), W.size(), flat, b, mask);
}

// Pieces estimated from slopes on a uniform grid. A kink inside a cell makes that
// cell's slope a blend, so one-cell runs are transitions and are skipped.
std::uint64_t grid_pieces(const ReluNetwork& net, std::size_t cells) {
    std::vector<double> slope(cells);
    const double h = 1.0 / static_cast<double>(cells);
    double prev = net_evaluate(net, std::vector<double>{0.0})[0];
    for (std::size_t i = 0; i < cells; ++i) {
        const double y = net_evaluate(net, std::vector<double>{h * static_cast<double>(i + 1)})[0];
        slope[i] = (y - prev) / h;
        prev = y;
    }
    auto same = [](double a, double b) { return std::fabs(a - b) <= 1e-6 * (1 + std::fabs(a) + std::fabs(b)); };
    std::uint64_t pieces = 0;
    double last = NAN;
    for (std::size_t i = 0; i < cells;) {
        std::size_t j = i;
        while (j + 1 < cells && same(slope[j + 1], slope[i])) ++j;
        if (j > i || i == 0 || j + 1 == cells) {
            if (std::isnan(last) || !same(last, slope[i])) ++pieces;
            last = slope[i];
        }
        i = j + 1;
    }
    return pieces;
}

}  // namespace

TEST_CASE("gadgets reproduce their truth tables on every vertex") {
    for (auto mode : {GadgetMode::Exact, GadgetMode::Robust}) {
        for (auto k : kGates) {
            const auto g = gate_gadget(k, {mode, 0.1});
            const std::size_t r = gate_arity(k);
            for (std::uint64_t v = 0; v < (1u << r); ++v) {
                const auto x = oracle::bits_msb(v, r);
                const std::vector<double> xd(x.begin(), x.end());
                const double want = oracle::gate(k, x[0], r > 1 ? x[1] : 0);
                CHECK(net_evaluate(g.net, xd)[0] == want);
            }
        }
    }
    CHECK(net_evaluate(gate_gadget(GateKind::And2).net, std::vector<double>{1, 1})[0] == 1.0);
}

TEST_CASE("robust gadgets stay within eps_gate on the delta neighborhood") {
    const double delta = 0.1, eps_gate = 1e-9;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-delta, delta);
    for (auto k : kGates) {
        const auto g = gate_gadget(k, {GadgetMode::Robust, delta});
        const std::size_t r = gate_arity(k);
        double worst = 0;
        for (int s = 0; s < 10000; ++s) {
            const auto v = rng() % (1u << r);
            const auto x = oracle::bits_msb(v, r);
            std::vector<double> xp(r);
            for (std::size_t i = 0; i < r; ++i) xp[i] = x[i] + u(rng);
            const double want = oracle::gate(k, x[0], r > 1 ? x[1] : 0);
            worst = std::max(worst, std::fabs(net_evaluate(g.net, xp)[0] - want));
        }
        CHECK(worst <= eps_gate);
    }
    const auto g = gate_gadget(GateKind::And2, {GadgetMode::Robust, delta});
    CHECK(net_evaluate(g.net, std::vector<double>{0.95, 1.0})[0] == doctest::Approx(1.0).epsilon(eps_gate));
    CHECK_THROWS_AS(gate_gadget(GateKind::And2, {GadgetMode::Robust, 0.5}), Error);
    CHECK_THROWS_AS(gate_gadget(GateKind::And2, {GadgetMode::Robust, -0.1}), Error);
}

TEST_CASE("allocate_budget") {
    CHECK(allocate_budget(3, 2, 0.12) == doctest::Approx(0.01));
    CHECK(allocate_budget(1, 7.5, 0.3) == doctest::Approx(0.3));
    CHECK(allocate_budget(5, 1, 0.05) == doctest::Approx(0.01));
    try {
        allocate_budget(40, 10, 1e-3);
        FAIL("expected BudgetInfeasible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BudgetInfeasible);
    }
    const std::vector<double> K{2, 2, 2};
    CHECK(telescoping_bound(K, 0.5) == doctest::Approx(0.5 * (4 + 2 + 1)));
}

TEST_CASE("net_evaluate matches a manual dense forward pass") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int t = 0; t < 20; ++t) {
        const std::vector<std::size_t> widths{3, 5, 4, 2};
        std::vector<std::vector<std::vector<double>>> W;
        std::vector<std::vector<double>> B;
        std::vector<std::vector<int>> act;
        ReluNetwork net;
        net.input_width = widths[0];
        for (std::size_t l = 1; l < widths.size(); ++l) {
            W.emplace_back(widths[l], std::vector<double>(widths[l - 1]));
            B.emplace_back(widths[l]);
            act.emplace_back(widths[l]);
            for (auto& row : W.back())
                for (auto& w : row) w = u(rng);
            for (auto& b : B.back()) b = u(rng);
            for (auto& a : act.back()) a = static_cast<int>(rng() & 1);
            net.layers.push_back(to_layer(W.back(), B.back(), act.back()));
        }
        for (int s = 0; s < 20; ++s) {
            std::vector<double> x{u(rng), u(rng), u(rng)};
            const auto want = manual_forward(W, B, act, x);
            const auto got = net_evaluate(net, x);
            for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
    }
    ReluNetwork id;
    id.input_width = 3;
    const std::vector<double> x{0.25, -2, 9};
    CHECK(net_evaluate(id, x) == x);
}

TEST_CASE("compiled circuits agree with evaluate on every input") {
    const auto m = machines::parity();
    const auto u = unroll(m, 4, auto_time_bound(m, 4));
    for (const auto& c : {circuits::parity_tree(4), circuits::ripple_adder(3), circuits::and_tree(8),
                          circuits::single_gate(GateKind::Or2), u.circuit}) {
        for (auto mode : {GadgetMode::Exact, GadgetMode::Robust}) {
            const NeuralizeOptions opts{mode, 0.1};
            const auto res = neuralize_circuit(c, plan_budget(c, 1e-3, opts), opts);
            const std::size_t n = c.inputs.size();
            for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
                const auto x = oracle::bits_msb(v, n);
                const auto y = net_evaluate(res.net, std::vector<double>(x.begin(), x.end()));
                const auto want = oracle::eval(c, x);
                for (std::size_t o = 0; o < want.size(); ++o) CHECK(y[o] == want[o]);
            }
        }
    }
}

TEST_CASE("three-gate parity and single NOT") {
    CircuitBuilder b("parity3");
    const auto x0 = b.input(), x1 = b.input(), x2 = b.input();
    b.output(b.xor_(b.xor_(x0, x1), x2));
    const auto c = std::move(b).finish();
    const auto res = neuralize_circuit(c, plan_budget(c, 1e-3));
    for (std::uint64_t v = 0; v < 8; ++v) {
        const auto x = oracle::bits_msb(v, 3);
        CHECK(net_evaluate(res.net, std::vector<double>(x.begin(), x.end()))[0] == oracle::eval(c, x)[0]);
    }
    const auto n = circuits::single_gate(GateKind::Not);
    const auto rn = neuralize_circuit(n, plan_budget(n, 1e-3));
    REQUIRE(rn.net.layers.size() == 1);
    CHECK(rn.net.layers[0].relu[0] == 0);
    for (double t : {-0.5, 0.0, 0.3, 1.0, 2.0}) CHECK(net_evaluate(rn.net, std::vector<double>{t})[0] == doctest::Approx(1 - t));
}

TEST_CASE("robust network on the unrolled parity machine under input noise") {
    const auto m = machines::parity();
    const auto u = unroll(m, 4, auto_time_bound(m, 4));
    const NeuralizeOptions opts{GadgetMode::Robust, 0.1};
    const double eps = std::ldexp(1.0, -8);
    const auto res = neuralize_circuit(u.circuit, plan_budget(u.circuit, eps, opts), opts);
    CHECK(res.budget.holds());
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> noise(-0.1, 0.1);
    double worst = 0;
    for (int s = 0; s < 10000; ++s) {
        const auto v = rng() % 16;
        const auto x = oracle::bits_msb(v, 4);
        std::vector<double> xp(4);
        for (int i = 0; i < 4; ++i) xp[i] = x[i] + noise(rng);
        worst = std::max(worst, std::fabs(net_evaluate(res.net, xp)[0] - oracle::eval(u.circuit, x)[0]));
    }
    CHECK(worst <= eps);
}

TEST_CASE("budget planning") {
    const auto c = circuits::parity_tree(8);
    const auto b = plan_budget(c, 0.01);
    CHECK(b.L == gadget_stage_count(c));
    CHECK(b.L == 3);
    CHECK(b.holds());
    ErrorBudget bad = b;
    bad.eps_gate *= 2;
    CHECK_FALSE(bad.holds());
    CHECK_THROWS_AS(neuralize_circuit(c, bad), Error);
}

TEST_CASE("telgarsky tent compositions") {
    CHECK(telgarsky_demo(1).region_count == 2);
    CHECK(telgarsky_demo(3).region_count == 8);
    const auto r10 = telgarsky_demo(10);
    CHECK(r10.region_count == 1024);
    CHECK(r10.shallow_units_needed == 1023);
    CHECK(shallow_piece_ceiling(1022) < 1024);
    CHECK(shallow_piece_ceiling(1023) >= 1024);
    std::uint64_t prev = 1;
    for (int L = 1; L <= 16; ++L) {
        const auto r = telgarsky_demo(L);
        CHECK(r.region_count == 2 * prev);
        CHECK(r.deep.max_width() <= 2);
        prev = r.region_count;
    }
    CHECK_THROWS_AS(telgarsky_demo(0), Error);
    CHECK(grid_pieces(telgarsky_demo(4).deep, 1 << 12) == 16);
}

TEST_CASE("region counting") {
    ReluNetwork affine;
    affine.input_width = 1;
    affine.layers.push_back(to_layer({{3.0}}, {1.0}, {0}));
    CHECK(count_linear_regions_1d(affine) == 1);
    CHECK(count_linear_regions_1d(telgarsky_demo(1).deep) == 2);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 10; ++t) {
        ReluNetwork net;
        net.input_width = 1;
        std::size_t in = 1;
        for (int l = 0; l < 3; ++l) {
            std::vector<std::vector<double>> W(4, std::vector<double>(in));
            std::vector<double> b(4);
            for (auto& row : W)
                for (auto& w : row) w = u(rng);
            for (auto& x : b) x = u(rng);
            net.layers.push_back(to_layer(W, b, std::vector<int>(4, 1)));
            in = 4;
        }
        std::vector<std::vector<double>> W(1, std::vector<double>(4));
        for (auto& w : W[0]) w = u(rng);
        net.layers.push_back(to_layer(W, {0.0}, {0}));
        // refine the grid until the estimate settles
        std::uint64_t est = grid_pieces(net, 1 << 12), next = grid_pieces(net, 1 << 14);
        for (std::size_t cells = 1 << 16; est != next && cells <= (1 << 20); cells <<= 2) {
            est = next;
            next = grid_pieces(net, cells);
        }
        CHECK(count_linear_regions_1d(net) == next);
    }
    ReluNetwork two;
    two.input_width = 2;
    two.layers.push_back(to_layer({{1.0, 1.0}}, {0.0}, {1}));
    CHECK_THROWS_AS(count_linear_regions_1d(two), Error);
}

TEST_CASE("budget soundness on small gadget stacks") {
    // stage: pass-through units plus relu(a + b - 1); readout forms the gate values
    std::mt19937_64 rng(2);
    const std::size_t w = 4;
    for (std::size_t L = 2; L <= 4; ++L) {
        ReluNetwork clean;
        clean.input_width = w;
        std::vector<double> K;
        for (std::size_t s = 0; s < L; ++s) {
            std::vector<std::vector<double>> W1(2 * w, std::vector<double>(w, 0.0)), W2(w, std::vector<double>(2 * w, 0.0));
            for (std::size_t i = 0; i < w; ++i) {
                const auto a = rng() % w, b = (a + 1 + rng() % (w - 1)) % w;
                W1[2 * i][a] = 1;
                W1[2 * i + 1][a] = 1;
                W1[2 * i + 1][b] = 1;
                W2[i][2 * i + 1] = 1;   // AND
                if (rng() & 1) {        // OR instead: a + b - u
                    W2[i][2 * i + 1] = -1;
                    W2[i][2 * i] = 1;
                }
            }
            std::vector<double> b1(2 * w, 0.0);
            for (std::size_t i = 0; i < w; ++i) b1[2 * i + 1] = -1;
            clean.layers.push_back(to_layer(W1, b1, std::vector<int>(2 * w, 1)));
            clean.layers.push_back(to_layer(W2, std::vector<double>(w, 0.0), std::vector<int>(w, 0)));
            K.push_back(clean.layers[clean.layers.size() - 2].inf_norm() * clean.layers.back().inf_norm());
        }
        const double eps_gate = 1e-3;
        ReluNetwork noisy = clean;
        for (std::size_t l = 1; l < noisy.layers.size(); l += 2)
            for (auto& b : noisy.layers[l].bias) b += (rng() & 1) ? eps_gate : -eps_gate;
        const double Kmax = *std::max_element(K.begin(), K.end());
        const double bound = static_cast<double>(L) * std::pow(Kmax, static_cast<double>(L - 1)) * eps_gate;
        std::uniform_real_distribution<double> u(0, 1);
        for (int s = 0; s < 500; ++s) {
            std::vector<double> x(w);
            for (auto& v : x) v = u(rng);
            const auto a = net_evaluate(clean, x), b = net_evaluate(noisy, x);
            for (std::size_t i = 0; i < w; ++i) {
                CHECK(std::fabs(a[i] - b[i]) <= telescoping_bound(K, eps_gate) * (1 + 1e-12));
                CHECK(std::fabs(a[i] - b[i]) <= bound * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("network JSON round trips in dense and sparse form") {
    const auto small = neuralize_circuit(circuits::ripple_adder(2), plan_budget(circuits::ripple_adder(2), 1e-3)).net;
    const auto j = network_to_json(small);
    CHECK(j.at("layers")[0].at("format") == "dense");
    CHECK(network_to_json(network_from_json(j)) == j);
    const auto big_c = circuits::parity_tree(256);
    const auto big = neuralize_circuit(big_c, plan_budget(big_c, 1e-3)).net;
    const auto jb = network_to_json(big);
    CHECK(jb.at("layers")[0].at("format") == "sparse");
    const auto back = network_from_json(jb);
    CHECK(network_to_json(back) == jb);
    std::vector<double> x(256, 1.0);
    CHECK(net_evaluate(back, x) == net_evaluate(big, x));
}
