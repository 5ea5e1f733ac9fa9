#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "arlearn.hpp"
#include "error.hpp"
#include "oracles.hpp"
#include "tm2circuit.hpp"

using namespace sparsec;

TEST_CASE("NOT circuit traces") {
    const auto c = circuits::single_gate(GateKind::Not);
    const auto ds = generate_dataset(c, 4, 1);
    REQUIRE(ds.samples.size() == 4);
    for (const auto& s : ds.samples) {
        REQUIRE(s.size() == 2);
        CHECK(s[1] == 1 - s[0]);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    const auto c = circuits::parity_tree(8);
    CHECK(dataset_to_jsonl(generate_dataset(c, 100, 9)) == dataset_to_jsonl(generate_dataset(c, 100, 9)));
    CHECK(dataset_to_jsonl(generate_dataset(c, 100, 9)) != dataset_to_jsonl(generate_dataset(c, 100, 10)));
}

TEST_CASE("token marginals follow the gate truth tables") {
    // uniform inputs: AND of two fair bits is 1 w.p. 1/4; a 4-input AND tree w.p. 1/16; parity w.p. 1/2
    const std::size_t N = 40000;
    struct Case {
        Circuit c;
        double p;
    };
    for (const auto& [c, p] : {Case{circuits::single_gate(GateKind::And2), 0.25}, Case{circuits::and_tree(4), 1.0 / 16},
                              Case{circuits::parity_tree(4), 0.5}, Case{circuits::single_gate(GateKind::Or2), 0.75}}) {
        const auto ds = generate_dataset(c, N, 3);
        double ones = 0;
        for (const auto& s : ds.samples) ones += s[c.outputs[0]];
        const double sd = std::sqrt(p * (1 - p) / static_cast<double>(N));
        CHECK(std::fabs(ones / static_cast<double>(N) - p) <= 5 * sd);
    }
}

TEST_CASE("fit recovers the AND table from full coverage") {
    const auto c = circuits::single_gate(GateKind::And2);
    TraceDataset ds;
    ds.nodes = 3;
    for (std::uint64_t v = 0; v < 4; ++v) {
        const auto x = oracle::bits_msb(v, 2);
        ds.samples.push_back(evaluate_nodes(c, x));
    }
    const auto p = fit(c, ds);
    const auto& g = p[c.outputs[0]];
    REQUIRE(g.fan_in.size() == 2);
    for (std::size_t pat = 0; pat < 4; ++pat) {
        REQUIRE(g.predict[pat].has_value());
        CHECK(*g.predict[pat] == (pat == 3 ? 1 : 0));
    }
    CHECK(chain_equivalent(p, c));
}

TEST_CASE("a single sample covers one pattern per gate") {
    const auto c = circuits::single_gate(GateKind::And2);
    const auto p = fit(c, generate_dataset(c, 1, 5));
    const auto cov = coverage(p, c);
    CHECK(cov.covered == 1);
    CHECK(cov.unseen == 3);
    CHECK(cov.reachable == 4);
}

TEST_CASE("majority vote, ties to zero") {
    const auto c = circuits::single_gate(GateKind::Not);
    TraceDataset ds;
    ds.nodes = 2;
    ds.samples = {{0, 1}, {0, 0}, {1, 0}, {1, 0}, {1, 1}};
    const auto p = fit(c, ds);
    CHECK(*p[1].predict[0] == 0);
    CHECK(*p[1].predict[1] == 0);
    CHECK(p[1].counts[1][0] == 2);
}

TEST_CASE("chain prediction") {
    const auto n = circuits::single_gate(GateKind::Not);
    const auto pn = fit(n, generate_dataset(n, 50, 1));
    for (std::uint8_t b : {0, 1}) CHECK(chain_predict(pn, n, std::vector<std::uint8_t>{b}) == evaluate(n, std::vector<std::uint8_t>{b}));

    const auto par = circuits::parity_tree(8);
    const auto pp = fit(par, generate_dataset(par, 2000, 2));
    for (std::uint64_t v = 0; v < 256; ++v) {
        const auto x = oracle::bits_msb(v, 8);
        CHECK(chain_predict(pp, par, x) == oracle::eval(par, x));
    }

    const auto a = circuits::single_gate(GateKind::And2);
    TraceDataset one;
    one.nodes = 3;
    one.samples = {{0, 0, 0}};
    const auto pa = fit(a, one);
    CHECK_FALSE(chain_equivalent(pa, a));
    try {
        chain_predict(pa, a, std::vector<std::uint8_t>{1, 1});
        FAIL("expected UncoveredPattern");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UncoveredPattern);
    }
}

TEST_CASE("full coverage implies exact recovery on random DAGs") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 30; ++t) {
        CircuitBuilder b("random", false);
        std::vector<NodeId> ids;
        const std::size_t n = 2 + rng() % 5;
        for (std::size_t i = 0; i < n; ++i) ids.push_back(b.input());
        for (int g = 0; g < 12; ++g) {
            const NodeId f[2] = {ids[rng() % ids.size()], ids[rng() % ids.size()]};
            const GateKind k = (rng() & 1) ? GateKind::Xor2 : ((rng() & 1) ? GateKind::And2 : GateKind::Or2);
            ids.push_back(b.gate(k, f));
        }
        b.output(ids.back());
        const auto c = std::move(b).finish();
        const auto p = fit(c, generate_dataset(c, 64 + rng() % 400, t));
        const auto cov = coverage(p, c);
        if (cov.covered == cov.reachable) CHECK(chain_equivalent(p, c));
    }
}

TEST_CASE("recovery sample size") {
    CHECK(recovery_sample_size(7, 0.05) == 178);
    CHECK(recovery_sample_size(1, 0.1) == static_cast<std::size_t>(std::ceil(4 * std::log(40.0))));
}

TEST_CASE("parity recovery with 200 samples across 100 seeds") {
    const auto r = recovery_trials(circuits::parity_tree(8), 200, 100, 1);
    CHECK(r.trials == 100);
    CHECK(r.successes >= 95);
}

TEST_CASE("sample complexity curve") {
    const std::vector<double> deltas{0.5, 0.2, 0.1, 0.05};
    const auto g = sample_complexity_curve(circuits::single_gate(GateKind::And2), deltas, {40, 1, 1u << 16});
    REQUIRE(g.rows.size() == 4);
    CHECK(g.rows[2].N <= 40);
    for (std::size_t i = 1; i < g.rows.size(); ++i) CHECK(g.rows[i].N >= g.rows[i - 1].N);

    // subquadratic growth of N in s across tree circuits
    std::vector<double> s, N;
    for (std::size_t n : {2, 4, 8, 16}) {
        const auto c = circuits::parity_tree(n);
        const std::vector<double> d{0.1};
        const auto cv = sample_complexity_curve(c, d, {20, 3, 1u << 18});
        s.push_back(static_cast<double>(cv.s));
        N.push_back(static_cast<double>(cv.rows[0].N));
    }
    CHECK(loglog_slope(s, N) < 2.0);
    CHECK_THROWS_AS(sample_complexity_curve(circuits::parity_tree(4), std::vector<double>{0.1}, {5, 1, 1024}), Error);
}

TEST_CASE("serialization round trips") {
    const auto c = circuits::ripple_adder(2);
    const auto ds = generate_dataset(c, 30, 4);
    const auto text = dataset_to_jsonl(ds);
    const auto back = dataset_from_jsonl(text);
    CHECK(back.samples == ds.samples);
    CHECK(dataset_to_jsonl(back) == text);
    const auto p = fit(c, ds);
    CHECK(predictors_to_json(predictors_from_json(predictors_to_json(p))) == predictors_to_json(p));
    CHECK_THROWS_AS(dataset_from_jsonl("{\"nodes\": 3}\n[0, 1]\n"), Error);
}
