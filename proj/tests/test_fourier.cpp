#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "error.hpp"
#include "fourier.hpp"

using namespace sparsec;
using nlohmann::json;

namespace {

// Term-by-term sum; points are masks with bit i set meaning x_i = -1.
Rational eval_mask(const FourierPoly& p, std::uint64_t point) {
    Rational s = 0;
    for (const auto& [mask, c] : p.terms) s += (__builtin_popcountll(mask & point) & 1) ? Rational(-c) : c;
    return s;
}

Rational eval_values(const FourierPoly& p, const std::vector<Rational>& v) {
    Rational s = 0;
    for (const auto& [mask, c] : p.terms) {
        Rational t = c;
        for (std::uint32_t i = 0; i < p.dim; ++i)
            if ((mask >> i) & 1) t *= v[i];
        s += t;
    }
    return s;
}

// Walsh-Hadamard transform of the nested evaluation.
std::map<std::uint64_t, Rational> nested_spectrum(const FourierPoly& f, const std::vector<FourierPoly>& g,
                                                  std::uint32_t d_prime) {
    const std::uint64_t N = std::uint64_t{1} << d_prime;
    std::vector<Rational> vals(N);
    for (std::uint64_t x = 0; x < N; ++x) {
        std::vector<Rational> inner;
        for (const auto& gi : g) inner.push_back(eval_mask(gi, x));
        vals[x] = eval_values(f, inner);
    }
    for (std::uint64_t len = 1; len < N; len <<= 1)
        for (std::uint64_t i = 0; i < N; i += 2 * len)
            for (std::uint64_t j = i; j < i + len; ++j) {
                const Rational a = vals[j], b = vals[j + len];
                vals[j] = a + b;
                vals[j + len] = a - b;
            }
    std::map<std::uint64_t, Rational> out;
    for (std::uint64_t s = 0; s < N; ++s)
        if (vals[s] != 0) out[s] = vals[s] / Rational(N);
    return out;
}

FourierPoly random_poly(std::mt19937_64& rng, std::uint32_t dim, std::size_t terms, int max_deg) {
    FourierPoly p;
    p.dim = dim;
    for (std::size_t t = 0; t < terms; ++t) {
        std::uint64_t mask = 0;
        const int deg = static_cast<int>(rng() % static_cast<std::uint64_t>(max_deg + 1));
        for (int k = 0; k < deg; ++k) mask |= std::uint64_t{1} << (rng() % dim);
        const long num = static_cast<long>(rng() % 9) - 4;
        p.terms[mask] += Rational(num == 0 ? 1 : num, static_cast<long>(1 + rng() % 3));
        if (p.terms[mask] == 0) p.terms.erase(mask);
    }
    return p;
}

std::uint64_t binom(std::uint64_t n, std::uint64_t k) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("evaluation") {
    const std::vector<int> x{1, -1, 1};
    CHECK(poly_evaluate(FourierPoly::constant(3, 3), x) == 3);
    CHECK(poly_evaluate(FourierPoly::monomial(2, 0b11), std::vector<int>{-1, -1}) == 1);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto p = random_poly(rng, 6, 5, 4);
        for (std::uint64_t pt = 0; pt < 64; ++pt) {
            std::vector<int> xs(6);
            for (int i = 0; i < 6; ++i) xs[i] = ((pt >> i) & 1) ? -1 : 1;
            CHECK(poly_evaluate(p, xs) == eval_mask(p, pt));
        }
    }
    CHECK_THROWS_AS(poly_evaluate(FourierPoly::constant(2, 1), std::vector<int>{1, 0}), Error);
    CHECK_THROWS_AS(poly_evaluate(FourierPoly::constant(2, 1), std::vector<int>{1}), Error);
}

TEST_CASE("monomial substitution") {
    const auto f = FourierPoly::monomial(2, 0b11);
    const std::vector<FourierPoly> g{FourierPoly::variable(2, 0), FourierPoly::variable(2, 1)};
    const auto h = compose(f, g);
    CHECK(h.sparsity() == 1);
    CHECK(h.degree() == 2);
    CHECK(h.terms.at(0b11) == 1);
}

TEST_CASE("binary-tree product of eight variables") {
    const auto stages = tree_product_example(3);
    REQUIRE(stages.size() == 3);
    const auto& h = stages.back().h;
    CHECK(h.sparsity() == 1);
    CHECK(h.degree() == 8);
    CHECK(h.terms.at(0xFF) == 1);
    for (const auto& s : stages) CHECK(s.bounds.pass());
}

TEST_CASE("compose equals the transform of nested evaluation, and the bounds hold") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 150; ++t) {
        const std::uint32_t d = 1 + static_cast<std::uint32_t>(rng() % 5);
        const std::uint32_t dp = 1 + static_cast<std::uint32_t>(rng() % 8);
        const auto f = random_poly(rng, d, 1 + rng() % 3, 2);
        std::vector<FourierPoly> g;
        for (std::uint32_t i = 0; i < d; ++i) g.push_back(random_poly(rng, dp, 1 + rng() % 3, 2));
        const auto h = compose(f, g);
        CHECK(h.terms == nested_spectrum(f, g, dp));
        CHECK(pointwise_equal(f, g, h));

        int k = f.degree(), kp = 0;
        std::uint64_t sp = 0;
        for (const auto& gi : g) {
            kp = std::max(kp, gi.degree());
            sp = std::max<std::uint64_t>(sp, gi.sparsity());
        }
        const auto b = check_bounds(f, g, h);
        CHECK(b.pass());
        CHECK(h.degree() <= k * kp);
        std::uint64_t prod = f.sparsity();
        for (int i = 0; i < k; ++i) prod *= sp;
        std::uint64_t bin = 0;
        for (std::uint64_t j = 0; j <= std::min<std::uint64_t>(dp, static_cast<std::uint64_t>(k * kp)); ++j) bin += binom(dp, j);
        CHECK(b.product_bound == prod);
        CHECK(b.binomial_bound == bin);
        CHECK(h.sparsity() <= std::min(prod, bin));
    }
}

TEST_CASE("s = 2, k = 2 outer with s' = 3 inner stays within 18 terms") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 30; ++t) {
        FourierPoly f;
        f.dim = 3;
        f.terms[0b011] = Rational(1, 2);
        f.terms[0b110] = Rational(-3, 2);
        std::vector<FourierPoly> g;
        for (int i = 0; i < 3; ++i) {
            FourierPoly gi;
            gi.dim = 8;
            while (gi.sparsity() < 3) gi.terms[rng() % 256] = Rational(static_cast<long>(1 + rng() % 4), 3);
            g.push_back(gi);
        }
        const auto h = compose(f, g);
        CHECK(h.sparsity() <= 18);
        CHECK(h.terms == nested_spectrum(f, g, 8));
    }
}

TEST_CASE("constant outer polynomial") {
    const auto f = FourierPoly::constant(2, Rational(5, 7));
    std::mt19937_64 rng(1);
    const std::vector<FourierPoly> g{random_poly(rng, 4, 3, 2), random_poly(rng, 4, 3, 2)};
    const auto h = compose(f, g);
    CHECK(h.sparsity() == 1);
    CHECK(check_bounds(f, g, h).pass());
}

TEST_CASE("random sweep") {
    const auto r = random_sweep({});
    CHECK(r.instances == 100);
    CHECK(r.bound_violations == 0);
    CHECK(r.pointwise_failures == 0);
    CHECK(r.max_ratio <= 1.0);
}

TEST_CASE("active variables against the flip oracle") {
    FourierPoly p;
    p.dim = 10;
    p.terms[0b0011] = 1;
    p.terms[0b0110] = 1;
    CHECK(active_variables(p) == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(active_variables(FourierPoly::constant(4, 2)).empty());
    std::mt19937_64 rng(3);
    for (int t = 0; t < 30; ++t) {
        const auto q = random_poly(rng, 10, 4, 3);
        std::vector<std::uint32_t> flips;
        for (std::uint32_t i = 0; i < 10; ++i) {
            bool changes = false;
            for (std::uint64_t x = 0; x < 1024 && !changes; ++x)
                changes = eval_mask(q, x) != eval_mask(q, x ^ (std::uint64_t{1} << i));
            if (changes) flips.push_back(i);
        }
        CHECK(active_variables(q) == flips);
    }
}

TEST_CASE("Parseval") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto p = random_poly(rng, 8, 6, 4);
        Rational mean = 0;
        for (std::uint64_t x = 0; x < 256; ++x) {
            const auto v = eval_mask(p, x);
            mean += v * v;
        }
        CHECK(parseval_mass(p) == mean / 256);
    }
}

TEST_CASE("rationals and JSON") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("-2") == Rational(-2));
    CHECK(parse_rational("0.125") == Rational(1, 8));
    CHECK(parse_rational("-1.5") == Rational(-3, 2));
    CHECK_THROWS_AS(parse_rational("1/0"), Error);
    CHECK_THROWS_AS(parse_rational("abc"), Error);
    CHECK(rational_to_string(Rational(-6, 4)) == "-3/2");
    CHECK(rational_to_string(Rational(4)) == "4");
    std::mt19937_64 rng(9);
    const auto p = random_poly(rng, 6, 5, 3);
    CHECK(poly_to_json(poly_from_json(poly_to_json(p))) == poly_to_json(p));
    CHECK(poly_from_json(poly_to_json(p)).terms == p.terms);
    CHECK_THROWS_AS(poly_from_json(json{{"dim", 2}, {"terms", {{{"vars", {5}}, {"coeff", "1"}}}}}), Error);
    CHECK_THROWS_AS(compose(FourierPoly::variable(2, 0), std::vector<FourierPoly>{FourierPoly::variable(2, 0)}), Error);
}
