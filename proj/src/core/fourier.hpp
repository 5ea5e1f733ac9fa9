#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace sparsec {

using Rational = boost::multiprecision::cpp_rational;

/// Polynomial over {-1,1}^dim in the character basis; bit i of a mask is variable i.
struct FourierPoly {
    std::uint32_t dim = 0;
    std::map<std::uint64_t, Rational> terms;   // never holds a zero coefficient

    std::size_t sparsity() const { return terms.size(); }
    int degree() const;   // 0 for constants and for the zero polynomial
    void check() const;

    static FourierPoly constant(std::uint32_t dim, const Rational& c);
    static FourierPoly variable(std::uint32_t dim, std::uint32_t i);
    static FourierPoly monomial(std::uint32_t dim, std::uint64_t mask, const Rational& c = 1);
};

inline constexpr std::uint32_t kMaxFourierDim = 64;

/// x entries must be -1 or 1 (BadPoint otherwise).
Rational poly_evaluate(const FourierPoly& p, std::span<const int> x);
double poly_evaluate_double(const FourierPoly& p, std::span<const int> x);

/// Evaluates the multilinear form at arbitrary rational values.
Rational poly_evaluate_at(const FourierPoly& p, std::span<const Rational> values);

FourierPoly operator+(const FourierPoly& a, const FourierPoly& b);
FourierPoly operator*(const FourierPoly& a, const FourierPoly& b);   // x_i^2 = 1

/// h(x) = f(g_1(x), ..., g_d(x)).
FourierPoly compose(const FourierPoly& f, std::span<const FourierPoly> g);

struct BoundsReport {
    int deg_h = 0, k = 0, k_prime = 0;
    std::uint64_t deg_bound = 0;             // k * k'
    std::uint64_t s = 0, s_prime = 0, s_h = 0;
    std::uint64_t product_bound = 0;         // s * s'^k, saturating
    std::uint64_t binomial_bound = 0;        // sum_{j <= min(d', k k')} C(d', j)
    std::uint64_t sparsity_bound = 0;        // min of the two
    bool degree_ok = true, sparsity_ok = true;
    double ratio = 0;                        // s_h / sparsity_bound
    bool pass() const { return degree_ok && sparsity_ok; }
};

BoundsReport check_bounds(const FourierPoly& f, std::span<const FourierPoly> g, const FourierPoly& h);

/// Union of the supports of all terms, ascending.
std::vector<std::uint32_t> active_variables(const FourierPoly& p);

/// Sum of squared coefficients.
Rational parseval_mass(const FourierPoly& p);

struct TreeStage {
    int level = 0;
    FourierPoly h;
    BoundsReport bounds;
};

/// Product of 2^levels variables by nested pairwise compositions of P(u1, u2) = u1 u2.
std::vector<TreeStage> tree_product_example(int levels = 3);

struct SweepReport {
    std::size_t instances = 0;
    std::size_t bound_violations = 0;
    std::size_t pointwise_failures = 0;
    double max_ratio = 0;
    std::uint64_t seed = 0;
};

struct SweepOptions {
    std::size_t instances = 100;
    std::uint32_t max_d = 8, max_d_prime = 8;
    std::size_t max_s = 4, max_s_prime = 3;
    int max_k = 3, max_k_prime = 2;
    std::uint64_t seed = 1;
    bool pointwise = true;   // exhaustive equality check over {-1,1}^{d'}
};

/// Random compositions with small rational coefficients.
SweepReport random_sweep(const SweepOptions& opts);

/// Exhaustively compares compose(f, g) to nested evaluation on every point of {-1,1}^{d'}.
bool pointwise_equal(const FourierPoly& f, std::span<const FourierPoly> g, const FourierPoly& h);

Rational parse_rational(const std::string& s);
std::string rational_to_string(const Rational& r);

FourierPoly poly_from_json(const nlohmann::json& j);
nlohmann::json poly_to_json(const FourierPoly& p);
nlohmann::json bounds_to_json(const BoundsReport& r);

}  // namespace sparsec
