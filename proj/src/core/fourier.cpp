#include "fourier.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <random>

#include "error.hpp"

namespace sparsec {

using nlohmann::json;
using boost::multiprecision::cpp_int;

int FourierPoly::degree() const {
    int d = 0;
    for (const auto& [mask, c] : terms) d = std::max(d, std::popcount(mask));
    return d;
}

void FourierPoly::check() const {
    if (dim > kMaxFourierDim) fail(ErrorCode::DimensionMismatch, "dimension above 64");
    const std::uint64_t allowed = dim == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << dim) - 1);
    for (const auto& [mask, c] : terms) {
        if (mask & ~allowed) fail(ErrorCode::DimensionMismatch, "term uses a variable outside the dimension");
        if (c == 0) fail(ErrorCode::InvalidArgument, "zero coefficient stored");
    }
}

FourierPoly FourierPoly::constant(std::uint32_t dim, const Rational& c) { return monomial(dim, 0, c); }

FourierPoly FourierPoly::variable(std::uint32_t dim, std::uint32_t i) {
    if (i >= dim) fail(ErrorCode::DimensionMismatch, "variable index outside the dimension");
    return monomial(dim, std::uint64_t{1} << i);
}

FourierPoly FourierPoly::monomial(std::uint32_t dim, std::uint64_t mask, const Rational& c) {
    FourierPoly p;
    p.dim = dim;
    if (c != 0) p.terms.emplace(mask, c);
    p.check();
    return p;
}

namespace {

std::uint64_t point_mask(const FourierPoly& p, std::span<const int> x) {
    if (x.size() != p.dim)
        fail(ErrorCode::BadPoint, "point has " + std::to_string(x.size()) + " entries, dimension is " + std::to_string(p.dim));
    std::uint64_t neg = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == -1)
            neg |= std::uint64_t{1} << i;
        else if (x[i] != 1)
            fail(ErrorCode::BadPoint, "entry " + std::to_string(i) + " is not in {-1, 1}");
    }
    return neg;
}

}  // namespace

Rational poly_evaluate(const FourierPoly& p, std::span<const int> x) {
    const auto neg = point_mask(p, x);
    Rational s = 0;
    for (const auto& [mask, c] : p.terms) {
        if (std::popcount(mask & neg) & 1)
            s -= c;
        else
            s += c;
    }
    return s;
}

double poly_evaluate_double(const FourierPoly& p, std::span<const int> x) {
    const auto neg = point_mask(p, x);
    double s = 0;
    for (const auto& [mask, c] : p.terms) {
        const double v = static_cast<double>(c);
        s += (std::popcount(mask & neg) & 1) ? -v : v;
    }
    return s;
}

Rational poly_evaluate_at(const FourierPoly& p, std::span<const Rational> values) {
    if (values.size() != p.dim) fail(ErrorCode::DimensionMismatch, "value count differs from the dimension");
    Rational s = 0;
    for (const auto& [mask, c] : p.terms) {
        Rational t = c;
        for (std::uint64_t m = mask; m; m &= m - 1) t *= values[static_cast<std::size_t>(std::countr_zero(m))];
        s += t;
    }
    return s;
}

FourierPoly operator+(const FourierPoly& a, const FourierPoly& b) {
    if (a.dim != b.dim) fail(ErrorCode::DimensionMismatch, "adding polynomials of different dimension");
    FourierPoly r = a;
    for (const auto& [mask, c] : b.terms) {
        auto& v = r.terms[mask];
        v += c;
        if (v == 0) r.terms.erase(mask);
    }
    return r;
}

FourierPoly operator*(const FourierPoly& a, const FourierPoly& b) {
    if (a.dim != b.dim) fail(ErrorCode::DimensionMismatch, "multiplying polynomials of different dimension");
    FourierPoly r;
    r.dim = a.dim;
    for (const auto& [ma, ca] : a.terms)
        for (const auto& [mb, cb] : b.terms) r.terms[ma ^ mb] += ca * cb;
    for (auto it = r.terms.begin(); it != r.terms.end();) it = it->second == 0 ? r.terms.erase(it) : std::next(it);
    return r;
}

FourierPoly compose(const FourierPoly& f, std::span<const FourierPoly> g) {
    f.check();
    if (g.size() != f.dim)
        fail(ErrorCode::DimensionMismatch, "f has " + std::to_string(f.dim) + " variables, got " + std::to_string(g.size()) +
                                               " substitutions");
    const std::uint32_t dp = g.empty() ? 0 : g[0].dim;
    for (const auto& gi : g) {
        gi.check();
        if (gi.dim != dp) fail(ErrorCode::DimensionMismatch, "substituted polynomials differ in dimension");
    }
    FourierPoly h;
    h.dim = dp;
    for (const auto& [mask, c] : f.terms) {
        auto t = FourierPoly::constant(dp, c);
        for (std::uint64_t m = mask; m && !t.terms.empty(); m &= m - 1) t = t * g[static_cast<std::size_t>(std::countr_zero(m))];
        h = h + t;
    }
    return h;
}

namespace {

constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > kSat / b) return kSat;
    return a * b;
}

std::uint64_t binomial_prefix(std::uint64_t n, std::uint64_t upto) {
    // sum_{j=0}^{min(n, upto)} C(n, j), n <= 64, saturating.
    std::uint64_t total = 0;
    boost::multiprecision::cpp_int c = 1;
    for (std::uint64_t j = 0; j <= std::min(n, upto); ++j) {
        if (j > 0) c = c * (n - j + 1) / j;
        const boost::multiprecision::cpp_int t = c + total;
        total = t > kSat ? kSat : static_cast<std::uint64_t>(t);
    }
    return total;
}

}  // namespace

BoundsReport check_bounds(const FourierPoly& f, std::span<const FourierPoly> g, const FourierPoly& h) {
    BoundsReport r;
    r.k = f.degree();
    r.s = f.sparsity();
    for (const auto& gi : g) {
        r.k_prime = std::max(r.k_prime, gi.degree());
        r.s_prime = std::max<std::uint64_t>(r.s_prime, gi.sparsity());
    }
    r.deg_h = h.degree();
    r.s_h = h.sparsity();
    r.deg_bound = static_cast<std::uint64_t>(r.k) * static_cast<std::uint64_t>(r.k_prime);
    std::uint64_t pw = 1;
    for (int i = 0; i < r.k; ++i) pw = sat_mul(pw, r.s_prime);
    r.product_bound = sat_mul(r.s, pw);
    r.binomial_bound = binomial_prefix(h.dim, r.deg_bound);
    r.sparsity_bound = std::min(r.product_bound, r.binomial_bound);
    r.degree_ok = static_cast<std::uint64_t>(r.deg_h) <= r.deg_bound;
    r.sparsity_ok = r.s_h <= r.sparsity_bound;
    r.ratio = r.sparsity_bound == 0 ? 0.0 : static_cast<double>(r.s_h) / static_cast<double>(r.sparsity_bound);
    return r;
}

std::vector<std::uint32_t> active_variables(const FourierPoly& p) {
    std::uint64_t all = 0;
    for (const auto& [mask, c] : p.terms) all |= mask;
    std::vector<std::uint32_t> out;
    for (std::uint64_t m = all; m; m &= m - 1) out.push_back(static_cast<std::uint32_t>(std::countr_zero(m)));
    return out;
}

Rational parseval_mass(const FourierPoly& p) {
    Rational s = 0;
    for (const auto& [mask, c] : p.terms) s += c * c;
    return s;
}

std::vector<TreeStage> tree_product_example(int levels) {
    if (levels < 1 || levels > 6) fail(ErrorCode::OutOfRange, "levels must be in [1, 6]");
    const std::uint32_t d = 1u << levels;
    FourierPoly pair = FourierPoly::monomial(2, 0b11);
    std::vector<FourierPoly> cur;
    for (std::uint32_t i = 0; i < d; ++i) cur.push_back(FourierPoly::variable(d, i));
    std::vector<TreeStage> stages;
    for (int lvl = 1; lvl <= levels; ++lvl) {
        std::vector<FourierPoly> next;
        for (std::size_t i = 0; i + 1 < cur.size(); i += 2) {
            const FourierPoly g[2] = {cur[i], cur[i + 1]};
            next.push_back(compose(pair, g));
            if (i == 0) stages.push_back(TreeStage{lvl, next.back(), check_bounds(pair, g, next.back())});
        }
        cur = std::move(next);
    }
    return stages;
}

bool pointwise_equal(const FourierPoly& f, std::span<const FourierPoly> g, const FourierPoly& h) {
    const std::uint32_t dp = h.dim;
    if (dp > 20) fail(ErrorCode::TooManyInputs, "pointwise check limited to 20 variables");
    std::vector<int> x(dp);
    std::vector<Rational> vals(g.size());
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << dp); ++idx) {
        for (std::uint32_t i = 0; i < dp; ++i) x[i] = ((idx >> i) & 1) ? -1 : 1;
        for (std::size_t i = 0; i < g.size(); ++i) vals[i] = poly_evaluate(g[i], x);
        if (poly_evaluate_at(f, vals) != poly_evaluate(h, x)) return false;
    }
    return true;
}

namespace {

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

Rational random_coeff(std::mt19937_64& rng) {
    const auto p = static_cast<long long>(below(rng, 10)) - 5;
    const auto q = static_cast<long long>(below(rng, 4)) + 1;
    return Rational(p == 0 ? 1 : p, q);
}

FourierPoly random_poly(std::mt19937_64& rng, std::uint32_t dim, std::size_t max_s, int max_k) {
    FourierPoly p;
    p.dim = dim;
    const auto s = 1 + below(rng, max_s);
    const int k = static_cast<int>(std::min<std::uint64_t>(max_k, dim));
    for (std::uint64_t t = 0; t < s; ++t) {
        const auto deg = static_cast<int>(below(rng, static_cast<std::uint64_t>(k) + 1));
        std::uint64_t mask = 0;
        while (std::popcount(mask) < deg) mask |= std::uint64_t{1} << below(rng, dim);
        p.terms[mask] += random_coeff(rng);
        if (p.terms[mask] == 0) p.terms.erase(mask);
    }
    return p;
}

}  // namespace

SweepReport random_sweep(const SweepOptions& opts) {
    SweepReport rep;
    rep.seed = opts.seed;
    std::mt19937_64 rng(opts.seed);
    for (std::size_t it = 0; it < opts.instances; ++it) {
        const auto d = static_cast<std::uint32_t>(1 + below(rng, opts.max_d));
        const auto dp = static_cast<std::uint32_t>(1 + below(rng, opts.max_d_prime));
        const auto f = random_poly(rng, d, opts.max_s, opts.max_k);
        std::vector<FourierPoly> g;
        for (std::uint32_t i = 0; i < d; ++i) g.push_back(random_poly(rng, dp, opts.max_s_prime, opts.max_k_prime));
        const auto h = compose(f, g);
        const auto b = check_bounds(f, g, h);
        ++rep.instances;
        if (!b.pass()) ++rep.bound_violations;
        rep.max_ratio = std::max(rep.max_ratio, b.ratio);
        if (opts.pointwise && !pointwise_equal(f, g, h)) ++rep.pointwise_failures;
    }
    return rep;
}

Rational parse_rational(const std::string& raw) {
    std::string s;
    for (char ch : raw)
        if (ch != ' ') s.push_back(ch);
    auto integer = [&](const std::string& t) {
        if (t.empty() || t == "-" || t == "+") fail(ErrorCode::Parse, "bad rational '" + raw + "'");
        std::size_t start = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        for (std::size_t i = start; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') fail(ErrorCode::Parse, "bad rational '" + raw + "'");
        cpp_int v(t[0] == '+' ? t.substr(1) : t);
        return v;
    };
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const auto den = integer(s.substr(slash + 1));
        if (den == 0) fail(ErrorCode::Parse, "zero denominator in '" + raw + "'");
        return Rational(integer(s.substr(0, slash)), den);
    }
    if (const auto dot = s.find('.'); dot != std::string::npos) {
        const auto frac = s.substr(dot + 1);
        cpp_int scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        const bool neg = !s.empty() && s[0] == '-';
        auto whole = s.substr(0, dot);
        if (whole.empty() || whole == "-" || whole == "+") whole += "0";
        const Rational w(integer(whole));
        const Rational f = frac.empty() ? Rational(0) : Rational(integer(frac), scale);
        return neg ? Rational(w - f) : Rational(w + f);
    }
    return Rational(integer(s));
}

std::string rational_to_string(const Rational& r) {
    const auto num = boost::multiprecision::numerator(r);
    const auto den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

FourierPoly poly_from_json(const json& j) {
    try {
        FourierPoly p;
        p.dim = j.at("dim").get<std::uint32_t>();
        if (p.dim > kMaxFourierDim) fail(ErrorCode::DimensionMismatch, "dimension above 64");
        for (const auto& t : j.at("terms")) {
            std::uint64_t mask = 0;
            for (const auto& v : t.at("vars")) {
                const auto i = v.get<std::uint32_t>();
                if (i >= p.dim) fail(ErrorCode::DimensionMismatch, "variable " + std::to_string(i) + " outside dimension");
                mask |= std::uint64_t{1} << i;
            }
            const auto& jc = t.at("coeff");
            const Rational c = jc.is_string() ? parse_rational(jc.get<std::string>())
                               : jc.is_number_integer() ? Rational(jc.get<long long>())
                                                        : parse_rational(jc.dump());
            auto& slot = p.terms[mask];
            slot += c;
            if (slot == 0) p.terms.erase(mask);
        }
        return p;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("polynomial JSON: ") + e.what());
    }
}

json poly_to_json(const FourierPoly& p) {
    json terms = json::array();
    for (const auto& [mask, c] : p.terms) {
        json vars = json::array();
        for (std::uint64_t m = mask; m; m &= m - 1) vars.push_back(std::countr_zero(m));
        terms.push_back(json{{"vars", std::move(vars)}, {"coeff", rational_to_string(c)}});
    }
    return json{{"dim", p.dim}, {"terms", std::move(terms)}};
}

json bounds_to_json(const BoundsReport& r) {
    return json{{"deg_h", r.deg_h},
                {"deg_bound", r.deg_bound},
                {"k", r.k},
                {"k_prime", r.k_prime},
                {"s", r.s},
                {"s_prime", r.s_prime},
                {"s_h", r.s_h},
                {"product_bound", r.product_bound},
                {"binomial_bound", r.binomial_bound},
                {"sparsity_bound", r.sparsity_bound},
                {"degree_ok", r.degree_ok},
                {"sparsity_ok", r.sparsity_ok},
                {"ratio", r.ratio},
                {"pass", r.pass()}};
}

}  // namespace sparsec
