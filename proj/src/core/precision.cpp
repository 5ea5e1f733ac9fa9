#include "precision.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "error.hpp"
#include "tm2circuit.hpp"

namespace sparsec {

using nlohmann::json;
using i128 = __int128;

void FixedPointFormat::check() const {
    if (frac_bits < 1) fail(ErrorCode::InvalidArgument, "frac_bits must be at least 1");
    if (int_bits < 0 || (is_signed && int_bits < 1)) fail(ErrorCode::InvalidArgument, "int_bits too small");
    if (width() > 64) fail(ErrorCode::WidthOverflow, "format wider than 64 bits");
}

std::vector<std::uint8_t> encode(std::span<const double> x, int n) {
    if (n < 1 || n > 62) fail(ErrorCode::OutOfRange, "n must be in [1, 62]");
    std::vector<std::uint8_t> bits;
    bits.reserve(x.size() * static_cast<std::size_t>(n));
    const std::uint64_t top = (std::uint64_t{1} << n) - 1;
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::OutOfRange, "coordinate " + std::to_string(v) + " outside [0,1]");
        const auto q = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(std::ldexp(v, n))), top);
        for (int k = n - 1; k >= 0; --k) bits.push_back(static_cast<std::uint8_t>((q >> k) & 1));
    }
    return bits;
}

std::vector<double> decode(std::span<const std::uint8_t> bits, const FixedPointFormat& fmt) {
    fmt.check();
    const auto w = static_cast<std::size_t>(fmt.width());
    if (bits.size() % w != 0)
        fail(ErrorCode::WidthMismatch, std::to_string(bits.size()) + " bits is not a multiple of " + std::to_string(w));
    std::vector<double> out;
    for (std::size_t base = 0; base < bits.size(); base += w) {
        i128 v = 0;
        for (std::size_t k = 0; k < w; ++k) v = (v << 1) | (bits[base + k] ? 1 : 0);
        if (fmt.is_signed && bits[base]) v -= i128{1} << w;
        out.push_back(std::ldexp(static_cast<double>(v), -fmt.frac_bits));
    }
    return out;
}

const char* op_name(OpCode op) {
    switch (op) {
        case OpCode::Load: return "LOAD";
        case OpCode::Const: return "CONST";
        case OpCode::Add: return "ADD";
        case OpCode::Sub: return "SUB";
        case OpCode::Mul: return "MUL";
        case OpCode::Shift: return "SHIFT";
        case OpCode::Output: return "OUTPUT";
    }
    return "?";
}

std::size_t BitProgram::output_count() const {
    return static_cast<std::size_t>(
        std::count_if(instructions.begin(), instructions.end(), [](const auto& i) { return i.op == OpCode::Output; }));
}

std::size_t BitProgram::register_count() const {
    std::size_t r = 0;
    for (const auto& i : instructions)
        if (i.op != OpCode::Output) r = std::max<std::size_t>(r, i.dst + 1);
    return r;
}

namespace {

constexpr int kMaxWidth = 64;

struct Sym {
    bool defined = false;
    int frac = 0;
    i128 lo = 0, hi = 0;            // range of the scaled integer
    std::vector<NodeId> bits;       // LSB first, two's complement
};

i128 pow2(int k) { return i128{1} << k; }

int width_for(i128 lo, i128 hi) {
    int w = 1;
    while (w < 120 && !(lo >= -pow2(w - 1) && hi <= pow2(w - 1) - 1)) ++w;
    return w;
}

i128 floor_shift(i128 v, int k) { return v >> k; }   // arithmetic shift floors

void check_width(int w, const std::string& what) {
    if (w > kMaxWidth) fail(ErrorCode::WidthOverflow, what + " needs " + std::to_string(w) + " bits");
}

bool dyadic(double v, int& frac, i128& scaled) {
    if (!std::isfinite(v)) return false;
    for (int f = 0; f <= 52; ++f) {
        const double s = std::ldexp(v, f);
        if (s == std::floor(s) && std::abs(s) < 9.0e15) {
            frac = f;
            scaled = static_cast<i128>(s);
            return true;
        }
    }
    return false;
}

// Walks the program once; with a builder it also emits gates.
class Lowering {
public:
    Lowering(const BitProgram& p, int n, int m_out, CircuitBuilder* b) : p_(p), n_(n), m_out_(m_out), b_(b) {}

    ProgramAnalysis run() {
        if (n_ < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
        if (m_out_ < 1) fail(ErrorCode::InvalidArgument, "m_out must be at least 1");
        if (p_.inputs < 1) fail(ErrorCode::InvalidArgument, "program needs at least one input");
        check_width(n_ + 1, "LOAD");
        ProgramAnalysis out;
        out.output_format = FixedPointFormat{m_out_, p_.int_bits, true};
        if (p_.int_bits < 1) fail(ErrorCode::InvalidArgument, "int_bits must be at least 1 (sign bit)");
        check_width(out.output_format.width(), "output format");

        if (b_) {
            for (std::uint32_t c = 0; c < p_.inputs; ++c)
                for (int k = 0; k < n_; ++k) input_.push_back(b_->input());
        }
        regs_.assign(p_.register_count(), Sym{});
        std::size_t index = 0;
        for (const auto& ins : p_.instructions) {
            where_ = "instruction " + std::to_string(index++) + " (" + op_name(ins.op) + ")";
            step(ins);
        }
        if (p_.output_count() == 0) fail(ErrorCode::InvalidArgument, "program has no OUTPUT");
        out.registers.resize(regs_.size());
        for (std::size_t r = 0; r < regs_.size(); ++r) {
            const auto& s = regs_[r];
            if (!s.defined) continue;
            auto& info = out.registers[r];
            const int w = width_for(s.lo, s.hi);
            info.format = FixedPointFormat{std::max(s.frac, 1), w - s.frac, true};
            info.lo = std::ldexp(static_cast<double>(s.lo), -s.frac);
            info.hi = std::ldexp(static_cast<double>(s.hi), -s.frac);
        }
        return out;
    }

private:
    const Sym& operand(std::uint32_t r) {
        if (r >= regs_.size() || !regs_[r].defined)
            fail(ErrorCode::InvalidArgument, where_ + " reads undefined register " + std::to_string(r));
        return regs_[r];
    }

    void assign(std::uint32_t r, Sym s) {
        if (r >= regs_.size()) regs_.resize(r + 1);
        if (regs_[r].defined) fail(ErrorCode::InvalidArgument, where_ + " reassigns register " + std::to_string(r));
        const int w = width_for(s.lo, s.hi);
        check_width(w, where_);
        if (b_) s.bits = resize(s.bits, w);
        s.defined = true;
        regs_[r] = std::move(s);
    }

    std::vector<NodeId> resize(std::vector<NodeId> bits, int w) const {
        const auto sign = bits.empty() ? b_->constant(false) : bits.back();
        bits.resize(static_cast<std::size_t>(w), sign);
        return bits;
    }

    // Multiplies the value scale by 2^k by appending k zero fraction bits.
    Sym refine(const Sym& s, int frac) const {
        Sym r = s;
        const int k = frac - s.frac;
        if (k <= 0) return r;
        r.frac = frac;
        r.lo = s.lo * pow2(k);
        r.hi = s.hi * pow2(k);
        if (b_) {
            r.bits.assign(static_cast<std::size_t>(k), b_->constant(false));
            r.bits.insert(r.bits.end(), s.bits.begin(), s.bits.end());
        }
        return r;
    }

    std::vector<NodeId> add_bits(const std::vector<NodeId>& x, const std::vector<NodeId>& y, NodeId carry) const {
        std::vector<NodeId> s(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto t = b_->xor_(x[i], y[i]);
            s[i] = b_->xor_(t, carry);
            carry = b_->or_(b_->and_(x[i], y[i]), b_->and_(carry, t));
        }
        return s;
    }

    void step(const Instruction& ins) {
        Sym r;
        switch (ins.op) {
            case OpCode::Load: {
                if (ins.coord >= p_.inputs) fail(ErrorCode::InvalidArgument, where_ + " loads a missing coordinate");
                r.frac = n_;
                r.lo = 0;
                r.hi = pow2(n_) - 1;
                if (b_) {
                    for (int k = n_ - 1; k >= 0; --k) r.bits.push_back(input_[ins.coord * n_ + k]);
                    r.bits.push_back(b_->constant(false));
                }
                break;
            }
            case OpCode::Const: {
                i128 v = 0;
                if (!dyadic(ins.value, r.frac, v)) fail(ErrorCode::InvalidArgument, where_ + " constant is not dyadic");
                r.lo = r.hi = v;
                if (b_) {
                    const int w = width_for(v, v);
                    for (int k = 0; k < w; ++k) r.bits.push_back(b_->constant(((v >> k) & 1) != 0));
                }
                break;
            }
            case OpCode::Add:
            case OpCode::Sub: {
                const int f = std::max(operand(ins.a).frac, operand(ins.b).frac);
                const auto x = refine(operand(ins.a), f), y = refine(operand(ins.b), f);
                r.frac = f;
                if (ins.op == OpCode::Add) {
                    r.lo = x.lo + y.lo;
                    r.hi = x.hi + y.hi;
                } else {
                    r.lo = x.lo - y.hi;
                    r.hi = x.hi - y.lo;
                }
                if (b_) {
                    const int w = width_for(r.lo, r.hi);
                    const auto xb = resize(x.bits, w);
                    auto yb = resize(y.bits, w);
                    if (ins.op == OpCode::Sub)
                        for (auto& bit : yb) bit = b_->not_(bit);
                    r.bits = add_bits(xb, yb, b_->constant(ins.op == OpCode::Sub));
                }
                break;
            }
            case OpCode::Mul: {
                const auto& x = operand(ins.a);
                const auto& y = operand(ins.b);
                const i128 c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
                r.frac = x.frac + y.frac;
                r.lo = *std::min_element(c, c + 4);
                r.hi = *std::max_element(c, c + 4);
                const int w = width_for(r.lo, r.hi);
                check_width(w, where_ + " exact product");
                if (b_) {
                    const auto xb = resize(x.bits, w), yb = resize(y.bits, w);
                    std::vector<NodeId> acc(static_cast<std::size_t>(w), b_->constant(false));
                    for (int i = 0; i < w; ++i) {
                        std::vector<NodeId> row(static_cast<std::size_t>(w), b_->constant(false));
                        for (int j = i; j < w; ++j) row[j] = b_->and_(xb[j - i], yb[i]);
                        acc = add_bits(acc, row, b_->constant(false));
                    }
                    r.bits = std::move(acc);
                }
                if (r.frac > m_out_) truncate(r, r.frac - m_out_);
                break;
            }
            case OpCode::Shift: {
                const auto& x = operand(ins.a);
                r = x;
                if (ins.amount <= 0) {
                    r.frac = x.frac - ins.amount;
                } else if (ins.amount <= x.frac) {
                    r.frac = x.frac - ins.amount;
                } else {
                    const int k = ins.amount - x.frac;
                    r = refine(x, x.frac + k);
                    r.frac = 0;
                }
                break;
            }
            case OpCode::Output: {
                Sym o = operand(ins.a);
                if (o.frac > m_out_) truncate(o, o.frac - m_out_);
                o = refine(o, m_out_);
                const int I = p_.int_bits;
                const i128 lim = pow2(I - 1 + m_out_);
                if (o.lo < -lim || o.hi > lim - 1)
                    fail(ErrorCode::WidthOverflow, where_ + " value range does not fit the signed output format with " +
                                                       std::to_string(I) + " integer bits");
                if (b_) {
                    const auto bits = resize(o.bits, I + m_out_);
                    for (auto it = bits.rbegin(); it != bits.rend(); ++it) b_->output(*it);
                }
                return;
            }
        }
        assign(ins.dst, std::move(r));
    }

    void truncate(Sym& s, int k) const {
        s.frac -= k;
        s.lo = floor_shift(s.lo, k);
        s.hi = floor_shift(s.hi, k);
        if (b_) s.bits.erase(s.bits.begin(), s.bits.begin() + std::min<std::ptrdiff_t>(k, s.bits.size()));
    }

    const BitProgram& p_;
    int n_, m_out_;
    CircuitBuilder* b_;
    std::vector<NodeId> input_;
    std::vector<Sym> regs_;
    std::string where_;
};

}  // namespace

ProgramAnalysis analyze_program(const BitProgram& p, int n, int m_out) {
    return Lowering(p, n, m_out, nullptr).run();
}

Circuit compile_bitprogram(const BitProgram& p, int n, int m_out) {
    CircuitBuilder b(p.name + "_n" + std::to_string(n) + "_m" + std::to_string(m_out));
    Lowering(p, n, m_out, &b).run();
    return std::move(b).finish();
}

std::vector<double> program_real_eval(const BitProgram& p, std::span<const double> x) {
    if (x.size() != p.inputs)
        fail(ErrorCode::DimensionMismatch, "program takes " + std::to_string(p.inputs) + " inputs");
    std::map<std::uint32_t, long double> reg;
    auto get = [&](std::uint32_t r) {
        auto it = reg.find(r);
        if (it == reg.end()) fail(ErrorCode::InvalidArgument, "undefined register " + std::to_string(r));
        return it->second;
    };
    std::vector<double> out;
    for (const auto& ins : p.instructions) {
        switch (ins.op) {
            case OpCode::Load:
                if (ins.coord >= x.size()) fail(ErrorCode::InvalidArgument, "missing coordinate");
                reg[ins.dst] = x[ins.coord];
                break;
            case OpCode::Const: reg[ins.dst] = ins.value; break;
            case OpCode::Add: reg[ins.dst] = get(ins.a) + get(ins.b); break;
            case OpCode::Sub: reg[ins.dst] = get(ins.a) - get(ins.b); break;
            case OpCode::Mul: reg[ins.dst] = get(ins.a) * get(ins.b); break;
            case OpCode::Shift: reg[ins.dst] = std::ldexp(get(ins.a), ins.amount); break;
            case OpCode::Output: out.push_back(static_cast<double>(get(ins.a))); break;
        }
    }
    return out;
}

BitProgram program_from_json(const json& j) {
    try {
        BitProgram p;
        p.name = j.value("name", std::string("program"));
        p.inputs = j.at("inputs").get<std::uint32_t>();
        p.int_bits = j.value("int_bits", 2);
        for (const auto& ji : j.at("instructions")) {
            Instruction ins;
            const auto op = ji.at("op").get<std::string>();
            if (op == "LOAD") {
                ins.op = OpCode::Load;
                ins.dst = ji.at("dst");
                ins.coord = ji.at("coord");
            } else if (op == "CONST") {
                ins.op = OpCode::Const;
                ins.dst = ji.at("dst");
                ins.value = ji.at("value");
            } else if (op == "ADD" || op == "SUB" || op == "MUL") {
                ins.op = op == "ADD" ? OpCode::Add : op == "SUB" ? OpCode::Sub : OpCode::Mul;
                ins.dst = ji.at("dst");
                ins.a = ji.at("a");
                ins.b = ji.at("b");
            } else if (op == "SHIFT") {
                ins.op = OpCode::Shift;
                ins.dst = ji.at("dst");
                ins.a = ji.at("a");
                ins.amount = ji.at("amount");
            } else if (op == "OUTPUT") {
                ins.op = OpCode::Output;
                ins.a = ji.at("src");
            } else {
                fail(ErrorCode::Parse, "unknown op '" + op + "'");
            }
            p.instructions.push_back(ins);
        }
        return p;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("program JSON: ") + e.what());
    }
}

json program_to_json(const BitProgram& p) {
    json ins = json::array();
    for (const auto& i : p.instructions) {
        json ji{{"op", op_name(i.op)}};
        switch (i.op) {
            case OpCode::Load: ji["dst"] = i.dst; ji["coord"] = i.coord; break;
            case OpCode::Const: ji["dst"] = i.dst; ji["value"] = i.value; break;
            case OpCode::Add:
            case OpCode::Sub:
            case OpCode::Mul: ji["dst"] = i.dst; ji["a"] = i.a; ji["b"] = i.b; break;
            case OpCode::Shift: ji["dst"] = i.dst; ji["a"] = i.a; ji["amount"] = i.amount; break;
            case OpCode::Output: ji["src"] = i.a; break;
        }
        ins.push_back(std::move(ji));
    }
    return json{{"name", p.name}, {"inputs", p.inputs}, {"int_bits", p.int_bits}, {"instructions", std::move(ins)}};
}

namespace programs {

BitProgram square() {
    BitProgram p;
    p.name = "square";
    Instruction load{OpCode::Load, 0};
    Instruction mul{OpCode::Mul, 1, 0, 0};
    Instruction out{OpCode::Output, 0, 1};
    p.instructions = {load, mul, out};
    return p;
}

BitProgram identity() {
    BitProgram p;
    p.name = "identity";
    p.instructions = {Instruction{OpCode::Load, 0}, Instruction{OpCode::Output, 0, 0}};
    return p;
}

BitProgram doubling() {
    BitProgram p;
    p.name = "doubling";
    p.instructions = {Instruction{OpCode::Load, 0}, Instruction{OpCode::Add, 1, 0, 0}, Instruction{OpCode::Output, 0, 1}};
    return p;
}

BitProgram zero() {
    BitProgram p;
    p.name = "zero";
    Instruction c{OpCode::Const, 0};
    c.value = 0.0;
    p.instructions = {c, Instruction{OpCode::Output, 0, 0}};
    return p;
}

}  // namespace programs

PrecisionFamily family_from_program(const BitProgram& p, int n, int m_out) {
    PrecisionFamily f;
    f.source = p;
    f.d = p.inputs;
    f.m = p.output_count();
    f.n = n;
    f.m_out = m_out;
    f.int_bits = p.int_bits;
    return f;
}

FixedPointFormat output_format(const PrecisionFamily& fam) {
    return FixedPointFormat{fam.m_out, fam.int_bits, true};
}

Circuit family_circuit(const PrecisionFamily& fam) {
    if (fam.n < 1 || fam.m_out < 1) fail(ErrorCode::InvalidArgument, "n and m_out must be at least 1");
    if (const auto* p = std::get_if<BitProgram>(&fam.source)) return compile_bitprogram(*p, fam.n, fam.m_out);
    const auto& tm = std::get<TuringMachine>(fam.source);
    const std::size_t bits_in = fam.d * static_cast<std::size_t>(fam.n);
    const auto want = fam.m * static_cast<std::size_t>(output_format(fam).width());
    if (tm.output_cells != want)
        fail(ErrorCode::WidthMismatch, "machine writes " + std::to_string(tm.output_cells) + " output cells, format needs " +
                                           std::to_string(want));
    return unroll(tm, bits_in, auto_time_bound(tm, bits_in)).circuit;
}

EndToEndReport end_to_end_check(const PrecisionFamily& fam, const RealFunction& f_reference, double L_f,
                                std::size_t samples, const EndToEndOptions& opts) {
    if (!(L_f >= 0.0)) fail(ErrorCode::InvalidArgument, "L_f must be non-negative");
    const auto fmt = output_format(fam);
    const auto circuit = family_circuit(fam);
    EndToEndReport r;
    r.n = fam.n;
    r.m_out = fam.m_out;
    r.samples = samples;
    r.seed = opts.seed;
    r.L_f = L_f;
    r.bound = std::ldexp(1.0, -fam.m_out) + L_f * std::ldexp(1.0, -fam.n);
    r.certificate = certify_sparsity(circuit);
    r.budget = plan_budget(circuit, std::ldexp(1.0, -fam.m_out), opts.neuralize);
    const auto nn = neuralize_circuit(circuit, r.budget, opts.neuralize);
    r.network_layers = nn.net.layers.size();
    r.network_width = nn.net.max_width();
    r.gadget_stages = nn.gadget_stages;
    r.max_stage_lipschitz = nn.max_stage_lipschitz;

    std::mt19937_64 rng(opts.seed);
    std::vector<double> x(fam.d), xin;
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& v : x) v = std::ldexp(static_cast<double>(rng() >> 11), -53);
        const auto bits = encode(x, fam.n);
        xin.assign(bits.begin(), bits.end());
        const auto out_bits = threshold_outputs(net_evaluate(nn.net, xin));
        if (out_bits != evaluate(circuit, bits)) ++r.network_mismatches;
        const auto y = decode(out_bits, fmt);
        const auto ref = f_reference(x);
        if (ref.size() != y.size())
            fail(ErrorCode::DimensionMismatch, "reference returns " + std::to_string(ref.size()) + " values, family has " +
                                                   std::to_string(y.size()));
        for (std::size_t i = 0; i < y.size(); ++i) r.measured_error = std::max(r.measured_error, std::abs(y[i] - ref[i]));
    }
    r.pass = r.network_mismatches == 0 && r.measured_error <= r.bound * (1.0 + 1e-12);
    return r;
}

json end_to_end_to_json(const EndToEndReport& r) {
    return json{{"n", r.n},
                {"m_out", r.m_out},
                {"samples", r.samples},
                {"seed", r.seed},
                {"L_f", r.L_f},
                {"measured_error", r.measured_error},
                {"bound", r.bound},
                {"network_mismatches", r.network_mismatches},
                {"certificate", certificate_to_json(r.certificate)},
                {"network_layers", r.network_layers},
                {"network_width", r.network_width},
                {"gadget_stages", r.gadget_stages},
                {"max_stage_lipschitz", r.max_stage_lipschitz},
                {"eps_gate", r.budget.eps_gate},
                {"eps_total", r.budget.eps_total},
                {"pass", r.pass}};
}

}  // namespace sparsec
