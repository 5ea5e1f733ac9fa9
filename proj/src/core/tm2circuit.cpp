#include "tm2circuit.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace sparsec {

namespace {

std::size_t dest_cell(std::size_t i, Move mv, std::size_t cells) {
    if (mv == Move::Left) return i == 0 ? 0 : i - 1;
    if (mv == Move::Right) return i + 1 >= cells ? i : i + 1;
    return i;
}

void verify_halting(const UnrollResult& r, std::size_t n) {
    if (n > 20) return;
    const auto& c = r.circuit;
    const std::uint64_t total = std::uint64_t{1} << n;
    std::vector<std::uint64_t> words(n);
    for (std::uint64_t base = 0; base < total; base += 64) {
        for (std::size_t k = 0; k < n; ++k) {
            std::uint64_t w = 0;
            for (std::uint64_t lane = 0; lane < 64 && base + lane < total; ++lane) {
                if (((base + lane) >> (n - 1 - k)) & 1) w |= std::uint64_t{1} << lane;
            }
            words[k] = w;
        }
        const auto v = evaluate_packed(c, words);
        const auto lanes = std::min<std::uint64_t>(64, total - base);
        const std::uint64_t valid = lanes == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << lanes) - 1);
        const std::uint64_t missing = ~v[r.halted] & valid;
        if (missing) {
            const auto idx = base + static_cast<std::uint64_t>(std::countr_zero(missing));
            std::string bits;
            for (auto b : assignment_bits(idx, n)) bits.push_back(b ? '1' : '0');
            fail(ErrorCode::TimeBoundExceeded, "input " + bits + " does not halt within " +
                                                   std::to_string(r.time_bound) + " steps");
        }
    }
}

}  // namespace

std::uint64_t auto_time_bound(const TuringMachine& m, std::size_t n) {
    return time_bound_poly(m, n, m.output_cells);
}

UnrollResult unroll(const TuringMachine& m, std::size_t n, std::uint64_t time_bound, UnrollOptions opts) {
    m.check();
    if (n < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
    if (time_bound < 1) fail(ErrorCode::InvalidArgument, "time_bound must be at least 1");

    const std::size_t Q = m.state_count(), G = m.symbol_count();
    const std::size_t cells = tape_length(m, n, time_bound);
    const std::size_t rows = time_bound + 1;

    CircuitBuilder b(m.name + "_unrolled_n" + std::to_string(n) + "_T" + std::to_string(time_bound));
    UnrollResult result;
    result.time_bound = time_bound;
    result.tableau.rows = rows;
    result.tableau.cols = cells;
    result.tableau.cells.reserve(rows * cells);

    const NodeId zero = b.constant(false), one = b.constant(true);

    // Row 0: input bits, blanks, head at cell 0 in the start state.
    std::vector<CellGroup> row(cells);
    for (std::size_t j = 0; j < cells; ++j) {
        auto& g = row[j];
        g.symbol.assign(G, zero);
        g.state.assign(Q, zero);
        if (j < n) {
            const auto x = b.input();
            g.symbol[m.one] = x;
            g.symbol[m.zero] = b.not_(x);
        } else {
            g.symbol[m.blank] = one;
        }
        if (j == 0) g.state[m.start] = one;
        g.head = b.or_all(g.state);
    }
    for (const auto& g : row) result.tableau.cells.push_back(g);

    std::vector<std::vector<NodeId>> state_in(cells * Q), symbol_in(cells * G);
    for (std::uint64_t t = 0; t < time_bound; ++t) {
        for (auto& v : state_in) v.clear();
        for (auto& v : symbol_in) v.clear();

        for (std::size_t i = 0; i < cells; ++i) {
            const auto& g = row[i];
            std::vector<NodeId> live;
            for (StateId q = 0; q < Q; ++q) {
                if (m.is_halting(q)) {
                    state_in[i * Q + q].push_back(g.state[q]);   // halting latch
                    continue;
                }
                live.push_back(g.state[q]);
                for (SymbolId a = 0; a < G; ++a) {
                    const auto& tr = m.delta(q, a);
                    const auto fire = b.and_(g.state[q], g.symbol[a]);
                    state_in[dest_cell(i, tr.move, cells) * Q + tr.next].push_back(fire);
                    symbol_in[i * G + tr.write].push_back(fire);
                }
            }
            const auto idle = b.not_(b.or_all(live));
            for (SymbolId a = 0; a < G; ++a) symbol_in[i * G + a].push_back(b.and_(idle, g.symbol[a]));
        }

        std::vector<CellGroup> next(cells);
        for (std::size_t j = 0; j < cells; ++j) {
            auto& g = next[j];
            g.symbol.resize(G);
            g.state.resize(Q);
            for (SymbolId a = 0; a < G; ++a) g.symbol[a] = b.or_all(symbol_in[j * G + a]);
            for (StateId q = 0; q < Q; ++q) g.state[q] = b.or_all(state_in[j * Q + q]);
            g.head = b.or_all(g.state);
        }
        row = std::move(next);
        for (const auto& g : row) result.tableau.cells.push_back(g);
    }

    std::vector<NodeId> halt_bits;
    for (const auto& g : row) {
        for (StateId q = 0; q < Q; ++q) {
            if (m.is_halting(q)) halt_bits.push_back(g.state[q]);
        }
    }
    result.halted = b.or_all(halt_bits);
    for (std::uint32_t j = 0; j < m.output_cells; ++j) b.output(row[j].symbol[m.one]);
    result.circuit = std::move(b).finish();

    if (opts.verify_halting) verify_halting(result, n);
    return result;
}

double unroll_size_bound(const TuringMachine& m, std::size_t n, std::uint64_t time_bound) {
    const double cells = static_cast<double>(tape_length(m, n, time_bound));
    return kUnrollSizeConstant * static_cast<double>(time_bound) * cells * static_cast<double>(m.state_count()) *
           static_cast<double>(m.symbol_count());
}

double unroll_depth_bound(const TuringMachine& m, std::size_t /*n*/, std::uint64_t time_bound) {
    const double qg = static_cast<double>(m.state_count() * m.symbol_count());
    return kUnrollDepthConstant * static_cast<double>(time_bound) * std::log2(qg);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t k = std::min(x.size(), y.size());
    if (k < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (sxx == 0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

BuildReport build_report(const TuringMachine& m, const std::vector<std::size_t>& n_values) {
    BuildReport r;
    std::vector<double> ts, ss;
    for (auto n : n_values) {
        const auto T = auto_time_bound(m, n);
        const auto u = unroll(m, n, T, UnrollOptions{false});
        const auto cert = certify_sparsity(u.circuit);
        ReportRow row{n, m.output_cells, T, tape_length(m, n, T), cert.s, cert.L,
                      unroll_size_bound(m, n, T), unroll_depth_bound(m, n, T)};
        r.rows.push_back(row);
        ts.push_back(static_cast<double>(T));
        ss.push_back(static_cast<double>(cert.s));
    }
    r.slope_s_vs_T = loglog_slope(ts, ss);
    return r;
}

std::string report_to_csv(const BuildReport& r) {
    std::ostringstream os;
    os << "n,m_out,T,T_max,s,L,size_bound,depth_bound\n";
    for (const auto& row : r.rows) {
        os << row.n << ',' << row.m_out << ',' << row.T << ',' << row.T_max << ',' << row.s << ',' << row.L << ','
           << row.size_bound << ',' << row.depth_bound << '\n';
    }
    os << "# loglog_slope_s_vs_T," << r.slope_s_vs_T << '\n';
    return os.str();
}

}  // namespace sparsec
