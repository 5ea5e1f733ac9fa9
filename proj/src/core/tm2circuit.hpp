#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "tm.hpp"

namespace sparsec {

/// Node ids of one tableau cell: one-hot symbol bits, a head bit, and one-hot
/// state bits (all zero when the head is elsewhere).
struct CellGroup {
    std::vector<NodeId> symbol;
    NodeId head = 0;
    std::vector<NodeId> state;
};

struct Tableau {
    std::size_t rows = 0;   // time_bound + 1
    std::size_t cols = 0;   // tape length
    std::vector<CellGroup> cells;  // row-major

    const CellGroup& at(std::size_t row, std::size_t col) const { return cells[row * cols + col]; }
};

struct UnrollOptions {
    // Sweep the halted flag over all inputs (only when n <= 20).
    bool verify_halting = true;
};

struct UnrollResult {
    Circuit circuit;
    Tableau tableau;
    NodeId halted = 0;   // 1 iff a halting state is present in the final row
    std::uint64_t time_bound = 0;
};

UnrollResult unroll(const TuringMachine& m, std::size_t n, std::uint64_t time_bound, UnrollOptions opts = {});

/// Time bound p(n + output_cells) from the machine's declared polynomial.
std::uint64_t auto_time_bound(const TuringMachine& m, std::size_t n);

// Closed-form ceilings for the tableau construction:
//   s <= kUnrollSizeConstant  * T * T_max * |Q| * |Gamma|
//   L <= kUnrollDepthConstant * T * log2(|Q| * |Gamma|)
inline constexpr double kUnrollSizeConstant = 10.0;
inline constexpr double kUnrollDepthConstant = 6.0;

double unroll_size_bound(const TuringMachine& m, std::size_t n, std::uint64_t time_bound);
double unroll_depth_bound(const TuringMachine& m, std::size_t n, std::uint64_t time_bound);

struct ReportRow {
    std::size_t n = 0;
    std::size_t m_out = 0;
    std::uint64_t T = 0;
    std::uint64_t T_max = 0;
    std::size_t s = 0;
    std::size_t L = 0;
    double size_bound = 0;
    double depth_bound = 0;
};

struct BuildReport {
    std::vector<ReportRow> rows;
    double slope_s_vs_T = 0;   // NaN when T does not vary
};

BuildReport build_report(const TuringMachine& m, const std::vector<std::size_t>& n_values);
std::string report_to_csv(const BuildReport& r);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sparsec
