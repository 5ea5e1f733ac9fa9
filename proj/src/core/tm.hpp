#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace sparsec {

using StateId = std::uint32_t;
using SymbolId = std::uint32_t;

enum class Move : std::uint8_t { Left, Right, Stay };

struct Transition {
    bool defined = false;
    StateId next = 0;
    SymbolId write = 0;
    Move move = Move::Stay;
};

/// Deterministic single-tape machine on a one-way tape with a wall at cell 0.
///
/// Symbols "0" and "1" are mandatory and the blank symbol is named by `blank`.
/// Input bits are written as "0"/"1" into cells [0, n); every other cell starts
/// blank. After halting, output bit i is 1 iff cell i holds the symbol "1".
class TuringMachine {
public:
    std::string name;
    std::vector<std::string> states;
    StateId start = 0;
    std::vector<bool> halting;           // indexed by state
    std::vector<std::string> alphabet;   // tape symbols
    SymbolId blank = 0;
    SymbolId zero = 0;
    SymbolId one = 0;
    // transitions[state * alphabet.size() + symbol]; empty slots belong to halting states
    std::vector<Transition> transitions;
    std::uint32_t output_cells = 1;
    // coefficients of p(t), lowest degree first; empty means undeclared
    std::vector<std::uint64_t> time_poly;

    std::size_t state_count() const { return states.size(); }
    std::size_t symbol_count() const { return alphabet.size(); }
    bool is_halting(StateId q) const { return halting[q]; }
    const Transition& delta(StateId q, SymbolId a) const { return transitions[q * alphabet.size() + a]; }

    /// Throws InvalidMachine describing the first broken invariant.
    void check() const;
};

struct Configuration {
    std::uint64_t step_index = 0;
    StateId state = 0;
    std::uint64_t head = 0;
    std::vector<SymbolId> tape;
};

struct RunTrace {
    std::vector<Configuration> configurations;
    bool halted = false;
    std::uint64_t steps_used = 0;
    std::vector<std::uint8_t> output_bits;
};

/// Tape length used for a run of `time_bound` steps on an n-bit input.
std::uint64_t tape_length(const TuringMachine& m, std::uint64_t n, std::uint64_t time_bound);

/// Runs the machine for at most `time_bound` steps. Throws TimeBoundExceeded
/// when no halting state is reached and InvalidSymbol for non-bit input.
RunTrace simulate(const TuringMachine& m, std::span<const std::uint8_t> input, std::uint64_t time_bound);

/// Same run without recording configurations; returns only the output bits.
std::vector<std::uint8_t> run_outputs(const TuringMachine& m, std::span<const std::uint8_t> input,
                                      std::uint64_t time_bound);

/// p(n + m_out) from the machine's declared time polynomial.
std::uint64_t time_bound_poly(const TuringMachine& m, std::uint64_t n, std::uint64_t m_out);

TuringMachine machine_from_json(const nlohmann::json& j);
nlohmann::json machine_to_json(const TuringMachine& m);

nlohmann::json trace_to_json(const TuringMachine& m, const RunTrace& trace);

namespace machines {

/// Halts immediately; output is the n input bits unchanged.
TuringMachine identity(std::uint32_t n);

/// Writes the XOR of all input bits into cell 0.
TuringMachine parity();

/// Adds two 2-bit numbers given interleaved least-significant-first
/// (a0 b0 a1 b1); writes s0 s1 s2 into cells 0..2. Blank cells read as 0.
TuringMachine adder2();

/// Writes 1 into cell 0 and halts, regardless of input.
TuringMachine constant_one();

}  // namespace machines

}  // namespace sparsec
