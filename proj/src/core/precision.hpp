#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "neuralize.hpp"
#include "tm.hpp"

namespace sparsec {

/// value = (two's complement integer) * 2^-frac_bits, or unsigned when !is_signed.
/// int_bits counts the sign bit for signed formats.
struct FixedPointFormat {
    int frac_bits = 1;
    int int_bits = 0;
    bool is_signed = false;

    int width() const { return frac_bits + int_bits; }
    void check() const;
};

/// floor(x * 2^n) clamped to 2^n - 1 per coordinate, MSB first, coordinates concatenated.
std::vector<std::uint8_t> encode(std::span<const double> x, int n);

std::vector<double> decode(std::span<const std::uint8_t> bits, const FixedPointFormat& fmt);

enum class OpCode { Load, Const, Add, Sub, Mul, Shift, Output };

const char* op_name(OpCode op);

struct Instruction {
    OpCode op = OpCode::Load;
    std::uint32_t dst = 0;      // LOAD CONST ADD SUB MUL SHIFT
    std::uint32_t a = 0;        // ADD SUB MUL SHIFT; OUTPUT reads a
    std::uint32_t b = 0;        // ADD SUB MUL
    std::uint32_t coord = 0;    // LOAD
    double value = 0;           // CONST, must be dyadic
    int amount = 0;             // SHIFT: positive multiplies by 2^amount
};

/// Straight-line fixed-point program over inputs in [0,1)^inputs.
struct BitProgram {
    std::string name = "program";
    std::uint32_t inputs = 1;
    int int_bits = 2;   // signed output format: int_bits + m_out bits per output
    std::vector<Instruction> instructions;

    std::size_t output_count() const;
    std::size_t register_count() const;
};

/// Register formats and value ranges at a given precision.
struct RegisterInfo {
    FixedPointFormat format;   // always signed internally
    double lo = 0, hi = 0;     // reachable range of the register value
};

struct ProgramAnalysis {
    std::vector<RegisterInfo> registers;   // indexed by register id; unused ids have width 0
    FixedPointFormat output_format;
};

/// Checks single assignment, operand definition, and widths. Throws InvalidArgument / WidthOverflow.
ProgramAnalysis analyze_program(const BitProgram& p, int n, int m_out);

/// Inputs: inputs * n bits (encode order). Outputs: per OUTPUT, int_bits + m_out bits MSB first.
/// MUL keeps the top m_out fraction bits when the exact product has more; OUTPUT truncates likewise.
Circuit compile_bitprogram(const BitProgram& p, int n, int m_out);

/// The program over the reals: no quantization, no truncation.
std::vector<double> program_real_eval(const BitProgram& p, std::span<const double> x);

BitProgram program_from_json(const nlohmann::json& j);
nlohmann::json program_to_json(const BitProgram& p);

namespace programs {
BitProgram square();     // x * x
BitProgram identity();   // x
BitProgram doubling();   // x + x
BitProgram zero();       // constant 0
}  // namespace programs

struct PrecisionFamily {
    std::variant<BitProgram, TuringMachine> source;
    std::size_t d = 1, m = 1;
    int n = 4, m_out = 4;
    int int_bits = 2;   // output format for machine sources
};

PrecisionFamily family_from_program(const BitProgram& p, int n, int m_out);
FixedPointFormat output_format(const PrecisionFamily& fam);
Circuit family_circuit(const PrecisionFamily& fam);

using RealFunction = std::function<std::vector<double>(std::span<const double>)>;

struct EndToEndReport {
    int n = 0, m_out = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double L_f = 0;
    double measured_error = 0;
    double bound = 0;                    // 2^-m_out + L_f * 2^-n
    std::size_t network_mismatches = 0;  // samples where thresholded network bits differ from the circuit
    SparsityCertificate certificate;
    std::size_t network_layers = 0, network_width = 0, gadget_stages = 0;
    double max_stage_lipschitz = 0;
    ErrorBudget budget;
    bool pass = false;
};

struct EndToEndOptions {
    NeuralizeOptions neuralize{GadgetMode::Robust, 0.1};
    std::uint64_t seed = 1;
};

/// Circuit, network, then a sampled sup-norm comparison of Dec(net(Q_n(x))) against f(x).
EndToEndReport end_to_end_check(const PrecisionFamily& fam, const RealFunction& f_reference, double L_f,
                                std::size_t samples, const EndToEndOptions& opts = {});

nlohmann::json end_to_end_to_json(const EndToEndReport& r);

}  // namespace sparsec
