#include "tm.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "error.hpp"

namespace sparsec {

namespace {

std::optional<std::uint32_t> index_of(const std::vector<std::string>& names, const std::string& key) {
    auto it = std::find(names.begin(), names.end(), key);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::uint32_t>(it - names.begin());
}

Move parse_move(const std::string& s) {
    if (s == "L") return Move::Left;
    if (s == "R") return Move::Right;
    if (s == "S") return Move::Stay;
    fail(ErrorCode::InvalidMachine, "move must be L, R or S, got '" + s + "'");
}

const char* move_name(Move m) {
    switch (m) {
        case Move::Left: return "L";
        case Move::Right: return "R";
        case Move::Stay: return "S";
    }
    return "S";
}

std::uint64_t step_head(std::uint64_t head, Move move, std::uint64_t cells) {
    if (move == Move::Left) return head == 0 ? 0 : head - 1;
    if (move == Move::Right) return head + 1 >= cells ? head : head + 1;
    return head;
}

std::vector<SymbolId> initial_tape(const TuringMachine& m, std::span<const std::uint8_t> input, std::uint64_t cells) {
    std::vector<SymbolId> tape(cells, m.blank);
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (input[i] > 1) fail(ErrorCode::InvalidSymbol, "input position " + std::to_string(i) + " is not a bit");
        tape[i] = input[i] ? m.one : m.zero;
    }
    return tape;
}

std::vector<std::uint8_t> read_outputs(const TuringMachine& m, const std::vector<SymbolId>& tape) {
    std::vector<std::uint8_t> out(m.output_cells);
    for (std::uint32_t i = 0; i < m.output_cells; ++i) out[i] = tape[i] == m.one ? 1 : 0;
    return out;
}

// Small helper used by the built-in machines.
struct MachineBuilder {
    TuringMachine m;

    MachineBuilder(std::string name, std::vector<std::string> states, std::string start,
                   std::vector<std::string> halt_states, std::vector<std::string> alphabet) {
        m.name = std::move(name);
        m.states = std::move(states);
        m.alphabet = std::move(alphabet);
        m.start = *index_of(m.states, start);
        m.halting.assign(m.states.size(), false);
        for (const auto& h : halt_states) m.halting[*index_of(m.states, h)] = true;
        m.zero = *index_of(m.alphabet, "0");
        m.one = *index_of(m.alphabet, "1");
        m.blank = *index_of(m.alphabet, "_");
        m.transitions.assign(m.states.size() * m.alphabet.size(), Transition{});
    }

    void on(const std::string& q, const std::string& a, const std::string& next, const std::string& write, Move mv) {
        auto& t = m.transitions[*index_of(m.states, q) * m.alphabet.size() + *index_of(m.alphabet, a)];
        t = Transition{true, *index_of(m.states, next), *index_of(m.alphabet, write), mv};
    }
};

}  // namespace

void TuringMachine::check() const {
    if (states.empty()) fail(ErrorCode::InvalidMachine, "machine has no states");
    if (alphabet.empty()) fail(ErrorCode::InvalidMachine, "machine has no tape alphabet");
    std::set<std::string> seen_states(states.begin(), states.end());
    if (seen_states.size() != states.size()) fail(ErrorCode::InvalidMachine, "duplicate state name");
    std::set<std::string> seen_symbols(alphabet.begin(), alphabet.end());
    if (seen_symbols.size() != alphabet.size()) fail(ErrorCode::InvalidMachine, "duplicate tape symbol");
    for (const auto& s : states) {
        if (seen_symbols.count(s)) fail(ErrorCode::InvalidMachine, "state name '" + s + "' collides with a tape symbol");
    }
    if (start >= states.size()) fail(ErrorCode::InvalidMachine, "start state out of range");
    if (halting.size() != states.size()) fail(ErrorCode::InvalidMachine, "halting flags do not match state count");
    if (std::none_of(halting.begin(), halting.end(), [](bool b) { return b; })) {
        fail(ErrorCode::InvalidMachine, "machine has no halting state");
    }
    if (alphabet[zero] != "0" || alphabet[one] != "1") fail(ErrorCode::InvalidMachine, "alphabet must contain 0 and 1");
    if (blank >= alphabet.size() || blank == zero || blank == one) {
        fail(ErrorCode::InvalidMachine, "blank must be a symbol distinct from 0 and 1");
    }
    if (output_cells < 1) fail(ErrorCode::InvalidMachine, "output_cells must be at least 1");
    if (transitions.size() != states.size() * alphabet.size()) {
        fail(ErrorCode::InvalidMachine, "transition table has the wrong shape");
    }
    for (StateId q = 0; q < states.size(); ++q) {
        for (SymbolId a = 0; a < alphabet.size(); ++a) {
            const auto& t = delta(q, a);
            if (halting[q] && t.defined) {
                fail(ErrorCode::InvalidMachine, "halting state '" + states[q] + "' has an outgoing transition");
            }
            if (!halting[q] && !t.defined) {
                fail(ErrorCode::InvalidMachine,
                     "no transition for (" + states[q] + ", " + alphabet[a] + "); the table must be total");
            }
            if (t.defined && (t.next >= states.size() || t.write >= alphabet.size())) {
                fail(ErrorCode::InvalidMachine, "transition target out of range");
            }
        }
    }
}

std::uint64_t tape_length(const TuringMachine& m, std::uint64_t n, std::uint64_t time_bound) {
    return std::max<std::uint64_t>({time_bound + n, m.output_cells, 1});
}

RunTrace simulate(const TuringMachine& m, std::span<const std::uint8_t> input, std::uint64_t time_bound) {
    if (time_bound < 1) fail(ErrorCode::InvalidArgument, "time_bound must be at least 1");
    const std::uint64_t cells = tape_length(m, input.size(), time_bound);

    RunTrace trace;
    Configuration cfg{0, m.start, 0, initial_tape(m, input, cells)};
    trace.configurations.push_back(cfg);
    while (!m.is_halting(cfg.state)) {
        if (cfg.step_index == time_bound) {
            fail(ErrorCode::TimeBoundExceeded,
                 "machine '" + m.name + "' did not halt within " + std::to_string(time_bound) + " steps");
        }
        const auto& t = m.delta(cfg.state, cfg.tape[cfg.head]);
        cfg.tape[cfg.head] = t.write;
        cfg.head = step_head(cfg.head, t.move, cells);
        cfg.state = t.next;
        ++cfg.step_index;
        trace.configurations.push_back(cfg);
    }
    trace.halted = true;
    trace.steps_used = cfg.step_index;
    trace.output_bits = read_outputs(m, cfg.tape);
    return trace;
}

std::vector<std::uint8_t> run_outputs(const TuringMachine& m, std::span<const std::uint8_t> input,
                                      std::uint64_t time_bound) {
    if (time_bound < 1) fail(ErrorCode::InvalidArgument, "time_bound must be at least 1");
    const std::uint64_t cells = tape_length(m, input.size(), time_bound);
    auto tape = initial_tape(m, input, cells);
    StateId state = m.start;
    std::uint64_t head = 0;
    for (std::uint64_t step = 0; !m.is_halting(state); ++step) {
        if (step == time_bound) {
            fail(ErrorCode::TimeBoundExceeded,
                 "machine '" + m.name + "' did not halt within " + std::to_string(time_bound) + " steps");
        }
        const auto& t = m.delta(state, tape[head]);
        tape[head] = t.write;
        head = step_head(head, t.move, cells);
        state = t.next;
    }
    return read_outputs(m, tape);
}

std::uint64_t time_bound_poly(const TuringMachine& m, std::uint64_t n, std::uint64_t m_out) {
    if (m.time_poly.empty()) fail(ErrorCode::MissingPolynomial, "machine '" + m.name + "' declares no time_poly");
    const std::uint64_t t = n + m_out;
    std::uint64_t value = 0;
    for (auto it = m.time_poly.rbegin(); it != m.time_poly.rend(); ++it) value = value * t + *it;
    return value;
}

TuringMachine machine_from_json(const nlohmann::json& j) {
    TuringMachine m;
    try {
        m.name = j.value("name", std::string("machine"));
        m.states = j.at("states").get<std::vector<std::string>>();
        m.alphabet = j.at("tape_alphabet").get<std::vector<std::string>>();
        const auto blank_name = j.value("blank", std::string("_"));

        auto state_index = [&](const std::string& s) {
            auto idx = index_of(m.states, s);
            if (!idx) fail(ErrorCode::InvalidMachine, "unknown state '" + s + "'");
            return *idx;
        };
        auto symbol_index = [&](const std::string& s) {
            auto idx = index_of(m.alphabet, s);
            if (!idx) fail(ErrorCode::InvalidMachine, "unknown tape symbol '" + s + "'");
            return *idx;
        };

        m.start = state_index(j.at("start").get<std::string>());
        m.halting.assign(m.states.size(), false);
        for (const auto& h : j.at("halt_states").get<std::vector<std::string>>()) m.halting[state_index(h)] = true;
        m.zero = symbol_index("0");
        m.one = symbol_index("1");
        m.blank = symbol_index(blank_name);
        m.transitions.assign(m.states.size() * m.alphabet.size(), Transition{});
        for (const auto& row : j.at("transitions")) {
            if (!row.is_array() || row.size() != 5) fail(ErrorCode::InvalidMachine, "transition must be a 5-tuple");
            const auto q = state_index(row[0].get<std::string>());
            const auto a = symbol_index(row[1].get<std::string>());
            auto& t = m.transitions[q * m.alphabet.size() + a];
            if (t.defined) fail(ErrorCode::InvalidMachine, "duplicate transition for one (state, symbol) pair");
            t = Transition{true, state_index(row[2].get<std::string>()), symbol_index(row[3].get<std::string>()),
                           parse_move(row[4].get<std::string>())};
        }
        const auto cells = j.at("output_cells").get<std::int64_t>();
        if (cells < 1) fail(ErrorCode::InvalidMachine, "output_cells must be at least 1");
        m.output_cells = static_cast<std::uint32_t>(cells);
        if (j.contains("time_poly")) m.time_poly = j.at("time_poly").get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("machine JSON: ") + e.what());
    }
    m.check();
    return m;
}

nlohmann::json machine_to_json(const TuringMachine& m) {
    nlohmann::json j;
    j["name"] = m.name;
    j["states"] = m.states;
    j["start"] = m.states[m.start];
    std::vector<std::string> halts;
    for (StateId q = 0; q < m.states.size(); ++q) {
        if (m.halting[q]) halts.push_back(m.states[q]);
    }
    j["halt_states"] = halts;
    j["tape_alphabet"] = m.alphabet;
    j["blank"] = m.alphabet[m.blank];
    auto rows = nlohmann::json::array();
    for (StateId q = 0; q < m.states.size(); ++q) {
        for (SymbolId a = 0; a < m.alphabet.size(); ++a) {
            const auto& t = m.delta(q, a);
            if (!t.defined) continue;
            rows.push_back({m.states[q], m.alphabet[a], m.states[t.next], m.alphabet[t.write], move_name(t.move)});
        }
    }
    j["transitions"] = rows;
    j["output_cells"] = m.output_cells;
    j["time_poly"] = m.time_poly;
    return j;
}

nlohmann::json trace_to_json(const TuringMachine& m, const RunTrace& trace) {
    const bool single_char = std::all_of(m.alphabet.begin(), m.alphabet.end(),
                                         [](const std::string& s) { return s.size() == 1; });
    nlohmann::json j;
    j["halted"] = trace.halted;
    j["steps_used"] = trace.steps_used;
    std::string out;
    for (auto b : trace.output_bits) out.push_back(b ? '1' : '0');
    j["output"] = out;
    auto cfgs = nlohmann::json::array();
    for (const auto& c : trace.configurations) {
        nlohmann::json row;
        row["step"] = c.step_index;
        row["state"] = m.states[c.state];
        row["head"] = c.head;
        if (single_char) {
            std::string tape;
            for (auto s : c.tape) tape += m.alphabet[s];
            row["tape"] = tape;
        } else {
            std::vector<std::string> tape;
            for (auto s : c.tape) tape.push_back(m.alphabet[s]);
            row["tape"] = tape;
        }
        cfgs.push_back(std::move(row));
    }
    j["configurations"] = std::move(cfgs);
    return j;
}

namespace machines {

TuringMachine identity(std::uint32_t n) {
    MachineBuilder b("identity", {"halt"}, "halt", {"halt"}, {"0", "1", "_"});
    b.m.output_cells = std::max<std::uint32_t>(n, 1);
    b.m.time_poly = {1};
    return b.m;
}

TuringMachine parity() {
    MachineBuilder b("parity", {"start", "even", "odd", "back_even", "back_odd", "halt"}, "start", {"halt"},
                     {"0", "1", "_", "#"});
    // Mark cell 0, sweep right carrying the parity, then walk back to the mark.
    b.on("start", "0", "even", "#", Move::Right);
    b.on("start", "1", "odd", "#", Move::Right);
    b.on("start", "_", "halt", "0", Move::Stay);
    b.on("start", "#", "halt", "0", Move::Stay);
    b.on("even", "0", "even", "0", Move::Right);
    b.on("even", "1", "odd", "1", Move::Right);
    b.on("even", "_", "back_even", "_", Move::Left);
    b.on("even", "#", "halt", "0", Move::Stay);
    b.on("odd", "0", "odd", "0", Move::Right);
    b.on("odd", "1", "even", "1", Move::Right);
    b.on("odd", "_", "back_odd", "_", Move::Left);
    b.on("odd", "#", "halt", "1", Move::Stay);
    for (const std::string sym : {"0", "1", "_"}) {
        b.on("back_even", sym, "back_even", sym, Move::Left);
        b.on("back_odd", sym, "back_odd", sym, Move::Left);
    }
    b.on("back_even", "#", "halt", "0", Move::Stay);
    b.on("back_odd", "#", "halt", "1", Move::Stay);
    b.m.output_cells = 1;
    b.m.time_poly = {1, 2};  // 2n+1 steps on n bits, p(t) = 2t + 1 with t = n + 1
    return b.m;
}

TuringMachine adder2() {
    auto bit = [](int v) { return std::to_string(v); };
    std::vector<std::string> states = {"q0"};
    for (int a = 0; a < 2; ++a) states.push_back("b0_" + bit(a));
    for (int s = 0; s < 2; ++s)
        for (int c = 0; c < 2; ++c) states.push_back("w0_" + bit(s) + bit(c));
    for (int c = 0; c < 2; ++c) states.push_back("m_" + bit(c));
    for (int c = 0; c < 2; ++c) states.push_back("a1_" + bit(c));
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 2; ++a) states.push_back("b1_" + bit(c) + bit(a));
    for (int s = 0; s < 2; ++s)
        for (int c = 0; c < 2; ++c) states.push_back("x_" + bit(s) + bit(c));
    for (int s = 0; s < 2; ++s) states.push_back("y_" + bit(s));
    states.push_back("halt");

    MachineBuilder b("adder2", states, "q0", {"halt"}, {"0", "1", "_"});
    const std::vector<std::pair<std::string, int>> reads = {{"0", 0}, {"1", 1}, {"_", 0}};
    for (const auto& [sym, v] : reads) {
        b.on("q0", sym, "b0_" + bit(v), sym, Move::Right);
        for (int a = 0; a < 2; ++a) {
            b.on("b0_" + bit(a), sym, "w0_" + bit(a ^ v) + bit(a & v), sym, Move::Left);
        }
        for (int s = 0; s < 2; ++s)
            for (int c = 0; c < 2; ++c) b.on("w0_" + bit(s) + bit(c), sym, "m_" + bit(c), bit(s), Move::Right);
        for (int c = 0; c < 2; ++c) {
            b.on("m_" + bit(c), sym, "a1_" + bit(c), sym, Move::Right);
            b.on("a1_" + bit(c), sym, "b1_" + bit(c) + bit(v), sym, Move::Right);
            for (int a = 0; a < 2; ++a) {
                const int sum = a + v + c;
                b.on("b1_" + bit(c) + bit(a), sym, "x_" + bit(sum & 1) + bit(sum >> 1), sym, Move::Left);
            }
        }
        for (int s = 0; s < 2; ++s) {
            for (int c = 0; c < 2; ++c) b.on("x_" + bit(s) + bit(c), sym, "y_" + bit(s), bit(c), Move::Left);
            b.on("y_" + bit(s), sym, "halt", bit(s), Move::Stay);
        }
    }
    b.m.output_cells = 3;
    b.m.time_poly = {8};
    return b.m;
}

TuringMachine constant_one() {
    MachineBuilder b("constant_one", {"start", "halt"}, "start", {"halt"}, {"0", "1", "_"});
    for (const std::string sym : {"0", "1", "_"}) b.on("start", sym, "halt", "1", Move::Stay);
    b.m.output_cells = 1;
    b.m.time_poly = {1};
    return b.m;
}

}  // namespace machines

}  // namespace sparsec
