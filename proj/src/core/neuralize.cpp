#include "neuralize.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "error.hpp"

namespace sparsec {

using nlohmann::json;

double Layer::inf_norm() const {
    double best = 0;
    for (const auto& row : vals) {
        double s = 0;
        for (double w : row) s += std::abs(w);
        best = std::max(best, s);
    }
    return best;
}

std::size_t ReluNetwork::max_width() const {
    std::size_t w = input_width;
    for (const auto& l : layers) w = std::max(w, l.out);
    return w;
}

std::size_t ReluNetwork::unit_count() const {
    std::size_t u = 0;
    for (const auto& l : layers) u += l.out;
    return u;
}

void ReluNetwork::check() const {
    std::size_t width = input_width;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        const auto where = "layer " + std::to_string(k);
        if (l.in != width) fail(ErrorCode::DimensionMismatch, where + " expects " + std::to_string(l.in) +
                                                                  " inputs, previous width is " + std::to_string(width));
        if (l.cols.size() != l.out || l.vals.size() != l.out || l.bias.size() != l.out || l.relu.size() != l.out)
            fail(ErrorCode::DimensionMismatch, where + " has inconsistent row, bias or mask lengths");
        for (std::size_t i = 0; i < l.out; ++i) {
            if (l.cols[i].size() != l.vals[i].size())
                fail(ErrorCode::DimensionMismatch, where + " row " + std::to_string(i) + " is malformed");
            for (std::size_t t = 0; t < l.cols[i].size(); ++t) {
                if (l.cols[i][t] >= l.in) fail(ErrorCode::DimensionMismatch, where + " column out of range");
                if (!std::isfinite(l.vals[i][t])) fail(ErrorCode::InvalidArgument, where + " has a non-finite weight");
            }
            if (!std::isfinite(l.bias[i])) fail(ErrorCode::InvalidArgument, where + " has a non-finite bias");
        }
        width = l.out;
    }
}

std::vector<double> net_evaluate(const ReluNetwork& net, std::span<const double> x) {
    if (x.size() != net.input_width)
        fail(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) + " entries, network expects " +
                                               std::to_string(net.input_width));
    std::vector<double> cur(x.begin(), x.end()), next;
    for (const auto& l : net.layers) {
        next.assign(l.out, 0.0);
        for (std::size_t i = 0; i < l.out; ++i) {
            double z = l.bias[i];
            const auto& cs = l.cols[i];
            const auto& vs = l.vals[i];
            for (std::size_t t = 0; t < cs.size(); ++t) z += vs[t] * cur[cs[t]];
            next[i] = l.relu[i] ? std::max(0.0, z) : z;
        }
        cur.swap(next);
    }
    return cur;
}

std::vector<std::uint8_t> threshold_outputs(std::span<const double> y) {
    std::vector<std::uint8_t> bits(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) bits[i] = y[i] >= 0.5 ? 1 : 0;
    return bits;
}

Layer dense_layer(std::size_t in, std::size_t out, std::span<const double> weights, std::span<const double> bias,
                  std::span<const std::uint8_t> relu) {
    if (weights.size() != in * out || bias.size() != out || relu.size() != out)
        fail(ErrorCode::DimensionMismatch, "dense layer shapes disagree");
    Layer l;
    l.in = in;
    l.out = out;
    l.cols.resize(out);
    l.vals.resize(out);
    l.bias.assign(bias.begin(), bias.end());
    l.relu.assign(relu.begin(), relu.end());
    for (std::size_t i = 0; i < out; ++i) {
        for (std::size_t j = 0; j < in; ++j) {
            const double w = weights[i * in + j];
            if (w != 0.0) {
                l.cols[i].push_back(static_cast<std::uint32_t>(j));
                l.vals[i].push_back(w);
            }
        }
    }
    return l;
}

namespace {

// Affine form over the units of the most recent layer (or the network inputs).
struct Form {
    std::vector<std::pair<std::uint32_t, double>> terms;   // sorted by unit
    double constant = 0;

    bool is_constant() const { return terms.empty(); }
};

Form unit_form(std::uint32_t u) { return Form{{{u, 1.0}}, 0.0}; }
Form const_form(double c) { return Form{{}, c}; }

// a * x + b * y + c, merging equal units.
Form combine(double a, const Form& x, double b, const Form& y, double c) {
    Form r;
    r.constant = a * x.constant + b * y.constant + c;
    std::size_t i = 0, j = 0;
    while (i < x.terms.size() || j < y.terms.size()) {
        if (j == y.terms.size() || (i < x.terms.size() && x.terms[i].first < y.terms[j].first)) {
            r.terms.emplace_back(x.terms[i].first, a * x.terms[i].second);
            ++i;
        } else if (i == x.terms.size() || y.terms[j].first < x.terms[i].first) {
            r.terms.emplace_back(y.terms[j].first, b * y.terms[j].second);
            ++j;
        } else {
            const double w = a * x.terms[i].second + b * y.terms[j].second;
            if (w != 0.0) r.terms.emplace_back(x.terms[i].first, w);
            ++i;
            ++j;
        }
    }
    return r;
}

Form scale(double a, const Form& x, double c) { return combine(a, x, 0.0, const_form(0), c); }

class LayerBuilder {
public:
    explicit LayerBuilder(std::size_t in) { layer_.in = in; }

    std::uint32_t add(const Form& pre, bool relu) {
        std::vector<std::uint32_t> cs;
        std::vector<double> vs;
        for (const auto& [u, w] : pre.terms) {
            cs.push_back(u);
            vs.push_back(w);
        }
        layer_.cols.push_back(std::move(cs));
        layer_.vals.push_back(std::move(vs));
        layer_.bias.push_back(pre.constant);
        layer_.relu.push_back(relu ? 1 : 0);
        return static_cast<std::uint32_t>(layer_.out++);
    }

    Layer take() && { return std::move(layer_); }

private:
    Layer layer_;
};

bool is_binary(GateKind k) { return k == GateKind::And2 || k == GateKind::Or2 || k == GateKind::Xor2; }

// Gates with a path to some output; the rest never reach the network.
std::vector<std::uint8_t> useful_nodes(const Circuit& c) {
    std::vector<std::uint8_t> use(c.size(), 0);
    for (auto o : c.outputs) use[o] = 1;
    for (NodeId v = static_cast<NodeId>(c.size()); v-- > 0;)
        if (use[v])
            for (auto f : c.nodes[v].fan_in) use[f] = 1;
    return use;
}

struct BuildOptions {
    NeuralizeOptions opts;
    bool harden_outputs = true;
};

struct Built {
    ReluNetwork net;
    std::size_t stages = 0;
    std::vector<std::vector<std::size_t>> stage_layers;
};

void check_delta(const NeuralizeOptions& opts) {
    if (opts.mode != GadgetMode::Robust) return;
    if (!(opts.delta >= 0.0) || opts.delta >= 0.5)
        fail(ErrorCode::BadDelta, "delta must lie in [0, 1/2), got " + std::to_string(opts.delta));
}

Built build_network(const Circuit& c, const BuildOptions& bo) {
    require_valid(c);
    check_delta(bo.opts);
    const bool robust = bo.opts.mode == GadgetMode::Robust;
    const double a = robust ? 1.0 / (1.0 - 2.0 * bo.opts.delta) : 1.0;
    const double shift = robust ? bo.opts.delta : 0.0;

    const auto depth = node_depths(c);
    const auto use = useful_nodes(c);
    std::size_t top = 0;
    for (NodeId v = 0; v < c.size(); ++v)
        if (use[v]) top = std::max(top, depth[v]);

    constexpr std::size_t kNever = 0;
    std::vector<std::size_t> last_use(c.size(), kNever);
    std::vector<std::vector<NodeId>> by_level(top + 1);
    for (NodeId v = 0; v < c.size(); ++v) {
        if (!use[v]) continue;
        const auto& g = c.nodes[v];
        if (g.kind != GateKind::Input && g.kind != GateKind::Const0 && g.kind != GateKind::Const1)
            by_level[depth[v]].push_back(v);
        for (auto f : g.fan_in) last_use[f] = std::max(last_use[f], depth[v]);
    }
    for (auto o : c.outputs) last_use[o] = top + 1;

    Built out;
    out.net.input_width = c.inputs.size();
    std::vector<Form> form(c.size());
    std::vector<NodeId> live;   // nodes with a form that some later level may read
    for (std::size_t i = 0; i < c.inputs.size(); ++i) form[c.inputs[i]] = unit_form(static_cast<std::uint32_t>(i));
    for (NodeId v = 0; v < c.size(); ++v) {
        const auto k = c.nodes[v].kind;
        if (k == GateKind::Const0) form[v] = const_form(0.0);
        if (k == GateKind::Const1) form[v] = const_form(1.0);
        if ((k == GateKind::Input || k == GateKind::Const0 || k == GateKind::Const1) && last_use[v] != kNever)
            live.push_back(v);
    }
    std::size_t width = out.net.input_width;

    auto push_layer = [&](Layer l) {
        width = l.out;
        out.net.layers.push_back(std::move(l));
        return out.net.layers.size() - 1;
    };

    // Hardens the wires in `harden` and passes the other live wires through.
    auto hardening_layer = [&](const std::vector<std::uint8_t>& harden, std::size_t level) {
        LayerBuilder lb(width);
        std::vector<std::pair<NodeId, Form>> updates;
        for (auto v : live) {
            if (last_use[v] < level || form[v].is_constant()) continue;
            if (harden[v]) {
                const auto h1 = lb.add(scale(a, form[v], -a * shift), true);
                const auto h2 = lb.add(scale(a, form[v], -a * shift - 1.0), true);
                updates.emplace_back(v, combine(1.0, unit_form(h1), -1.0, unit_form(h2), 0.0));
            } else {
                updates.emplace_back(v, unit_form(lb.add(form[v], false)));
            }
        }
        const auto idx = push_layer(std::move(lb).take());
        for (auto& [v, f] : updates) form[v] = std::move(f);
        return idx;
    };

    std::vector<std::uint8_t> consumed(c.size(), 0), needs_pass(c.size(), 0);
    for (std::size_t level = 1; level <= top; ++level) {
        const auto& gates = by_level[level];
        if (gates.empty()) continue;
        live.erase(std::remove_if(live.begin(), live.end(), [&](NodeId v) { return last_use[v] < level; }),
                   live.end());

        bool has_binary = false;
        for (auto g : gates) has_binary |= is_binary(c.nodes[g].kind);
        std::vector<std::size_t> stage;

        if (robust) {
            for (auto g : gates)
                for (auto f : c.nodes[g].fan_in) consumed[f] = 1;
            stage.push_back(hardening_layer(consumed, level));
            for (auto g : gates)
                for (auto f : c.nodes[g].fan_in) consumed[f] = 0;
        }

        if (has_binary) {
            for (auto g : gates) {
                const auto k = c.nodes[g].kind;
                if (k == GateKind::Or2 || k == GateKind::Xor2 || k == GateKind::Not)
                    for (auto f : c.nodes[g].fan_in) needs_pass[f] = 1;
            }
            LayerBuilder lb(width);
            std::vector<std::pair<NodeId, Form>> pass;
            for (auto v : live) {
                if (form[v].is_constant()) continue;
                if (last_use[v] > level || needs_pass[v]) pass.emplace_back(v, unit_form(lb.add(form[v], false)));
            }
            std::vector<std::pair<NodeId, std::uint32_t>> relu_unit;
            for (auto g : gates) {
                const auto& fi = c.nodes[g].fan_in;
                if (!is_binary(c.nodes[g].kind)) continue;
                relu_unit.emplace_back(g, lb.add(combine(1.0, form[fi[0]], 1.0, form[fi[1]], -1.0), true));
            }
            stage.push_back(push_layer(std::move(lb).take()));
            for (auto g : gates)
                for (auto f : c.nodes[g].fan_in) needs_pass[f] = 0;

            // Old forms are still needed to express this level's gates.
            std::map<NodeId, Form> fresh;
            for (auto& [v, f] : pass) fresh[v] = std::move(f);
            auto wire = [&](NodeId v) -> const Form& {
                auto it = fresh.find(v);
                return it == fresh.end() ? form[v] : it->second;   // constants keep their form
            };
            std::size_t r = 0;
            for (auto g : gates) {
                const auto& node = c.nodes[g];
                Form f;
                switch (node.kind) {
                    case GateKind::Not: f = scale(-1.0, wire(node.fan_in[0]), 1.0); break;
                    case GateKind::And2: f = unit_form(relu_unit[r++].second); break;
                    case GateKind::Or2:
                        f = combine(1.0, combine(1.0, wire(node.fan_in[0]), 1.0, wire(node.fan_in[1]), 0.0), -1.0,
                                    unit_form(relu_unit[r++].second), 0.0);
                        break;
                    case GateKind::Xor2:
                        f = combine(1.0, combine(1.0, wire(node.fan_in[0]), 1.0, wire(node.fan_in[1]), 0.0), -2.0,
                                    unit_form(relu_unit[r++].second), 0.0);
                        break;
                    default: fail(ErrorCode::Internal, "unexpected gate kind");
                }
                fresh[g] = std::move(f);
            }
            for (auto v : live) {
                if (!form[v].is_constant() && !fresh.count(v)) form[v] = Form{};   // dropped wire
            }
            for (auto& [v, f] : fresh) form[v] = std::move(f);
        } else {
            for (auto g : gates) form[g] = scale(-1.0, form[c.nodes[g].fan_in[0]], 1.0);
        }
        for (auto g : gates)
            if (last_use[g] != kNever) live.push_back(g);
        if (!stage.empty()) {
            out.stage_layers.push_back(stage);
            ++out.stages;
        }
    }

    live.erase(std::remove_if(live.begin(), live.end(), [&](NodeId v) { return last_use[v] <= top; }), live.end());
    if (robust && bo.harden_outputs) {
        std::vector<std::uint8_t> harden(c.size(), 0);
        for (auto o : c.outputs) harden[o] = 1;
        out.stage_layers.push_back({hardening_layer(harden, top + 1)});
    }
    LayerBuilder lb(width);
    for (auto o : c.outputs) lb.add(form[o], false);
    const auto readout = push_layer(std::move(lb).take());
    if (robust && bo.harden_outputs)
        out.stage_layers.back().push_back(readout);
    else
        out.stage_layers.push_back({readout});
    return out;
}

}  // namespace

GateGadget gate_gadget(GateKind kind, const NeuralizeOptions& opts) {
    if (kind == GateKind::Input) fail(ErrorCode::InvalidArgument, "INPUT has no gadget");
    check_delta(opts);
    GateGadget g;
    g.kind = kind;
    g.mode = opts.mode;
    g.delta = opts.mode == GadgetMode::Robust ? opts.delta : 0.0;
    g.net = build_network(circuits::single_gate(kind), BuildOptions{opts, false}).net;
    return g;
}

bool ErrorBudget::holds() const {
    if (L < 1 || !(K >= 1.0) || !(eps_gate >= 0.0) || !(eps_total > 0.0)) return false;
    const double lhs = static_cast<double>(L) * std::pow(K, static_cast<double>(L - 1)) * eps_gate;
    return lhs <= eps_total * (1.0 + 1e-12);
}

double allocate_budget(std::size_t L, double K, double eps_total) {
    if (L < 1) fail(ErrorCode::InvalidArgument, "L must be at least 1");
    if (!(K >= 1.0) || !std::isfinite(K)) fail(ErrorCode::InvalidArgument, "K must be a finite value >= 1");
    if (!(eps_total > 0.0) || !std::isfinite(eps_total))
        fail(ErrorCode::InvalidArgument, "eps_total must be a finite positive value");
    const double growth = static_cast<double>(L) * std::pow(K, static_cast<double>(L - 1));
    const double eps_gate = eps_total / growth;
    if (!std::isfinite(growth) || !(eps_gate > DBL_EPSILON))
        fail(ErrorCode::BudgetInfeasible, "per-gate accuracy for L=" + std::to_string(L) + ", K=" + std::to_string(K) +
                                              " falls below machine epsilon");
    return eps_gate;
}

double telescoping_bound(std::span<const double> stage_lipschitz, double eps) {
    double total = 0, tail = 1;
    for (std::size_t i = stage_lipschitz.size(); i-- > 0;) {
        total += tail * eps;
        tail *= stage_lipschitz[i];
    }
    return total;
}

std::size_t gadget_stage_count(const Circuit& c, const NeuralizeOptions& opts) {
    require_valid(c);
    const auto depth = node_depths(c);
    const auto use = useful_nodes(c);
    std::size_t top = 0;
    for (auto d : depth) top = std::max(top, d);
    std::vector<std::uint8_t> any(top + 1, 0), binary(top + 1, 0);
    for (NodeId v = 0; v < c.size(); ++v) {
        if (!use[v]) continue;
        const auto k = c.nodes[v].kind;
        if (k == GateKind::Input || k == GateKind::Const0 || k == GateKind::Const1) continue;
        any[depth[v]] = 1;
        if (is_binary(k)) binary[depth[v]] = 1;
    }
    std::size_t n = 0;
    for (std::size_t l = 1; l <= top; ++l) n += opts.mode == GadgetMode::Robust ? any[l] : binary[l];
    return std::max<std::size_t>(n, 1);
}

ErrorBudget plan_budget(const Circuit& c, double eps_total, const NeuralizeOptions& opts) {
    ErrorBudget b;
    b.L = gadget_stage_count(c, opts);
    b.K = 1.0;
    b.eps_total = eps_total;
    b.eps_gate = allocate_budget(b.L, b.K, eps_total);
    return b;
}

Neuralized neuralize_circuit(const Circuit& c, const ErrorBudget& budget, const NeuralizeOptions& opts) {
    if (!budget.holds()) fail(ErrorCode::InvalidArgument, "error budget violates L*K^(L-1)*eps_gate <= eps_total");
    if (!(budget.eps_gate > DBL_EPSILON))
        fail(ErrorCode::BudgetInfeasible, "per-gate accuracy is not above machine epsilon");
    auto built = build_network(c, BuildOptions{opts, true});
    if (budget.L < built.stages)
        fail(ErrorCode::BudgetInfeasible, "budget covers " + std::to_string(budget.L) + " stages, network has " +
                                              std::to_string(built.stages));
    Neuralized r;
    r.gadget_stages = built.stages;
    r.circuit_depth = certify_sparsity(c).L;
    r.circuit_width = max_level_width(c);
    for (const auto& l : built.net.layers) r.max_layer_norm = std::max(r.max_layer_norm, l.inf_norm());
    for (const auto& st : built.stage_layers) {
        double k = 1;
        for (auto i : st) k *= built.net.layers[i].inf_norm();
        r.max_stage_lipschitz = std::max(r.max_stage_lipschitz, k);
    }
    r.budget = budget;
    r.net = std::move(built.net);
    return r;
}

TelgarskyResult telgarsky_demo(int L) {
    if (L < 1 || L > 20) fail(ErrorCode::DepthOutOfRange, "depth must be in [1, 20], got " + std::to_string(L));
    TelgarskyResult r;
    r.deep.input_width = 1;
    const std::uint8_t both[2] = {1, 1};
    {
        const double w[2] = {1.0, 1.0}, b[2] = {0.0, -0.5};
        r.deep.layers.push_back(dense_layer(1, 2, w, b, both));
    }
    for (int k = 1; k < L; ++k) {
        const double w[4] = {2.0, -4.0, 2.0, -4.0}, b[2] = {0.0, -0.5};
        r.deep.layers.push_back(dense_layer(2, 2, w, b, both));
    }
    const double w[2] = {2.0, -4.0}, b[1] = {0.0};
    const std::uint8_t id[1] = {0};
    r.deep.layers.push_back(dense_layer(2, 1, w, b, id));
    r.region_count = count_linear_regions_1d(r.deep);
    r.shallow_units_needed = r.region_count - 1;
    return r;
}

std::uint64_t count_linear_regions_1d(const ReluNetwork& net, double lo, double hi) {
    if (net.input_width != 1) fail(ErrorCode::NotUnivariate, "network has " + std::to_string(net.input_width) + " inputs");
    if (!(lo < hi)) fail(ErrorCode::InvalidArgument, "empty interval");
    net.check();

    // Each piece: [a, b) with per-unit (slope, intercept) of the current layer output.
    struct Piece {
        double a, b;
        std::vector<double> slope, icpt;
    };
    std::vector<Piece> pieces{{lo, hi, {1.0}, {0.0}}};
    std::vector<Piece> next;
    std::vector<double> cuts;
    for (const auto& l : net.layers) {
        next.clear();
        for (const auto& p : pieces) {
            std::vector<double> s(l.out), c(l.out);
            for (std::size_t i = 0; i < l.out; ++i) {
                double si = 0, ci = l.bias[i];
                for (std::size_t t = 0; t < l.cols[i].size(); ++t) {
                    si += l.vals[i][t] * p.slope[l.cols[i][t]];
                    ci += l.vals[i][t] * p.icpt[l.cols[i][t]];
                }
                s[i] = si;
                c[i] = ci;
            }
            cuts.assign({p.a, p.b});
            for (std::size_t i = 0; i < l.out; ++i) {
                if (!l.relu[i] || s[i] == 0.0) continue;
                const double z = -c[i] / s[i];
                if (z > p.a && z < p.b) cuts.push_back(z);
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                const double a = cuts[k], b = cuts[k + 1];
                const double mid = 0.5 * (a + b);
                Piece q{a, b, s, c};
                for (std::size_t i = 0; i < l.out; ++i) {
                    if (l.relu[i] && s[i] * mid + c[i] <= 0.0) {
                        q.slope[i] = 0.0;
                        q.icpt[i] = 0.0;
                    }
                }
                next.push_back(std::move(q));
            }
        }
        pieces.swap(next);
    }

    auto same = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)}); };
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        bool merges = false;
        if (k > 0) {
            merges = true;
            for (std::size_t i = 0; i < pieces[k].slope.size() && merges; ++i)
                merges = same(pieces[k].slope[i], pieces[k - 1].slope[i]) && same(pieces[k].icpt[i], pieces[k - 1].icpt[i]);
        }
        if (!merges) ++count;
    }
    return count;
}

namespace {
constexpr std::size_t kDenseJsonLimit = 1u << 16;
}

json network_to_json(const ReluNetwork& net) {
    json layers = json::array();
    for (const auto& l : net.layers) {
        json jl;
        jl["in"] = l.in;
        jl["out"] = l.out;
        if (l.in * l.out <= kDenseJsonLimit) {
            jl["format"] = "dense";
            std::vector<double> w(l.in * l.out, 0.0);
            for (std::size_t i = 0; i < l.out; ++i)
                for (std::size_t t = 0; t < l.cols[i].size(); ++t) w[i * l.in + l.cols[i][t]] = l.vals[i][t];
            jl["weights"] = w;
        } else {
            jl["format"] = "sparse";
            json rows = json::array();
            for (std::size_t i = 0; i < l.out; ++i) {
                json row = json::array();
                for (std::size_t t = 0; t < l.cols[i].size(); ++t) row.push_back(json::array({l.cols[i][t], l.vals[i][t]}));
                rows.push_back(std::move(row));
            }
            jl["weights"] = std::move(rows);
        }
        jl["bias"] = l.bias;
        json mask = json::array();
        for (auto m : l.relu) mask.push_back(m ? "relu" : "identity");
        jl["mask"] = std::move(mask);
        layers.push_back(std::move(jl));
    }
    return json{{"input_width", net.input_width}, {"output_width", net.output_width()}, {"layers", std::move(layers)}};
}

ReluNetwork network_from_json(const json& j) {
    try {
        ReluNetwork net;
        net.input_width = j.at("input_width").get<std::size_t>();
        std::size_t width = net.input_width;
        for (const auto& jl : j.at("layers")) {
            const auto bias = jl.at("bias").get<std::vector<double>>();
            const std::size_t out = bias.size();
            const std::size_t in = jl.contains("in") ? jl.at("in").get<std::size_t>() : width;
            std::vector<std::uint8_t> relu;
            for (const auto& m : jl.at("mask")) {
                if (m.is_boolean()) {
                    relu.push_back(m.get<bool>() ? 1 : 0);
                    continue;
                }
                const auto s = m.get<std::string>();
                if (s != "relu" && s != "identity") fail(ErrorCode::Parse, "unknown activation '" + s + "'");
                relu.push_back(s == "relu" ? 1 : 0);
            }
            const auto format = jl.value("format", std::string("dense"));
            Layer l;
            if (format == "dense") {
                const auto w = jl.at("weights").get<std::vector<double>>();
                l = dense_layer(in, out, w, bias, relu);
            } else if (format == "sparse") {
                l.in = in;
                l.out = out;
                l.bias = bias;
                l.relu = relu;
                const auto& rows = jl.at("weights");
                if (rows.size() != out) fail(ErrorCode::DimensionMismatch, "sparse weights row count mismatch");
                for (const auto& row : rows) {
                    std::vector<std::uint32_t> cs;
                    std::vector<double> vs;
                    for (const auto& e : row) {
                        cs.push_back(e.at(0).get<std::uint32_t>());
                        vs.push_back(e.at(1).get<double>());
                    }
                    l.cols.push_back(std::move(cs));
                    l.vals.push_back(std::move(vs));
                }
            } else {
                fail(ErrorCode::Parse, "unknown layer format '" + format + "'");
            }
            width = out;
            net.layers.push_back(std::move(l));
        }
        net.check();
        return net;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, std::string("network JSON: ") + e.what());
    }
}

}  // namespace sparsec
