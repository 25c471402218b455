#include "alignnd/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "alignnd/errors.hpp"
#include "alignnd/rng.hpp"

namespace alignnd {

void GaussianPeak::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(amplitude)) {
        throw DataError("GaussianPeak: non-finite parameter");
    }
    if (sigma <= 0.0) throw DataError("GaussianPeak: sigma must be positive");
    if (amplitude < 0.0) throw DataError("GaussianPeak: amplitude must be nonnegative");
}

EncoderConfig ModelConfig::encoder() const {
    EncoderConfig e;
    e.channels = channels;
    e.cutoff_d = cutoff_d;
    e.cutoff_angle = cutoff_angle;
    e.bond_angle_sincos = bond_angle_sincos;
    return e;
}

void ModelConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("ModelConfig: layers must be >= 1");
    encoder().validate();
    if (gate_eps <= 0.0) throw std::invalid_argument("ModelConfig: gate_eps must be positive");
}

namespace {

void collect_conv(std::vector<Parameter*>& out, ConvWeights& c) {
    out.push_back(&c.w_self);
    out.push_back(&c.b_self);
    out.push_back(&c.w_nbr);
    out.push_back(&c.b_nbr);
    out.push_back(&c.w_gate);
    out.push_back(&c.b_gate);
    out.push_back(&c.ln_node_gamma);
    out.push_back(&c.ln_node_beta);
    out.push_back(&c.ln_edge_gamma);
    out.push_back(&c.ln_edge_beta);
}

bool is_layer_norm_param(const std::string& name) {
    return name.find(".ln_") != std::string::npos;
}

ConvWeights make_conv(const std::string& prefix, int d) {
    ConvWeights c;
    c.w_self = Parameter(prefix + ".w_self", d, d);
    c.b_self = Parameter(prefix + ".b_self", 1, d);
    c.w_nbr = Parameter(prefix + ".w_nbr", d, d);
    c.b_nbr = Parameter(prefix + ".b_nbr", 1, d);
    c.w_gate = Parameter(prefix + ".w_gate", d, 3 * d);
    c.b_gate = Parameter(prefix + ".b_gate", 1, d);
    c.ln_node_gamma = Parameter(prefix + ".ln_node_gamma", 1, d);
    c.ln_node_beta = Parameter(prefix + ".ln_node_beta", 1, d);
    c.ln_edge_gamma = Parameter(prefix + ".ln_edge_gamma", 1, d);
    c.ln_edge_beta = Parameter(prefix + ".ln_edge_beta", 1, d);
    return c;
}

const char* kKindNames[] = {"atom", "bond", "angle", "dihedral"};

}  // namespace

const char* component_kind_name(ComponentKind k) {
    return kKindNames[static_cast<int>(k)];
}

std::vector<Parameter*> ModelState::parameters() {
    std::vector<Parameter*> out;
    out.push_back(&atom_embed);
    for (auto& c : atom_convs) collect_conv(out, c);
    for (auto& c : line_convs) collect_conv(out, c);
    out.push_back(&head_w1);
    out.push_back(&head_b1);
    out.push_back(&head_w2);
    out.push_back(&head_b2);
    for (std::size_t k = 0; k < interp_w.size(); ++k) {
        out.push_back(&interp_w[k]);
        out.push_back(&interp_b[k]);
    }
    return out;
}

std::vector<const Parameter*> ModelState::parameters() const {
    auto mutable_list = const_cast<ModelState*>(this)->parameters();
    return {mutable_list.begin(), mutable_list.end()};
}

std::size_t ModelState::parameter_count() const {
    return const_cast<ModelState*>(this)->parameters().size();
}

void ModelState::zero_gradients() {
    for (Parameter* p : parameters()) {
        std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0);
    }
}

int ModelState::atom_conv_base(int layer) const { return 1 + layer * kConvParamSlots; }

int ModelState::line_conv_base(int layer) const {
    return 1 + (cfg.layers + layer) * kConvParamSlots;
}

int ModelState::head_base() const {
    const int stacks = cfg.has_line_graph() ? 2 : 1;
    return 1 + stacks * cfg.layers * kConvParamSlots;
}

int ModelState::interp_base() const { return head_base() + 4; }

ModelState init_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const int d = cfg.channels;

    ModelState st;
    st.cfg = cfg;
    st.atom_embed = Parameter("atom_embed", 3, d);
    for (int l = 0; l < cfg.layers; ++l) {
        st.atom_convs.push_back(make_conv("atom_conv" + std::to_string(l), d));
    }
    if (cfg.has_line_graph()) {
        for (int l = 0; l < cfg.layers; ++l) {
            st.line_convs.push_back(make_conv("line_conv" + std::to_string(l), d));
        }
    }
    st.head_w1 = Parameter("head.w1", kHeadHidden, d);
    st.head_b1 = Parameter("head.b1", 1, kHeadHidden);
    st.head_w2 = Parameter("head.w2", 3, kHeadHidden);
    st.head_b2 = Parameter("head.b2", 1, 3);
    if (cfg.per_kind_heads) {
        for (int k = 0; k < 4; ++k) {
            st.interp_w.emplace_back(std::string("interp_") + kKindNames[k] + ".w", 1, d);
            st.interp_b.emplace_back(std::string("interp_") + kKindNames[k] + ".b", 1, 1);
        }
    } else {
        st.interp_w.emplace_back("interp.w", 1, d);
        st.interp_b.emplace_back("interp.b", 1, 1);
    }

    Rng rng(seed);
    for (Parameter* p : st.parameters()) {
        if (is_layer_norm_param(p->name)) {
            const double fill = p->name.find("gamma") != std::string::npos ? 1.0 : 0.0;
            std::fill(p->value.v.begin(), p->value.v.end(), fill);
            continue;
        }
        // fan_in: columns of the weight matrix; for row-vector biases and
        // the embedding table, the channel count they feed.
        int fan_in;
        if (p->name == "atom_embed") {
            fan_in = d;
        } else if (p->value.rows > 1) {
            fan_in = p->value.cols;
        } else if (p->name == "head.b1") {
            fan_in = d;
        } else if (p->name == "head.b2") {
            fan_in = kHeadHidden;
        } else if (p->name.find("interp") == 0) {
            fan_in = d;
        } else if (p->name.find(".b_gate") != std::string::npos) {
            fan_in = 3 * d;
        } else {
            fan_in = d;
        }
        const double bound = std::sqrt(1.0 / fan_in);
        for (double& x : p->value.v) x = rng_uniform(rng, -bound, bound);
    }
    return st;
}

ConvAdjacency CompiledBundle::atom_adjacency() const {
    return {&bond_recv, &bond_send, &bond_emb, n_atoms, n_bonds};
}

ConvAdjacency CompiledBundle::line_adjacency() const {
    return {&lg_recv, &lg_send, &lg_emb, n_bonds, n_angles + n_dihedral_entries};
}

CompiledBundle compile_bundle(const GraphBundle& bundle, const ModelConfig& cfg) {
    cfg.validate();
    if (bundle.tag != cfg.rep) {
        throw DataError(std::string("bundle representation '") + rep_name(bundle.tag) +
                        "' does not match model representation '" + rep_name(cfg.rep) + "'");
    }
    const EncoderConfig enc = cfg.encoder();
    const int d = cfg.channels;

    CompiledBundle cb;
    cb.tag = bundle.tag;
    cb.n_atoms = static_cast<int>(bundle.structure.size());
    for (const auto& a : bundle.structure.atoms) {
        cb.atom_types.push_back(static_cast<int>(a.element));
    }

    cb.bonds = bundle.graph.edges;
    cb.n_bonds = static_cast<int>(cb.bonds.size());
    cb.bond_features = Array(cb.n_bonds, d);
    for (int b = 0; b < cb.n_bonds; ++b) {
        const auto feat = encode_bond(cb.bonds[b].d, enc);
        std::copy(feat.begin(), feat.end(), cb.bond_features.row(b));
        cb.bond_recv.push_back(cb.bonds[b].i);
        cb.bond_send.push_back(cb.bonds[b].j);
        cb.bond_emb.push_back(b);
        cb.bond_recv.push_back(cb.bonds[b].j);
        cb.bond_send.push_back(cb.bonds[b].i);
        cb.bond_emb.push_back(b);
    }

    if (bundle.line_graph) {
        cb.has_line = true;
        const LineGraph& lg = *bundle.line_graph;
        cb.angles = lg.angle_edges;
        cb.dihedrals = lg.dihedral_edges;
        cb.n_angles = static_cast<int>(lg.angle_edges.size());
        cb.n_dihedral_entries = static_cast<int>(lg.dihedral_edges.size());
        cb.lg_features = Array(cb.n_angles + cb.n_dihedral_entries, d);
        for (int a = 0; a < cb.n_angles; ++a) {
            const auto feat = encode_angle(AngleKind::BondAngle, lg.angle_edges[a].alpha, enc);
            std::copy(feat.begin(), feat.end(), cb.lg_features.row(a));
            cb.angle_rows.push_back(a);
            cb.lg_recv.push_back(lg.angle_edges[a].bond_a);
            cb.lg_send.push_back(lg.angle_edges[a].bond_b);
            cb.lg_emb.push_back(a);
            cb.lg_recv.push_back(lg.angle_edges[a].bond_b);
            cb.lg_send.push_back(lg.angle_edges[a].bond_a);
            cb.lg_emb.push_back(a);
        }
        for (int t = 0; t < cb.n_dihedral_entries; ++t) {
            const int row = cb.n_angles + t;
            const auto feat = encode_angle(AngleKind::Dihedral, lg.dihedral_edges[t].alpha, enc);
            std::copy(feat.begin(), feat.end(), cb.lg_features.row(row));
            cb.dihedral_rows.push_back(row);
            cb.lg_recv.push_back(lg.dihedral_edges[t].bond_to);
            cb.lg_send.push_back(lg.dihedral_edges[t].bond_from);
            cb.lg_emb.push_back(row);
        }
    }
    return cb;
}

std::pair<NodeRef, NodeRef> edge_gated_conv(Tape& tape, NodeRef nodes, NodeRef edges,
                                            const ConvAdjacency& adj, const ConvWeights& w,
                                            int base_index, double gate_eps) {
    // Gate per directed message (Eq. 3): sigmoid of the edge embedding,
    // normalized over each receiver's incoming messages.
    const NodeRef sg = tape.sigmoid(edges);
    const NodeRef sg_msg = tape.gather_rows(sg, *adj.emb);
    const NodeRef denom = tape.segment_sum(sg_msg, *adj.recv, adj.n_nodes);
    const NodeRef denom_eps = tape.add_scalar(denom, gate_eps);
    const NodeRef denom_msg = tape.gather_rows(denom_eps, *adj.recv);
    const NodeRef gate = tape.div(sg_msg, denom_msg);

    // Node update (Eq. 2).
    const NodeRef nbr = tape.linear(nodes, w.w_nbr, base_index + 2, &w.b_nbr, base_index + 3);
    const NodeRef msg = tape.mul(gate, tape.gather_rows(nbr, *adj.send));
    const NodeRef agg = tape.segment_sum(msg, *adj.recv, adj.n_nodes);
    const NodeRef self = tape.linear(nodes, w.w_self, base_index + 0, &w.b_self, base_index + 1);
    const NodeRef pre = tape.add(self, agg);
    const NodeRef nodes_out = tape.add(
        nodes, tape.silu(tape.layer_norm(pre, w.ln_node_gamma, base_index + 6, w.ln_node_beta,
                                         base_index + 7)));

    // Edge update (Eqs. 4-5) evaluated per directed message and averaged
    // over the messages sharing an embedding, keeping shared-embedding
    // updates independent of atom labeling.
    const NodeRef z = tape.concat_cols(tape.gather_rows(nodes, *adj.recv),
                                       tape.gather_rows(nodes, *adj.send),
                                       tape.gather_rows(edges, *adj.emb));
    const NodeRef zw = tape.linear(z, w.w_gate, base_index + 4, &w.b_gate, base_index + 5);
    const NodeRef u = tape.silu(
        tape.layer_norm(zw, w.ln_edge_gamma, base_index + 8, w.ln_edge_beta, base_index + 9));
    const NodeRef edge_upd = tape.segment_mean(u, *adj.emb, adj.n_embeddings);
    const NodeRef edges_out = tape.add(edges, edge_upd);

    return {nodes_out, edges_out};
}

namespace {

// Interaction stack shared by both heads: returns final atom, bond and
// line-graph embedding nodes.
struct StackNodes {
    NodeRef atoms;
    NodeRef bonds;
    NodeRef lg;  // invalid when the representation has no line graph
};

StackNodes run_stack(Tape& tape, const CompiledBundle& cb, const ModelState& state) {
    const ModelConfig& cfg = state.cfg;
    if (cb.tag != cfg.rep) {
        throw DataError(std::string("bundle representation '") + rep_name(cb.tag) +
                        "' does not match model representation '" + rep_name(cfg.rep) + "'");
    }
    NodeRef h = tape.embed_rows(state.atom_embed, 0, cb.atom_types);
    NodeRef e_bond = tape.constant(cb.bond_features);
    NodeRef e_lg;
    if (cb.has_line) e_lg = tape.constant(cb.lg_features);

    const ConvAdjacency atom_adj = cb.atom_adjacency();
    const ConvAdjacency line_adj = cb.line_adjacency();
    for (int l = 0; l < cfg.layers; ++l) {
        if (cb.has_line) {
            // Bond-angle interaction first so updated bond embeddings feed
            // the atom-bond interaction within the same layer.
            auto [bonds2, lg2] = edge_gated_conv(tape, e_bond, e_lg, line_adj,
                                                 state.line_convs[l], state.line_conv_base(l),
                                                 cfg.gate_eps);
            e_bond = bonds2;
            e_lg = lg2;
        }
        auto [h2, bonds2] = edge_gated_conv(tape, h, e_bond, atom_adj, state.atom_convs[l],
                                            state.atom_conv_base(l), cfg.gate_eps);
        h = h2;
        e_bond = bonds2;
    }
    return {h, e_bond, e_lg};
}

}  // namespace

NodeRef forward_on_tape(Tape& tape, const CompiledBundle& cb, const ModelState& state) {
    const StackNodes stack = run_stack(tape, cb, state);
    const int hb = state.head_base();
    const NodeRef pooled = tape.sum_rows(stack.atoms);
    const NodeRef hidden =
        tape.silu(tape.linear(pooled, state.head_w1, hb + 0, &state.head_b1, hb + 1));
    const NodeRef raw = tape.linear(hidden, state.head_w2, hb + 2, &state.head_b2, hb + 3);
    return tape.peak_activation(raw);
}

GaussianPeak forward(const GraphBundle& bundle, const ModelState& state) {
    const CompiledBundle cb = compile_bundle(bundle, state.cfg);
    Tape tape;
    tape.configure(state.parameter_count());
    const NodeRef out = forward_on_tape(tape, cb, state);
    const Array& v = tape.value(out);
    return {v.v[0], v.v[1], v.v[2]};
}

InterpretableNodes forward_interpretable_on_tape(Tape& tape, const CompiledBundle& cb,
                                                 const ModelState& state) {
    const StackNodes stack = run_stack(tape, cb, state);
    const int ib = state.interp_base();
    auto scalar_map = [&](NodeRef x, int kind) {
        const int slot = state.cfg.per_kind_heads ? kind : 0;
        return tape.softplus(tape.linear(x, state.interp_w[slot], ib + 2 * slot,
                                         &state.interp_b[slot], ib + 2 * slot + 1));
    };

    InterpretableNodes out;
    out.atoms = scalar_map(stack.atoms, 0);
    NodeRef total = tape.sum_all(out.atoms);
    out.bonds = scalar_map(stack.bonds, 1);
    total = tape.add(total, tape.sum_all(out.bonds));
    if (cb.has_line) {
        const NodeRef angle_emb = tape.gather_rows(stack.lg, cb.angle_rows);
        out.angles = scalar_map(angle_emb, 2);
        total = tape.add(total, tape.sum_all(out.angles));
        if (!cb.dihedral_rows.empty()) {
            const NodeRef dih_emb = tape.gather_rows(stack.lg, cb.dihedral_rows);
            out.dihedrals = scalar_map(dih_emb, 3);
            total = tape.add(total, tape.sum_all(out.dihedrals));
        }
    }
    out.total = total;
    return out;
}

ContributionReport forward_interpretable(const GraphBundle& bundle, const ModelState& state) {
    const CompiledBundle cb = compile_bundle(bundle, state.cfg);
    Tape tape;
    tape.configure(state.parameter_count());
    const InterpretableNodes nodes = forward_interpretable_on_tape(tape, cb, state);

    ContributionReport report;
    report.total = tape.value(nodes.total).v[0];
    for (int a = 0; a < cb.n_atoms; ++a) {
        report.items.push_back({ComponentKind::Atom, {a}, tape.value(nodes.atoms).v[a]});
    }
    for (int b = 0; b < cb.n_bonds; ++b) {
        report.items.push_back(
            {ComponentKind::Bond, {cb.bonds[b].i, cb.bonds[b].j}, tape.value(nodes.bonds).v[b]});
    }
    if (nodes.angles.valid()) {
        for (std::size_t a = 0; a < cb.angles.size(); ++a) {
            const auto& e = cb.angles[a];
            report.items.push_back({ComponentKind::BondAngle,
                                    {e.outer_a, e.center, e.outer_b},
                                    tape.value(nodes.angles).v[a]});
        }
    }
    if (nodes.dihedrals.valid()) {
        // The two oriented entries of one geometric dihedral are adjacent;
        // report their sum once.
        const Array& vals = tape.value(nodes.dihedrals);
        for (std::size_t t = 0; t + 1 < cb.dihedrals.size(); t += 2) {
            const auto& e = cb.dihedrals[t];
            report.items.push_back({ComponentKind::Dihedral,
                                    {e.k, e.i, e.j, e.l},
                                    vals.v[t] + vals.v[t + 1]});
        }
    }
    return report;
}

}  // namespace alignnd
