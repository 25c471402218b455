#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "alignnd/encoding.hpp"
#include "alignnd/graph.hpp"
#include "alignnd/peak.hpp"
#include "alignnd/tape.hpp"

namespace alignnd {

struct ModelConfig {
    RepTag rep = RepTag::Alignnd;
    int layers = 6;    // L
    int channels = 64; // D
    double cutoff_d = 6.0;
    double cutoff_angle = 2.0;
    double gate_eps = 1e-9;
    // Interpretable head: one shared scalar map by default, or one per
    // component kind (atom, bond, bond angle, dihedral).
    bool per_kind_heads = false;
    bool bond_angle_sincos = false;

    bool has_line_graph() const { return rep == RepTag::Alignn || rep == RepTag::Alignnd; }
    EncoderConfig encoder() const;
    void validate() const;
};

// One edge-gated convolution's weights: the node update (W_s, W_d and its
// layer norm) and the edge update (W_g on [h_i + h_j + e_ij] and its
// layer norm).
struct ConvWeights {
    Parameter w_self, b_self;
    Parameter w_nbr, b_nbr;
    Parameter w_gate, b_gate;
    Parameter ln_node_gamma, ln_node_beta;
    Parameter ln_edge_gamma, ln_edge_beta;
};

// Number of parameter slots a ConvWeights occupies in the flat ordering.
inline constexpr int kConvParamSlots = 10;
inline constexpr int kHeadHidden = 64;

struct ModelState {
    ModelConfig cfg;
    Parameter atom_embed;  // [3, D], one row per supported element
    std::vector<ConvWeights> atom_convs;  // L entries
    std::vector<ConvWeights> line_convs;  // L entries when the rep has a line graph
    Parameter head_w1, head_b1;           // D -> 64
    Parameter head_w2, head_b2;           // 64 -> 3
    std::vector<Parameter> interp_w, interp_b;  // 1 shared or 4 per-kind scalar maps

    // Flat parameter list in the fixed registration order used for
    // initialization draws, gradient slots, and checkpoints.
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    std::size_t parameter_count() const;
    void zero_gradients();

    int atom_conv_base(int layer) const;
    int line_conv_base(int layer) const;
    int head_base() const;
    int interp_base() const;
};

// Weights uniform in +-sqrt(1/fan_in) drawn in registration order from the
// seeded generator; layer-norm affines start at gamma=1, beta=0.
ModelState init_model(const ModelConfig& cfg, std::uint64_t seed);

// Directed message lists for one edge-gated convolution. Several directed
// messages may share one embedding (undirected bonds and angle edges carry
// two directions each; oriented dihedral entries carry one).
struct ConvAdjacency {
    const std::vector<int>* recv = nullptr;
    const std::vector<int>* send = nullptr;
    const std::vector<int>* emb = nullptr;
    int n_nodes = 0;
    int n_embeddings = 0;
};

// A graph bundle lowered to the index arrays and initial feature matrices
// the tape ops consume. Compile once per record and reuse across epochs.
struct CompiledBundle {
    RepTag tag = RepTag::Gmin;
    int n_atoms = 0;
    std::vector<int> atom_types;
    int n_bonds = 0;
    std::vector<int> bond_recv, bond_send, bond_emb;
    Array bond_features;  // [n_bonds, D]
    bool has_line = false;
    int n_angles = 0;     // angle-edge embeddings
    int n_dihedral_entries = 0;  // oriented entries (2 per geometric dihedral)
    std::vector<int> lg_recv, lg_send, lg_emb;
    Array lg_features;    // [n_angles + n_dihedral_entries, D]
    std::vector<int> angle_rows, dihedral_rows;  // row selections into lg features
    // Reporting metadata.
    std::vector<Bond> bonds;
    std::vector<AngleEdge> angles;
    std::vector<DihedralEdge> dihedrals;

    ConvAdjacency atom_adjacency() const;
    ConvAdjacency line_adjacency() const;
};

CompiledBundle compile_bundle(const GraphBundle& bundle, const ModelConfig& cfg);

// One edge-gated convolution on the tape: returns (updated nodes, updated
// edge embeddings). base_index is the parameter slot of w.w_self in the
// model's flat ordering.
std::pair<NodeRef, NodeRef> edge_gated_conv(Tape& tape, NodeRef nodes, NodeRef edges,
                                            const ConvAdjacency& adj, const ConvWeights& w,
                                            int base_index, double gate_eps);

// Full interaction stack ending in the (mu, sigma, A) head; returns the
// activated 1x3 output node.
NodeRef forward_on_tape(Tape& tape, const CompiledBundle& cb, const ModelState& state);

GaussianPeak forward(const GraphBundle& bundle, const ModelState& state);

enum class ComponentKind { Atom, Bond, BondAngle, Dihedral };
const char* component_kind_name(ComponentKind k);

struct Contribution {
    ComponentKind kind;
    std::vector<int> atom_indices;
    double value = 0.0;
};

struct ContributionReport {
    std::vector<Contribution> items;
    double total = 0.0;
};

// Tape form of the interpretable decomposition: returns the scalar total
// node plus the per-kind column nodes (rows x 1 each; unused kinds are
// invalid NodeRefs).
struct InterpretableNodes {
    NodeRef total;
    NodeRef atoms, bonds, angles, dihedrals;
};
InterpretableNodes forward_interpretable_on_tape(Tape& tape, const CompiledBundle& cb,
                                                 const ModelState& state);

ContributionReport forward_interpretable(const GraphBundle& bundle, const ModelState& state);

}  // namespace alignnd
