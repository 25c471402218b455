#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alignnd/geometry.hpp"

namespace alignnd {

enum class RepTag { Gmin, Gmax, Alignn, Alignnd };

const char* rep_name(RepTag tag);
RepTag rep_from_name(const std::string& name);

struct Bond {
    int i, j;   // atom indices, i < j
    double d;   // Angstrom
};

struct Graph {
    int node_count = 0;
    std::vector<Bond> edges;

    // Neighbor atom lists implied by the undirected edges.
    std::vector<std::vector<int>> adjacency() const;
};

// One undirected line-graph edge between two bonds sharing an atom.
struct AngleEdge {
    int bond_a, bond_b;       // indices into Graph::edges
    int outer_a, center, outer_b;  // atom indices forming the angle
    double alpha;             // degrees [0,180]
};

// One oriented dihedral entry. Each geometric dihedral is stored twice:
// entry (bond_from = k-i, bond_to = j-l) with alpha' = dihedral(k,i,j,l),
// then the reversed entry with 360 - alpha'. Message passing sends one
// directed message per entry (from bond_from to bond_to), which makes the
// aggregate independent of atom labeling.
struct DihedralEdge {
    int bond_from, bond_to;   // indices into Graph::edges
    int k, i, j, l;           // atom indices; central bond is i-j
    double alpha;             // degrees [0,360)
    bool reversed;            // second orientation of the geometric dihedral
};

struct LineGraph {
    std::vector<AngleEdge> angle_edges;
    std::vector<DihedralEdge> dihedral_edges;  // reversed entries adjacent in pairs
};

struct GraphBundle {
    RepTag tag = RepTag::Gmin;
    AtomicStructure structure;
    Graph graph;
    std::optional<LineGraph> line_graph;
};

struct EdgeCounts {
    int bonds = 0;
    int angles = 0;
    int dihedrals = 0;  // geometric dihedrals, each dual-orientation pair counted once
    int total = 0;
};

// Distance-cutoff bonding rule for generic (non-complex) structures.
struct BondRule {
    Element a, b;
    double cutoff;  // Angstrom
};

// Minimal bond graph for one Cu complex: Cu-O pairs within 2.92 A plus
// O-H pairs within 1.2 A, each H assigned to its nearest O only.
// Throws DataError for an H with no O in range or an O not bonded to Cu.
Graph build_min_graph(const AtomicStructure& s);

// Generic minimal graph from explicit element-pair cutoff rules.
Graph build_min_graph(const AtomicStructure& s, std::span<const BondRule> rules);

// Complete pairwise graph, n(n-1)/2 edges.
Graph build_max_graph(const AtomicStructure& s);

// Line graph of g: one angle edge per unordered pair of bonds sharing an
// atom; if with_dihedrals, one dual-orientation dihedral pair per
// (k,i,j,l) with bonds k-i, i-j, j-l and k != l.
LineGraph build_line_graph(const Graph& g, bool with_dihedrals, const AtomicStructure& s);

// Assemble a bundle for the given representation (complex bonding rules).
GraphBundle build_bundle(const AtomicStructure& s, RepTag tag);
// Same with generic bonding rules for the minimal graph.
GraphBundle build_bundle(const AtomicStructure& s, RepTag tag, std::span<const BondRule> rules);

EdgeCounts edge_counts(const GraphBundle& bundle);

}  // namespace alignnd
