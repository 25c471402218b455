#include "alignnd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "alignnd/errors.hpp"

namespace alignnd {

namespace {

constexpr double kCuOCutoff = 2.92;  // first minimum of the Cu-O RDF, Angstrom
constexpr double kOHCutoff = 1.2;

void push_bond(std::vector<Bond>& edges, int i, int j, double d) {
    if (i > j) std::swap(i, j);
    edges.push_back({i, j, d});
}

}  // namespace

const char* rep_name(RepTag tag) {
    switch (tag) {
        case RepTag::Gmin: return "gmin";
        case RepTag::Gmax: return "gmax";
        case RepTag::Alignn: return "alignn";
        case RepTag::Alignnd: return "alignn-d";
    }
    return "?";
}

RepTag rep_from_name(const std::string& name) {
    if (name == "gmin") return RepTag::Gmin;
    if (name == "gmax") return RepTag::Gmax;
    if (name == "alignn") return RepTag::Alignn;
    if (name == "alignn-d" || name == "alignnd") return RepTag::Alignnd;
    throw DataError("unknown representation '" + name + "' (expected gmin, gmax, alignn, alignn-d)");
}

std::vector<std::vector<int>> Graph::adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
    for (const auto& e : edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    return adj;
}

Graph build_min_graph(const AtomicStructure& s) {
    s.validate();
    int cu_count = 0;
    for (const auto& a : s.atoms) {
        if (a.element == Element::Cu) ++cu_count;
    }
    if (cu_count != 1) {
        throw DataError("complex-mode min graph requires exactly one Cu atom, found " +
                        std::to_string(cu_count));
    }

    Graph g;
    g.node_count = static_cast<int>(s.size());
    int cu = -1;
    for (std::size_t a = 0; a < s.size(); ++a) {
        if (s.atoms[a].element == Element::Cu) cu = static_cast<int>(a);
    }

    std::vector<bool> o_bonded(s.size(), false);
    for (std::size_t a = 0; a < s.size(); ++a) {
        if (s.atoms[a].element != Element::O) continue;
        const double d = distance(s.atoms[a].pos, s.atoms[cu].pos);
        if (d <= kCuOCutoff) {
            push_bond(g.edges, cu, static_cast<int>(a), d);
            o_bonded[a] = true;
        }
    }

    for (std::size_t a = 0; a < s.size(); ++a) {
        if (s.atoms[a].element != Element::H) continue;
        int nearest_o = -1;
        double best = std::numeric_limits<double>::max();
        for (std::size_t b = 0; b < s.size(); ++b) {
            if (s.atoms[b].element != Element::O) continue;
            const double d = distance(s.atoms[a].pos, s.atoms[b].pos);
            if (d < best) {
                best = d;
                nearest_o = static_cast<int>(b);
            }
        }
        if (nearest_o < 0 || best > kOHCutoff) {
            throw DataError("H atom " + std::to_string(a) + " has no O within " +
                            std::to_string(kOHCutoff) + " A");
        }
        push_bond(g.edges, static_cast<int>(a), nearest_o, best);
    }

    for (std::size_t a = 0; a < s.size(); ++a) {
        if (s.atoms[a].element == Element::O && !o_bonded[a]) {
            throw DataError("O atom " + std::to_string(a) + " is not bonded to Cu (beyond " +
                            std::to_string(kCuOCutoff) + " A cutoff)");
        }
    }

    std::sort(g.edges.begin(), g.edges.end(), [](const Bond& a, const Bond& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return g;
}

Graph build_min_graph(const AtomicStructure& s, std::span<const BondRule> rules) {
    s.validate();
    Graph g;
    g.node_count = static_cast<int>(s.size());
    for (std::size_t a = 0; a < s.size(); ++a) {
        for (std::size_t b = a + 1; b < s.size(); ++b) {
            const double d = distance(s.atoms[a].pos, s.atoms[b].pos);
            for (const auto& rule : rules) {
                const bool match =
                    (s.atoms[a].element == rule.a && s.atoms[b].element == rule.b) ||
                    (s.atoms[a].element == rule.b && s.atoms[b].element == rule.a);
                if (match && d <= rule.cutoff) {
                    push_bond(g.edges, static_cast<int>(a), static_cast<int>(b), d);
                    break;
                }
            }
        }
    }
    return g;
}

Graph build_max_graph(const AtomicStructure& s) {
    s.validate();
    Graph g;
    g.node_count = static_cast<int>(s.size());
    for (std::size_t a = 0; a < s.size(); ++a) {
        for (std::size_t b = a + 1; b < s.size(); ++b) {
            push_bond(g.edges, static_cast<int>(a), static_cast<int>(b),
                      distance(s.atoms[a].pos, s.atoms[b].pos));
        }
    }
    return g;
}

LineGraph build_line_graph(const Graph& g, bool with_dihedrals, const AtomicStructure& s) {
    LineGraph lg;

    // Bonds incident to each atom, as edge indices.
    std::vector<std::vector<int>> incident(static_cast<std::size_t>(g.node_count));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        incident[g.edges[e].i].push_back(static_cast<int>(e));
        incident[g.edges[e].j].push_back(static_cast<int>(e));
    }

    auto other_end = [&](int edge, int atom) {
        const Bond& b = g.edges[edge];
        return b.i == atom ? b.j : b.i;
    };

    for (int atom = 0; atom < g.node_count; ++atom) {
        const auto& inc = incident[atom];
        for (std::size_t x = 0; x < inc.size(); ++x) {
            for (std::size_t y = x + 1; y < inc.size(); ++y) {
                const int oa = other_end(inc[x], atom);
                const int ob = other_end(inc[y], atom);
                const double alpha =
                    bond_angle(s.atoms[oa].pos, s.atoms[atom].pos, s.atoms[ob].pos);
                lg.angle_edges.push_back({inc[x], inc[y], oa, atom, ob, alpha});
            }
        }
    }

    if (with_dihedrals) {
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            const int i = g.edges[e].i;
            const int j = g.edges[e].j;
            for (int ek : incident[i]) {
                if (ek == static_cast<int>(e)) continue;
                const int k = other_end(ek, i);
                if (k == j) continue;
                for (int el : incident[j]) {
                    if (el == static_cast<int>(e)) continue;
                    const int l = other_end(el, j);
                    if (l == i || l == k) continue;
                    const double alpha = dihedral_angle(s.atoms[k].pos, s.atoms[i].pos,
                                                        s.atoms[j].pos, s.atoms[l].pos);
                    double alpha_rev = 360.0 - alpha;
                    if (alpha_rev >= 360.0) alpha_rev = 0.0;
                    lg.dihedral_edges.push_back({ek, el, k, i, j, l, alpha, false});
                    lg.dihedral_edges.push_back({el, ek, l, j, i, k, alpha_rev, true});
                }
            }
        }
    }
    return lg;
}

GraphBundle build_bundle(const AtomicStructure& s, RepTag tag) {
    GraphBundle b;
    b.tag = tag;
    b.structure = s;
    b.graph = (tag == RepTag::Gmax) ? build_max_graph(s) : build_min_graph(s);
    if (tag == RepTag::Alignn || tag == RepTag::Alignnd) {
        b.line_graph = build_line_graph(b.graph, tag == RepTag::Alignnd, s);
    }
    return b;
}

GraphBundle build_bundle(const AtomicStructure& s, RepTag tag, std::span<const BondRule> rules) {
    GraphBundle b;
    b.tag = tag;
    b.structure = s;
    b.graph = (tag == RepTag::Gmax) ? build_max_graph(s) : build_min_graph(s, rules);
    if (tag == RepTag::Alignn || tag == RepTag::Alignnd) {
        b.line_graph = build_line_graph(b.graph, tag == RepTag::Alignnd, s);
    }
    return b;
}

EdgeCounts edge_counts(const GraphBundle& bundle) {
    EdgeCounts c;
    c.bonds = static_cast<int>(bundle.graph.edges.size());
    if (bundle.line_graph) {
        c.angles = static_cast<int>(bundle.line_graph->angle_edges.size());
        c.dihedrals = static_cast<int>(bundle.line_graph->dihedral_edges.size()) / 2;
    }
    c.total = c.bonds + c.angles + c.dihedrals;
    return c;
}

}  // namespace alignnd
