// label.hpp
// Canonical labelling: minimal paths through marked multigraphs, score
// sequences for principal types and chains, label printing and parsing.

#pragma once

#include <string>
#include <vector>

#include "redtypes/classify.hpp"
#include "redtypes/fibre.hpp"

namespace redtypes {

// A finite connected undirected multigraph (no loops) with totally ordered
// marks on vertices and edges; marks are integer sequences under the
// lexicographic order.
struct MarkedGraph {
    std::vector<std::vector<Int>> vmarks;
    struct Edge {
        int u, v;
        std::vector<Int> mark;
    };
    std::vector<Edge> edges;
    int n() const { return int(vmarks.size()); }
};

struct PathToken {
    enum Kind { VertexMark = 0, Revisit = 1, EdgeMark = 2, Jump = 3 };
    Kind kind = VertexMark;
    std::vector<Int> mark;  // VertexMark / EdgeMark
    int index = 0;          // Revisit: 1-based index of the revisited vertex
    bool operator==(const PathToken&) const = default;
};

// Lexicographic order on path tokens; revisit indices compare above vertex
// marks and the jump symbol above edge marks.
bool token_less(const PathToken& a, const PathToken& b);

struct Traversal {
    std::vector<int> vertices;  // visited vertex per vertex-slot
    std::vector<int> edges;     // edge id per edge-slot, -1 for a jump
};

struct MinimalPath {
    std::vector<PathToken> tokens;
    std::vector<Traversal> traversals;  // all realisations of the tokens
};

// The minimal path: shortest, then lexicographically smallest. The graph
// must be connected and non-empty. With key_only the traversals are not
// collected and symmetric states collapse, which keeps highly symmetric
// graphs cheap; the token sequence is unchanged.
MinimalPath minimal_path(const MarkedGraph& g, bool key_only = false);

std::string path_to_string(const std::vector<PathToken>& tokens);

// Score sequences used for canonical ordering.
std::vector<Int> scores_principal_type(const PrincipalType& t,
                                       const std::vector<Int>& loop_depths,
                                       const std::vector<Int>& dtail_depths);
std::vector<Int> scores_chain(Int weight, Int d, Int dp, Int n);
std::vector<Int> scores_shape_vertex(Int chi);
std::vector<Int> scores_shape_edge(std::vector<Int> weights);

// A reduction type presented as its graph of principal types: vertices carry
// the type plus loop/D-tail depths, chains join vertices (u == v impossible;
// loops live inside the vertex data).
struct TypedVertex {
    PrincipalType type;
    std::vector<Int> loop_depths;   // parallel to type.LL
    std::vector<Int> dtail_depths;  // parallel to type.LD
};
struct TypedChain {
    int u = 0, v = 0;
    Int du = 1, dv = 1;  // initial multiplicities mod m_u / m_v
    Int depth = 0;
};
struct TypedGraph {
    std::vector<TypedVertex> verts;
    std::vector<TypedChain> chains;
};

// Canonical label of a reduction type / family representative.
std::string canonical_label(const TypedGraph& g);
std::string canonical_label(const Fibre& f);

// Standalone principal type, written with minimal loop and D-tail depths and
// explicit "(l)" suffixes for its edges.
std::string standalone_label(const PrincipalType& t);

struct parse_error : std::runtime_error {
    size_t position;
    std::string expected;
    parse_error(size_t pos, const std::string& exp, const std::string& what)
        : std::runtime_error(what), position(pos), expected(exp) {}
};

// Inverse of canonical_label; omitted depths parse as the minimal ones, so a
// family label yields its minimal-depth representative.
Fibre parse_label(const std::string& text);

// Conversion between a fibre and its typed graph (requires genus >= 2, i.e.
// at least one principal component of negative Euler characteristic).
TypedGraph typed_graph_of(const Fibre& f);
Fibre fibre_of(const TypedGraph& g);

}  // namespace redtypes
