#include "doctest.h"
#include "helpers.hpp"
#include "redtypes/label.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace redtypes;
using redtypes::testing::from_invariants;
using redtypes::testing::kodaira;

namespace {

// brute force: minimal length of an edge-covering path, jumps allowed
int brute_min_length(const MarkedGraph& g) {
    size_t m = g.edges.size();
    int best = 2 * (int(m) + g.n()) + 3;  // some covering path is this short
    std::function<void(int, uint64_t, int, bool)> rec = [&](int cur, uint64_t used, int len,
                                                            bool jumped) {
        if (len >= best) return;
        if (used == (m == 0 ? 0 : (uint64_t(1) << m) - 1)) {
            best = len;
            return;
        }
        for (size_t e = 0; e < m; e++) {
            if (used >> e & 1) continue;
            if (g.edges[e].u == cur)
                rec(g.edges[e].v, used | uint64_t(1) << e, len + 2, false);
            else if (g.edges[e].v == cur)
                rec(g.edges[e].u, used | uint64_t(1) << e, len + 2, false);
        }
        // jump anywhere; two jumps in a row never help
        if (!jumped)
            for (int w = 0; w < g.n(); w++)
                if (w != cur) rec(w, used, len + 2, true);
    };
    for (int v = 0; v < g.n(); v++) rec(v, 0, 1, false);
    return best;
}

Fibre permuted(const Fibre& f, std::mt19937& rng) {
    std::vector<int> perm(size_t(f.size()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Fibre g;
    g.components.resize(f.components.size());
    for (int i = 0; i < f.size(); i++) g.components[size_t(perm[size_t(i)])] = f.components[size_t(i)];
    for (auto& [ij, k] : f.intersections)
        g.add_intersection(perm[size_t(ij.first)], perm[size_t(ij.second)], k);
    return g;
}

}  // namespace

TEST_CASE("minimal path on a marked path graph") {
    // A - b - C - d - E
    MarkedGraph g;
    g.vmarks = {{1}, {3}, {5}};  // A, C, E
    g.edges = {{0, 1, {2}}, {1, 2, {4}}};
    auto mp = minimal_path(g);
    CHECK(path_to_string(mp.tokens) == "v(1) e(2) v(3) e(4) v(5)");
    REQUIRE(mp.traversals.size() == 1);
    CHECK(mp.traversals[0].vertices == std::vector<int>{0, 1, 2});
}

TEST_CASE("minimal path with a jump and a revisit") {
    // two A-vertices both joined to C by b-edges, E joined to C by d
    MarkedGraph g;
    g.vmarks = {{1}, {5}, {3}, {1}};  // A, E, C, A
    g.edges = {{0, 2, {2}}, {2, 1, {4}}, {2, 3, {2}}};
    auto mp = minimal_path(g);
    // A, b, C, b, A, &, E, d, c2
    CHECK(path_to_string(mp.tokens) == "v(1) e(2) v(3) e(2) v(1) & v(5) e(4) c2");
}

TEST_CASE("single vertex path") {
    MarkedGraph g;
    g.vmarks = {{-2}};
    auto mp = minimal_path(g);
    CHECK(path_to_string(mp.tokens) == "v(-2)");
}

TEST_CASE("minimal path length matches the trail formula") {
    std::mt19937 rng(20240811);
    for (int trial = 0; trial < 200; trial++) {
        int n = 2 + int(rng() % 5);
        MarkedGraph g;
        for (int v = 0; v < n; v++) g.vmarks.push_back({Int(rng() % 3)});
        int e = 1 + int(rng() % 6);
        for (int i = 0; i < e; i++) {
            int a = int(rng() % n), b = int(rng() % n);
            if (a == b) continue;
            g.edges.push_back({a, b, {Int(rng() % 2)}});
        }
        if (g.edges.empty()) continue;
        // keep only the vertices of one connected component
        std::vector<int> root(static_cast<size_t>(n));
        std::iota(root.begin(), root.end(), 0);
        std::function<int(int)> find = [&](int x) {
            return root[size_t(x)] == x ? x : root[size_t(x)] = find(root[size_t(x)]);
        };
        for (auto& ed : g.edges) root[size_t(find(ed.u))] = find(ed.v);
        int keep = find(g.edges[0].u);
        std::vector<int> newid(size_t(n), -1);
        MarkedGraph h;
        for (int v = 0; v < n; v++)
            if (find(v) == keep) {
                newid[size_t(v)] = h.n();
                h.vmarks.push_back(g.vmarks[size_t(v)]);
            }
        for (auto& ed : g.edges)
            if (find(ed.u) == keep)
                h.edges.push_back({newid[size_t(ed.u)], newid[size_t(ed.v)], ed.mark});

        auto mp = minimal_path(h);
        CHECK(path_to_string(minimal_path(h, true).tokens) == path_to_string(mp.tokens));
        int odd = 0;
        std::vector<int> deg(size_t(h.n()), 0);
        for (auto& ed : h.edges) {
            deg[size_t(ed.u)]++;
            deg[size_t(ed.v)]++;
        }
        for (int v = 0; v < h.n(); v++) odd += deg[size_t(v)] % 2;
        int formula = 2 * (int(h.edges.size()) + std::max(0, odd / 2 - 1)) + 1;
        CHECK(int(mp.tokens.size()) == formula);
        CHECK(int(mp.tokens.size()) == brute_min_length(h));
    }
}

TEST_CASE("scores") {
    // I*_0 with one edge: (-1, 2, 0, 1, 0, 0, 3, 1, 1, 1, 1)
    PrincipalType t1{2, 0, {1, 1, 1}, {}, {}, {1}};
    CHECK(scores_principal_type(t1, {}, {}) ==
          std::vector<Int>{-1, 2, 0, 1, 0, 0, 3, 1, 1, 1, 1});
    // II with one edge: (-1, 6, 0, 1, 0, 0, 2, 2, 3, 1)
    PrincipalType t2{6, 0, {2, 3}, {}, {}, {1}};
    CHECK(scores_principal_type(t2, {}, {}) == std::vector<Int>{-1, 6, 0, 1, 0, 0, 2, 2, 3, 1});
    // III* with one edge: (-1, 4, 0, 1, 0, 0, 2, 3, 2, 3)
    PrincipalType t3{4, 0, {3, 2}, {}, {}, {3}};
    CHECK(scores_principal_type(t3, {}, {}) == std::vector<Int>{-1, 4, 0, 1, 0, 0, 2, 3, 2, 3});
    // directed edge of the worked example: weight, d, d', n
    CHECK(scores_chain(1, 1, 3, 0) == std::vector<Int>{1, 1, 3, 0});
    CHECK(scores_shape_vertex(-5) == std::vector<Int>{-5});
    CHECK(scores_shape_edge({3, 1}) == std::vector<Int>{1, 3});
}

TEST_CASE("Kodaira labels") {
    CHECK(canonical_label(kodaira("Ig1")) == "I_g1");
    CHECK(canonical_label(kodaira("I", 1)) == "I_1");
    CHECK(canonical_label(kodaira("I", 4)) == "I_4");
    CHECK(canonical_label(kodaira("I*0")) == "I*_0");
    CHECK(canonical_label(kodaira("I*", 1)) == "I*_1");
    CHECK(canonical_label(kodaira("I*", 3)) == "I*_3");
    CHECK(canonical_label(kodaira("IV")) == "IV");
    CHECK(canonical_label(kodaira("IV*")) == "IV*");
    CHECK(canonical_label(kodaira("III")) == "III");
    CHECK(canonical_label(kodaira("III*")) == "III*");
    CHECK(canonical_label(kodaira("II")) == "II");
    CHECK(canonical_label(kodaira("II*")) == "II*");
}

TEST_CASE("worked canonical label example") {
    // I*_0, II, III* leaves around an I-centre, genus 4
    Fibre f = from_invariants(
        {
            {1, 0, {}, {1, 1, 1}},       // I with three edges
            {2, 0, {1, 1, 1}, {1}},      // I*_0
            {6, 0, {2, 3}, {1}},         // II
            {4, 0, {3, 2}, {3}},         // III*
        },
        {{0, 1, 1, 1, 1}, {0, 2, 1, 1, 1}, {0, 3, 1, 3, 0}});
    REQUIRE(validate(f).empty());
    CHECK(total_genus(f) == 3);
    CHECK(canonical_label(f) == "I*_0-(1)I-(1)II&III*-(0)c2");
}

TEST_CASE("two D-tails example") {
    Fibre g = from_invariants({{2, 0, {1}, {2, 1}},
                               {2, 0, {1}, {2, 1}},
                               {2, 0, {1, 1}, {2}},
                               {2, 0, {1, 1}, {2}}},
                              {{0, 1, 1, 1, 0}, {0, 2, 2, 2, 2}, {1, 3, 2, 2, 2}});
    CHECK(canonical_label(g) == "I*_2-I*_2");
}

TEST_CASE("standalone type labels") {
    CHECK(standalone_label({2, 0, {1, 1, 1}, {}, {}, {1}}) == "I*_0(1)");
    CHECK(standalone_label({6, 0, {2, 3}, {}, {}, {1}}) == "II(1)");
    CHECK(standalone_label({1, 0, {}, {}, {}, {1, 1, 1}}) == "I(1)(1)(1)");
    CHECK(standalone_label({3, 0, {}, {}, {}, {1, 2, 3}}) == "T(1)(2)(3)");
    CHECK(standalone_label({2, 0, {1}, {}, {2}, {1}}) == "I*_1(1)");
    CHECK(standalone_label({1, 0, {}, {{1, 1}}, {}, {1}}) == "I_1(1)");
    CHECK(standalone_label({1, 1, {}, {}, {}, {1}}) == "I_g1(1)");
}

TEST_CASE("parse round trips") {
    for (auto text : {"II*", "I_g1", "I_3", "I*_0", "I*_2", "IV*", "[3]I*_0", "[2]I_g1",
                      "I*_2-I*_2", "I*_0-(1)I-(1)II&III*-(0)c2", "I_g1-I_g1", "T-{3-3}T",
                      "D--{2-2}D", "I---I", "I_1-I_1"}) {
        Fibre f = parse_label(text);
        CHECK(canonical_label(f) == text);
    }
}

TEST_CASE("parse specific fibres") {
    // I_2-(3)I_4 from the introduction's notation example
    Fibre f = parse_label("I_2-(3)I_4");
    CHECK(validate(f).empty());
    CHECK(total_genus(f) == 2);
    auto [data, recs] = decompose(f);
    std::multiset<Int> depths;
    for (auto& pc : data.pairs) depths.insert(pc.depth);
    CHECK(depths == std::multiset<Int>{2, 3, 4});

    Fibre ii = parse_label("II*");
    auto [d2, r2] = decompose(ii);
    CHECK(d2.principals[0] == PrincipalInvariants{6, 0, {5, 4, 3}, {}});
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_label("Q"), parse_error);
    CHECK_THROWS_AS(parse_label("II-"), parse_error);
    CHECK_THROWS_AS(parse_label("I*"), parse_error);
    CHECK_THROWS_AS(parse_label("T-{3-2}T"), parse_error);   // weight mismatch
    CHECK_THROWS_AS(parse_label("I_g1-(-5)I_g1"), parse_error);  // depth below minimum
    CHECK_THROWS_AS(parse_label("5^{1,2,3}"), fibre_error);  // residues sum to 6 mod 5
}

TEST_CASE("labels invariant under component permutation") {
    std::mt19937 rng(7);
    std::vector<Fibre> fixtures = {
        kodaira("II*"),
        kodaira("I*", 2),
        from_invariants({{1, 0, {}, {1, 1, 1}}, {1, 0, {}, {1, 1, 1}}},
                        {{0, 0, 1, 1, 2}, {1, 1, 1, 1, 4}, {0, 1, 1, 1, 3}}),
        from_invariants(
            {{1, 0, {}, {1, 1, 1}}, {2, 0, {1, 1, 1}, {1}}, {6, 0, {2, 3}, {1}},
             {4, 0, {3, 2}, {3}}},
            {{0, 1, 1, 1, 1}, {0, 2, 1, 1, 1}, {0, 3, 1, 3, 0}}),
    };
    for (const Fibre& f : fixtures) {
        std::string want = canonical_label(f);
        for (int trial = 0; trial < 20; trial++)
            CHECK(canonical_label(permuted(f, rng)) == want);
    }
}

TEST_CASE("typed graph round trip") {
    Fibre f = from_invariants({{23, 0, {3, 3}, {17}}, {23, 0, {4, 9}, {10}}},
                              {{0, 1, 17, 10, -1}});
    TypedGraph g = typed_graph_of(f);
    REQUIRE(g.verts.size() == 2);
    REQUIRE(g.chains.size() == 1);
    Fibre f2 = fibre_of(g);
    auto [d1, r1] = decompose(f);
    auto [d2, r2] = decompose(f2);
    CHECK(d1 == d2);
}
