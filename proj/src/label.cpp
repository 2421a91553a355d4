#include "redtypes/label.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace redtypes {

// ---------------------------------------------------------------------------
// marked graphs and minimal paths

bool token_less(const PathToken& a, const PathToken& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind == PathToken::Revisit) return a.index < b.index;
    if (a.kind == PathToken::Jump) return false;
    return a.mark < b.mark;
}

std::string path_to_string(const std::vector<PathToken>& tokens) {
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) s += ' ';
        switch (t.kind) {
            case PathToken::VertexMark:
            case PathToken::EdgeMark: {
                s += t.kind == PathToken::VertexMark ? 'v' : 'e';
                s += '(';
                for (size_t i = 0; i < t.mark.size(); i++) {
                    if (i) s += ',';
                    s += std::to_string(t.mark[i]);
                }
                s += ')';
                break;
            }
            case PathToken::Revisit: s += 'c' + std::to_string(t.index); break;
            case PathToken::Jump: s += '&'; break;
        }
    }
    return s;
}

namespace {

struct SearchState {
    int cur;
    uint64_t used;
    std::vector<int> order;  // first-visit order
    Traversal trav;
    int jumps = 0;
};

// minimal number of jumps to finish from v with the unused edge set
int jumps_needed(const MarkedGraph& g, int v, uint64_t unused) {
    int n = g.n();
    std::vector<int> comp(size_t(n), -1);
    std::vector<int> deg(size_t(n), 0);
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    for (size_t e = 0; e < g.edges.size(); e++) {
        if (!(unused >> e & 1)) continue;
        adj[size_t(g.edges[e].u)].push_back(g.edges[e].v);
        adj[size_t(g.edges[e].v)].push_back(g.edges[e].u);
        deg[size_t(g.edges[e].u)]++;
        deg[size_t(g.edges[e].v)]++;
    }
    int ncomp = 0;
    for (int s = 0; s < n; s++) {
        if (deg[size_t(s)] == 0 || comp[size_t(s)] >= 0) continue;
        std::vector<int> stack = {s};
        comp[size_t(s)] = ncomp;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int y : adj[size_t(x)])
                if (comp[size_t(y)] < 0) {
                    comp[size_t(y)] = ncomp;
                    stack.push_back(y);
                }
        }
        ncomp++;
    }
    if (ncomp == 0) return 0;
    std::vector<int> odd(size_t(ncomp), 0);
    for (int x = 0; x < n; x++)
        if (deg[size_t(x)] > 0 && deg[size_t(x)] % 2 == 1) odd[size_t(comp[size_t(x)])]++;
    int trails = 0;
    for (int c = 0; c < ncomp; c++) trails += std::max(1, odd[size_t(c)] / 2);
    bool free_start = false;
    if (deg[size_t(v)] > 0) {
        int c = comp[size_t(v)];
        free_start = odd[size_t(c)] == 0 || deg[size_t(v)] % 2 == 1;
    }
    return trails - (free_start ? 1 : 0);
}

}  // namespace

MinimalPath minimal_path(const MarkedGraph& g, bool key_only) {
    int n = g.n();
    if (n == 0) throw std::invalid_argument("minimal_path: empty graph");
    size_t m = g.edges.size();
    MinimalPath out;
    if (m == 0) {
        // connected and edge-free means a single vertex
        assert(n == 1);
        out.tokens.push_back({PathToken::VertexMark, g.vmarks[0], 0});
        out.traversals.push_back({{0}, {}});
        return out;
    }
    assert(m <= 64);
    uint64_t all = m == 64 ? ~uint64_t(0) : ((uint64_t(1) << m) - 1);

    int total_jumps = n == 1 ? 0 : 1 << 30;
    for (int v = 0; v < n; v++) total_jumps = std::min(total_jumps, jumps_needed(g, v, all));

    // key_only: a vertex with no unused edges can never be revisited (an
    // edge to it would be unused, and a minimal path never jumps to a dead
    // end), so its identity no longer matters, only its position
    auto mask_order = [&](const SearchState& s) {
        std::vector<int> masked = s.order;
        for (int& v : masked) {
            bool live = false;
            for (size_t e = 0; e < m; e++)
                if (!(s.used >> e & 1) && (g.edges[e].u == v || g.edges[e].v == v)) live = true;
            if (!live && v != s.cur) v = -1;
        }
        return masked;
    };
    auto dedup = [&](std::vector<SearchState>& states) {
        if (key_only) {
            std::set<std::tuple<int, uint64_t, std::vector<int>>> seen;
            std::vector<SearchState> keep;
            for (auto& s : states)
                if (seen.insert({s.cur, s.used, mask_order(s)}).second) keep.push_back(s);
            states = keep;
        } else {
            std::sort(states.begin(), states.end(),
                      [](const SearchState& a, const SearchState& b) {
                          return std::tie(a.trav.vertices, a.trav.edges) <
                                 std::tie(b.trav.vertices, b.trav.edges);
                      });
            states.erase(std::unique(states.begin(), states.end(),
                                     [](const SearchState& a, const SearchState& b) {
                                         return a.trav.vertices == b.trav.vertices &&
                                                a.trav.edges == b.trav.edges;
                                     }),
                         states.end());
        }
    };

    // frontier of partial paths, filtered token by token
    std::vector<SearchState> frontier;
    {
        PathToken best;
        bool have = false;
        for (int v = 0; v < n; v++) {
            if (jumps_needed(g, v, all) != total_jumps) continue;
            PathToken t{PathToken::VertexMark, g.vmarks[size_t(v)], 0};
            if (!have || token_less(t, best)) {
                best = t;
                have = true;
            }
        }
        assert(have);
        out.tokens.push_back(best);
        for (int v = 0; v < n; v++) {
            if (jumps_needed(g, v, all) != total_jumps) continue;
            if (g.vmarks[size_t(v)] == best.mark)
                frontier.push_back({v, 0, {v}, {{v}, {}}, 0});
        }
        dedup(frontier);
    }

    while (true) {
        bool done = std::all_of(frontier.begin(), frontier.end(),
                                [&](const SearchState& s) { return s.used == all; });
        if (done) break;

        // edge slot: real edge or jump; completion must stay exact
        struct Move {
            size_t state;
            int edge;  // -1 = jump
        };
        PathToken best;
        bool have = false;
        std::vector<Move> moves;
        for (size_t si = 0; si < frontier.size(); si++) {
            const SearchState& s = frontier[si];
            for (size_t e = 0; e < m; e++) {
                if (s.used >> e & 1) continue;
                if (g.edges[e].u != s.cur && g.edges[e].v != s.cur) continue;
                int w = g.edges[e].u == s.cur ? g.edges[e].v : g.edges[e].u;
                uint64_t rest = s.used | (uint64_t(1) << e);
                if (jumps_needed(g, w, all & ~rest) != total_jumps - s.jumps) continue;
                PathToken t{PathToken::EdgeMark, g.edges[e].mark, 0};
                if (!have || token_less(t, best)) {
                    best = t;
                    moves.clear();
                    have = true;
                }
                if (t == best) moves.push_back({si, int(e)});
            }
            if (s.jumps < total_jumps) {
                PathToken t{PathToken::Jump, {}, 0};
                if (!have || token_less(t, best)) {
                    best = t;
                    moves.clear();
                    have = true;
                }
                if (t == best) moves.push_back({si, -1});
            }
        }
        assert(have && "minimal_path: dead end");
        out.tokens.push_back(best);

        // vertex slot following the chosen edge token
        PathToken vbest;
        bool vhave = false;
        std::vector<SearchState> candidates;
        for (const Move& mv : moves) {
            const SearchState& s = frontier[mv.state];
            auto consider = [&](int w, int edge_id) {
                SearchState s2 = s;
                if (edge_id >= 0)
                    s2.used |= uint64_t(1) << edge_id;
                else
                    s2.jumps++;
                if (jumps_needed(g, w, all & ~s2.used) != total_jumps - s2.jumps) return;
                s2.cur = w;
                if (!key_only) {
                    s2.trav.edges.push_back(edge_id);
                    s2.trav.vertices.push_back(w);
                }
                auto it = std::find(s2.order.begin(), s2.order.end(), w);
                PathToken t;
                if (it == s2.order.end()) {
                    t = {PathToken::VertexMark, g.vmarks[size_t(w)], 0};
                    s2.order.push_back(w);
                } else {
                    t = {PathToken::Revisit, {}, int(it - s2.order.begin()) + 1};
                }
                if (!vhave || token_less(t, vbest)) {
                    vbest = t;
                    candidates.clear();
                    vhave = true;
                }
                if (t == vbest) candidates.push_back(s2);
            };
            if (mv.edge >= 0) {
                const auto& e = g.edges[size_t(mv.edge)];
                consider(e.u == s.cur ? e.v : e.u, mv.edge);
            } else {
                for (int w = 0; w < n; w++)
                    if (w != s.cur) consider(w, -1);
            }
        }
        assert(vhave);
        out.tokens.push_back(vbest);
        dedup(candidates);
        frontier = candidates;
    }
    if (!key_only)
        for (auto& s : frontier) out.traversals.push_back(s.trav);
    return out;
}

// ---------------------------------------------------------------------------
// scores

std::vector<Int> scores_principal_type(const PrincipalType& t,
                                       const std::vector<Int>& loop_depths,
                                       const std::vector<Int>& dtail_depths) {
    std::vector<Int> s = {t.chi(), t.m, -t.g, Int(t.LM.size()), Int(t.LD.size()),
                          Int(t.LL.size()), Int(t.O.size())};
    std::vector<Int> O = t.O;
    sort_residues(O, t.m);
    s.insert(s.end(), O.begin(), O.end());
    for (auto& [a, b] : t.LL) {
        s.push_back(a);
        s.push_back(b);
    }
    std::vector<Int> LD = t.LD, LM = t.LM;
    sort_residues(LD, t.m);
    sort_residues(LM, t.m);
    s.insert(s.end(), LD.begin(), LD.end());
    s.insert(s.end(), LM.begin(), LM.end());
    s.insert(s.end(), loop_depths.begin(), loop_depths.end());
    s.insert(s.end(), dtail_depths.begin(), dtail_depths.end());
    return s;
}

std::vector<Int> scores_chain(Int weight, Int d, Int dp, Int n) { return {weight, d, dp, n}; }

std::vector<Int> scores_shape_vertex(Int chi) { return {chi}; }

std::vector<Int> scores_shape_edge(std::vector<Int> weights) {
    std::sort(weights.begin(), weights.end());
    return weights;
}

// ---------------------------------------------------------------------------
// typed graphs

namespace {

struct DTail {
    Int l = 0;      // residue at the owner, gcd(l, m) even
    Int depth = 0;
};
struct Loop {
    Int a = 0, b = 0;
    Int depth = 0;
};

// working form of a vertex: principal type with depths attached
struct VertexData {
    Int m = 1, g = 0;
    std::vector<Int> O;
    std::vector<Loop> loops;
    std::vector<DTail> dtails;
    std::vector<Int> LM;

    PrincipalType type() const {
        PrincipalType t;
        t.m = m;
        t.g = g;
        t.O = O;
        for (auto& l : loops) t.LL.push_back({l.a, l.b});
        for (auto& d : dtails) t.LD.push_back(d.l);
        t.LM = LM;
        sort_residues(t.O, m);
        std::sort(t.LL.begin(), t.LL.end(), [&](auto& x, auto& y) {
            return std::tuple(gcd(x.first, m), x.first, x.second) <
                   std::tuple(gcd(y.first, m), y.first, y.second);
        });
        sort_residues(t.LD, m);
        sort_residues(t.LM, m);
        return t;
    }
    void sort_canonical() {
        sort_residues(O, m);
        for (auto& l : loops)
            if (residue_less(l.b, l.a, m)) std::swap(l.a, l.b);
        std::sort(loops.begin(), loops.end(), [&](const Loop& x, const Loop& y) {
            return std::tuple(gcd(x.a, m), x.a, x.b, x.depth) <
                   std::tuple(gcd(y.a, m), y.a, y.b, y.depth);
        });
        std::sort(dtails.begin(), dtails.end(), [&](const DTail& x, const DTail& y) {
            return std::tuple(gcd(x.l, m), x.l, x.depth) < std::tuple(gcd(y.l, m), y.l, y.depth);
        });
        sort_residues(LM, m);
    }
    std::vector<Int> score() const {
        PrincipalType t = type();
        std::vector<Int> ld, dd;
        for (auto& l : loops) ld.push_back(l.depth);
        for (auto& d : dtails) dd.push_back(d.depth);
        return scores_principal_type(t, ld, dd);
    }
};

VertexData vertex_data(const TypedVertex& tv) {
    VertexData v;
    v.m = tv.type.m;
    v.g = tv.type.g;
    v.O = tv.type.O;
    for (size_t i = 0; i < tv.type.LL.size(); i++)
        v.loops.push_back({tv.type.LL[i].first, tv.type.LL[i].second,
                           i < tv.loop_depths.size() ? tv.loop_depths[i] : 0});
    for (size_t i = 0; i < tv.type.LD.size(); i++)
        v.dtails.push_back({tv.type.LD[i], i < tv.dtail_depths.size() ? tv.dtail_depths[i] : 0});
    v.LM = tv.type.LM;
    v.sort_canonical();
    return v;
}

}  // namespace

TypedGraph typed_graph_of(const Fibre& f) {
    auto [data, recs] = decompose(f);
    std::vector<Int> chis;
    for (auto& p : data.principals) chis.push_back(chi(p));
    std::vector<int> vid(data.principals.size(), -1);
    TypedGraph g;
    for (size_t i = 0; i < data.principals.size(); i++) {
        if (chis[i] >= 0) continue;
        vid[i] = int(g.verts.size());
        TypedVertex tv;
        tv.type.m = data.principals[i].m;
        tv.type.g = data.principals[i].g;
        tv.type.O = data.principals[i].O;
        g.verts.push_back(tv);
    }
    if (g.verts.empty()) throw fibre_error("typed_graph_of: no principal component with chi < 0");
    for (auto& pc : data.pairs) {
        bool negi = chis[size_t(pc.pi)] < 0, negj = chis[size_t(pc.pj)] < 0;
        if (negi && negj) {
            if (pc.pi == pc.pj) {
                auto& tv = g.verts[size_t(vid[size_t(pc.pi)])];
                Int a = pc.di, b = pc.dj;
                if (residue_less(b, a, tv.type.m)) std::swap(a, b);
                tv.type.LL.push_back({a, b});
                tv.loop_depths.push_back(pc.depth);
            } else {
                g.verts[size_t(vid[size_t(pc.pi)])].type.LM.push_back(pc.di);
                g.verts[size_t(vid[size_t(pc.pj)])].type.LM.push_back(pc.dj);
                g.chains.push_back({vid[size_t(pc.pi)], vid[size_t(pc.pj)], pc.di, pc.dj, pc.depth});
            }
        } else if (negi != negj) {
            // D-tail: chi = 0 end must be the D-tail component
            int owner = negi ? pc.pi : pc.pj;
            int tail = negi ? pc.pj : pc.pi;
            Int l = negi ? pc.di : pc.dj;
            const auto& tp = data.principals[size_t(tail)];
            Int w = gcd(l, data.principals[size_t(owner)].m);
            if (tp.g != 0 || tp.m != w || tp.O != std::vector<Int>{w / 2, w / 2} ||
                tp.L != std::vector<Int>{w})
                throw fibre_error("typed_graph_of: chi = 0 neighbour is not a D-tail");
            auto& tv = g.verts[size_t(vid[size_t(owner)])];
            tv.type.LD.push_back(l);
            tv.dtail_depths.push_back(pc.depth);
        } else {
            throw fibre_error("typed_graph_of: chain between two chi = 0 components");
        }
    }
    // canonical per-vertex order of loops, D-tails
    for (auto& tv : g.verts) {
        VertexData v = vertex_data(tv);
        tv.type = v.type();
        tv.loop_depths.clear();
        tv.dtail_depths.clear();
        for (auto& l : v.loops) tv.loop_depths.push_back(l.depth);
        for (auto& d : v.dtails) tv.dtail_depths.push_back(d.depth);
    }
    return g;
}

Fibre fibre_of(const TypedGraph& g) {
    DecompositionData data;
    for (auto& tv : g.verts) {
        PrincipalInvariants p;
        p.m = tv.type.m;
        p.g = tv.type.g;
        p.O = tv.type.O;
        for (auto& [a, b] : tv.type.LL) {
            p.L.push_back(a);
            p.L.push_back(b);
        }
        p.L.insert(p.L.end(), tv.type.LD.begin(), tv.type.LD.end());
        p.L.insert(p.L.end(), tv.type.LM.begin(), tv.type.LM.end());
        sort_residues(p.O, p.m);
        sort_residues(p.L, p.m);
        data.principals.push_back(p);
    }
    for (size_t vi = 0; vi < g.verts.size(); vi++) {
        const auto& tv = g.verts[vi];
        for (size_t i = 0; i < tv.type.LL.size(); i++)
            data.pairs.push_back({int(vi), int(vi), tv.type.LL[i].first, tv.type.LL[i].second,
                                  tv.loop_depths[i]});
        for (size_t i = 0; i < tv.type.LD.size(); i++) {
            Int l = tv.type.LD[i];
            Int w = gcd(l, tv.type.m);
            PrincipalInvariants tail;
            tail.m = w;
            tail.g = 0;
            tail.O = {w / 2, w / 2};
            tail.L = {w};
            data.principals.push_back(tail);
            data.pairs.push_back(
                {int(vi), int(data.principals.size()) - 1, l, w, tv.dtail_depths[i]});
        }
    }
    // count LM usage to keep the L multisets consistent
    for (auto& c : g.chains) data.pairs.push_back({c.u, c.v, c.du, c.dv, c.depth});
    return assemble(data);
}

// ---------------------------------------------------------------------------
// label printing

namespace {

struct NamedCore {
    const char* name;
    Int m;
    std::vector<Int> residues;
};
const std::vector<NamedCore>& named_cores() {
    static const std::vector<NamedCore> t = {
        {"I", 1, {}},           {"D", 2, {1, 1}},       {"T", 3, {1, 2}},
        {"I*_0", 2, {1, 1, 1, 1}}, {"IV", 3, {1, 1, 1}},   {"IV*", 3, {2, 2, 2}},
        {"III", 4, {1, 1, 2}},  {"III*", 4, {3, 3, 2}}, {"II", 6, {1, 2, 3}},
        {"II*", 6, {5, 4, 3}},
    };
    return t;
}

// visible-residue pool of one vertex, for the greedy omission rules
struct Pool {
    Int m;
    std::multiset<Int> res;  // nonzero residues not yet consumed

    void remove(Int x) {
        auto it = res.find(x);
        assert(it != res.end());
        res.erase(it);
    }
    bool has(Int x) const { return res.count(x) > 0; }

    // smallest (by the (gcd, value) order) pair with equal gcds, zeros last
    std::optional<std::pair<Int, Int>> greedy_loop() const {
        std::optional<std::pair<Int, Int>> best;
        std::vector<Int> v(res.begin(), res.end());
        sort_residues(v, m);
        for (size_t i = 0; i < v.size(); i++)
            for (size_t j = i + 1; j < v.size(); j++) {
                if (gcd(v[i], m) != gcd(v[j], m)) continue;
                std::pair<Int, Int> p = {v[i], v[j]};
                if (!best || pair_less(p, *best)) best = p;
                break;  // later j only give larger second entries for this i
            }
        std::pair<Int, Int> zero = {m, m};
        if (!best || pair_less(zero, *best)) {
            if (!best) best = zero;
            // zeros sort after all visible residues (gcd = m is maximal)
        }
        if (!best) best = zero;
        return best;
    }
    bool pair_less(const std::pair<Int, Int>& a, const std::pair<Int, Int>& b) const {
        return std::tuple(gcd(a.first, m), a.first, gcd(a.second, m), a.second) <
               std::tuple(gcd(b.first, m), b.first, gcd(b.second, m), b.second);
    }

    // smallest element with even gcd, zero (= m) last
    std::optional<Int> greedy_dtail() const {
        std::vector<Int> v(res.begin(), res.end());
        sort_residues(v, m);
        for (Int x : v)
            if (gcd(x, m) % 2 == 0) return x;
        if (m % 2 == 0) return m;
        return std::nullopt;
    }
};

// smallest cross pair of equal weight between two pools
std::optional<std::pair<Int, Int>> greedy_edge(const Pool& a, const Pool& b) {
    std::vector<Int> va(a.res.begin(), a.res.end()), vb(b.res.begin(), b.res.end());
    va.push_back(a.m);
    vb.push_back(b.m);
    sort_residues(va, a.m);
    sort_residues(vb, b.m);
    std::optional<std::pair<Int, Int>> best;
    for (Int x : va)
        for (Int y : vb) {
            if (gcd(x, a.m) != gcd(y, b.m)) continue;
            std::pair<Int, Int> p = {x, y};
            auto key = [&](const std::pair<Int, Int>& q) {
                return std::tuple(gcd(q.first, a.m), q.first, q.second);
            };
            if (!best || key(p) < key(*best)) best = p;
            break;
        }
    return best;
}

Int dtail_min_depth(Int m, Int l) {
    Int w = gcd(l, m);
    return *min_depth(m, l, w, w);
}

std::string sub_items_to_string(const std::vector<std::string>& items) {
    if (items.empty()) return "";
    if (items.size() == 1 && items[0].find_first_of("{},") == std::string::npos)
        return "_" + items[0];
    std::string s = "_{";
    for (size_t i = 0; i < items.size(); i++) {
        if (i) s += ',';
        s += items[i];
    }
    return s + "}";
}

// print one principal type (with depths); consumes loop/D-tail residues from
// the pool, leaving edge residues for the caller
std::string print_segment(const VertexData& v, Pool& pool) {
    Int m = v.m;
    // weight and core
    Int c = m;
    for (Int x : v.O) c = gcd(c, x);
    for (auto& l : v.loops) c = gcd(gcd(c, l.a), l.b);
    for (auto& d : v.dtails) c = gcd(c, d.l);
    for (Int x : v.LM) c = gcd(c, x);
    std::vector<Int> core_res;
    for (Int x : v.O) core_res.push_back(x / c);
    for (auto& l : v.loops) {
        if (l.a != m) core_res.push_back(l.a / c);
        if (l.b != m) core_res.push_back(l.b / c);
    }
    for (auto& d : v.dtails)
        if (d.l != m) core_res.push_back(d.l / c);
    for (Int x : v.LM)
        if (x != m) core_res.push_back(x / c);
    Int core_m = m / c;
    sort_residues(core_res, core_m);

    std::string name;
    for (const auto& nc : named_cores())
        if (nc.m == core_m && nc.residues == core_res) {
            name = nc.name;
            break;
        }

    std::vector<std::string> items;
    // Kodaira I*_n: core D with a zero-residue D-tail
    int star = -1;
    if (name == "D") {
        for (size_t i = 0; i < v.dtails.size(); i++)
            if (v.dtails[i].l == m && (star < 0 || v.dtails[i].depth < v.dtails[size_t(star)].depth))
                star = int(i);
        if (star >= 0) {
            name = "I*";
            items.push_back(std::to_string(v.dtails[size_t(star)].depth));
        }
    }
    if (name == "I*_0") {
        name = "I*";
        items.push_back("0");
    }
    if (name.empty()) {
        name = std::to_string(core_m) + "^{";
        for (size_t i = 0; i < core_res.size(); i++) {
            if (i) name += ',';
            name += std::to_string(core_res[i]);
        }
        name += "}";
    }

    auto loop_item = [&](const Loop& l) {
        auto greedy = pool.greedy_loop();
        std::pair<Int, Int> truth = {l.a, l.b};
        bool braces = !greedy || *greedy != truth;
        if (l.a != m) pool.remove(l.a);
        if (l.b != m) pool.remove(l.b);
        Int nmin = *min_depth(m, l.a, m, l.b);
        bool show_depth = !braces || l.depth != nmin;
        std::string item;
        if (braces) item += "{" + std::to_string(l.a) + "-" + std::to_string(l.b) + "}";
        if (show_depth) item += std::to_string(l.depth);
        return item;
    };
    // Kodaira compatibility: the first loop of an I-core type takes the
    // name slot ("I_n"), ahead of the genus
    size_t loop_start = 0;
    if (name == "I" && !v.loops.empty()) {
        items.push_back(loop_item(v.loops[0]));
        loop_start = 1;
    }
    if (v.g > 0) items.push_back("g" + std::to_string(v.g));
    for (size_t i = loop_start; i < v.loops.size(); i++) items.push_back(loop_item(v.loops[i]));
    for (size_t i = 0; i < v.dtails.size(); i++) {
        if (int(i) == star) continue;
        const DTail& d = v.dtails[i];
        auto greedy = pool.greedy_dtail();
        bool braces = !greedy || *greedy != d.l;
        if (d.l != m) pool.remove(d.l);
        bool show_depth = d.depth != dtail_min_depth(m, d.l);
        std::string item;
        if (braces) item += "{" + std::to_string(d.l) + "}";
        if (show_depth) item += std::to_string(d.depth);
        item += "D";
        items.push_back(item);
    }
    if (star >= 0 && v.dtails[size_t(star)].l != m) pool.remove(v.dtails[size_t(star)].l);

    std::string s;
    if (c > 1) s += "[" + std::to_string(c) + "]";
    s += name;
    s += sub_items_to_string(items);
    return s;
}

Pool make_pool(const VertexData& v) {
    Pool p;
    p.m = v.m;
    for (Int x : v.O) p.res.insert(x);
    for (auto& l : v.loops) {
        if (l.a != v.m) p.res.insert(l.a);
        if (l.b != v.m) p.res.insert(l.b);
    }
    for (auto& d : v.dtails)
        if (d.l != v.m) p.res.insert(d.l);
    for (Int x : v.LM)
        if (x != v.m) p.res.insert(x);
    return p;
}

struct BundleChain {
    Int du, dv, depth;  // du at the "from" side
};

std::string print_edge_token(Pool& from, Pool& to, Int mu, Int mv, const BundleChain& ch,
                             bool target_revisit) {
    auto greedy = greedy_edge(from, to);
    std::pair<Int, Int> truth = {ch.du, ch.dv};
    bool braces = !greedy || *greedy != truth;
    if (ch.du != mu) from.remove(ch.du);
    if (ch.dv != mv) to.remove(ch.dv);
    Int nmin = *min_depth(mu, ch.du, mv, ch.dv);
    bool show_depth = ch.depth != nmin || target_revisit;
    std::string s = "-";
    if (braces) s += "{" + std::to_string(ch.du) + "-" + std::to_string(ch.dv) + "}";
    if (show_depth) s += "(" + std::to_string(ch.depth) + ")";
    return s;
}

}  // namespace

std::string standalone_label(const PrincipalType& t) {
    TypedVertex tv;
    tv.type = t;
    for (auto& [a, b] : t.LL) tv.loop_depths.push_back(*min_depth(t.m, a, t.m, b));
    for (Int l : t.LD) tv.dtail_depths.push_back(dtail_min_depth(t.m, l));
    VertexData v = vertex_data(tv);
    Pool pool = make_pool(v);
    std::string s = print_segment(v, pool);
    std::vector<Int> LM = t.LM;
    sort_residues(LM, t.m);
    for (Int l : LM) s += "(" + std::to_string(l) + ")";
    return s;
}

std::string canonical_label(const TypedGraph& g) {
    assert(!g.verts.empty());
    std::vector<VertexData> verts;
    for (auto& tv : g.verts) verts.push_back(vertex_data(tv));

    if (g.verts.size() == 1) {
        assert(g.chains.empty());
        Pool pool = make_pool(verts[0]);
        return print_segment(verts[0], pool);
    }

    // bundles between unordered vertex pairs
    std::map<std::pair<int, int>, std::vector<TypedChain>> bundles;
    for (auto& c : g.chains) {
        auto key = std::minmax(c.u, c.v);
        TypedChain cc = c;
        if (c.u != key.first) {
            std::swap(cc.u, cc.v);
            std::swap(cc.du, cc.dv);
        }
        bundles[{key.first, key.second}].push_back(cc);
    }

    MarkedGraph shape;
    for (auto& v : verts) shape.vmarks.push_back(scores_shape_vertex(chi(v.type().invariants())));
    std::vector<std::pair<int, int>> bundle_keys;
    for (auto& [uv, chains] : bundles) {
        std::vector<Int> w;
        for (auto& c : chains) w.push_back(gcd(c.du, verts[size_t(c.u)].m));
        shape.edges.push_back({uv.first, uv.second, scores_shape_edge(w)});
        bundle_keys.push_back(uv);
    }

    MinimalPath mp = minimal_path(shape);

    // fine comparison of traversals by the (a)/(b) scores
    auto bundle_scores = [&](int from, int to) {
        auto key = std::minmax(from, to);
        std::vector<BundleChain> chs;
        for (auto& c : bundles[{key.first, key.second}]) {
            BundleChain b{c.du, c.dv, c.depth};
            if (c.u != from) std::swap(b.du, b.dv);
            chs.push_back(b);
        }
        Int mu = verts[size_t(from)].m, mv = verts[size_t(to)].m;
        std::sort(chs.begin(), chs.end(), [&](const BundleChain& a, const BundleChain& b) {
            return std::tuple(gcd(a.du, mu), a.du, a.dv, a.depth) <
                   std::tuple(gcd(b.du, mu), b.du, b.dv, b.depth);
        });
        return chs;
    };
    auto fine_sequence = [&](const Traversal& tr) {
        std::vector<std::vector<Int>> seq;
        std::vector<int> seen;
        for (size_t i = 0; i < tr.vertices.size(); i++) {
            int v = tr.vertices[i];
            if (i > 0) {
                int e = tr.edges[i - 1];
                if (e < 0)
                    seq.push_back({Int(1) << 40});  // jump, above all edge scores
                else {
                    std::vector<Int> s = {0};
                    int from = tr.vertices[i - 1];
                    for (auto& b : bundle_scores(from, v)) {
                        auto cs = scores_chain(gcd(b.du, verts[size_t(from)].m), b.du, b.dv, b.depth);
                        s.insert(s.end(), cs.begin(), cs.end());
                    }
                    seq.push_back(s);
                }
            }
            auto it = std::find(seen.begin(), seen.end(), v);
            if (it == seen.end()) {
                std::vector<Int> s = {0};
                auto vs = verts[size_t(v)].score();
                s.insert(s.end(), vs.begin(), vs.end());
                seq.push_back(s);
                seen.push_back(v);
            } else {
                seq.push_back({Int(1) << 40, Int(it - seen.begin()) + 1});
            }
        }
        return seq;
    };

    std::vector<const Traversal*> best;
    std::vector<std::vector<Int>> best_seq;
    for (auto& tr : mp.traversals) {
        auto s = fine_sequence(tr);
        if (best.empty() || s < best_seq) {
            best_seq = s;
            best = {&tr};
        } else if (s == best_seq)
            best.push_back(&tr);
    }

    std::string result;
    for (const Traversal* trp : best) {
        const Traversal& tr = *trp;
        std::vector<Pool> pools;
        for (auto& v : verts) pools.push_back(make_pool(v));
        // loops and D-tails consume their residues before any edge
        std::vector<std::string> segments(verts.size());
        // print segments lazily in traversal order
        std::string s;
        std::vector<int> seen;
        std::vector<char> seg_printed(verts.size(), 0);
        // pre-consume loop and D-tail residues: print_segment does this, so
        // render every segment up front against its own pool
        for (size_t v = 0; v < verts.size(); v++) segments[v] = print_segment(verts[v], pools[v]);
        for (size_t i = 0; i < tr.vertices.size(); i++) {
            int v = tr.vertices[i];
            auto it = std::find(seen.begin(), seen.end(), v);
            bool revisit = it != seen.end();
            if (i > 0) {
                int e = tr.edges[i - 1];
                if (e < 0)
                    s += "&";
                else {
                    int from = tr.vertices[i - 1];
                    for (auto& b : bundle_scores(from, v))
                        s += print_edge_token(pools[size_t(from)], pools[size_t(v)],
                                              verts[size_t(from)].m, verts[size_t(v)].m, b,
                                              revisit);
                }
            }
            if (revisit)
                s += "c" + std::to_string(it - seen.begin() + 1);
            else {
                s += segments[size_t(v)];
                seen.push_back(v);
            }
        }
        if (result.empty() || s < result) result = s;
    }
    return result;
}

std::string canonical_label(const Fibre& f) {
    auto bad = validate(f);
    if (!bad.empty()) throw fibre_error("canonical_label: invalid fibre: " + bad.front());
    if (is_exceptional_loop(f)) {
        auto [m, n] = exceptional_loop_params(f);
        std::string s;
        if (m > 1) s += "[" + std::to_string(m) + "]";
        return s + "I_" + std::to_string(n);
    }
    auto [data, recs] = decompose(f);
    bool has_negative = false;
    for (auto& p : data.principals)
        if (chi(p) < 0) has_negative = true;
    if (has_negative) return canonical_label(typed_graph_of(f));

    // genus 1: label the principal type of one principal component
    std::string result;
    for (size_t i = 0; i < data.principals.size(); i++) {
        VertexData v;
        v.m = data.principals[i].m;
        v.g = data.principals[i].g;
        v.O = data.principals[i].O;
        bool ok = true;
        for (auto& pc : data.pairs) {
            if (pc.pi == int(i) && pc.pj == int(i)) {
                v.loops.push_back({pc.di, pc.dj, pc.depth});
            } else if (pc.pi == int(i) || pc.pj == int(i)) {
                // the other end must be a D-tail shaped component
                v.dtails.push_back({pc.pi == int(i) ? pc.di : pc.dj, pc.depth});
            }
        }
        if (!ok) continue;
        v.sort_canonical();
        Pool pool = make_pool(v);
        std::string s = print_segment(v, pool);
        if (result.empty() || s < result) result = s;
    }
    if (result.empty()) throw fibre_error("canonical_label: no principal component");
    return result;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct Parser {
    const std::string& text;
    size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) pos++;
    }
    bool eat(const std::string& s) {
        skip_ws();
        if (text.compare(pos, s.size(), s) == 0) {
            pos += s.size();
            return true;
        }
        return false;
    }
    bool peek(const std::string& s) {
        skip_ws();
        return text.compare(pos, s.size(), s) == 0;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    [[noreturn]] void fail(const std::string& expected) {
        throw parse_error(pos, expected, "parse error at position " + std::to_string(pos) +
                                             ": expected " + expected);
    }
    Int integer(bool allow_sign) {
        skip_ws();
        size_t p = pos;
        if (allow_sign && p < text.size() && text[p] == '-') p++;
        size_t d = p;
        while (d < text.size() && std::isdigit(static_cast<unsigned char>(text[d]))) d++;
        if (d == p) fail("integer");
        Int value = std::stoll(text.substr(pos, d - pos));
        pos = d;
        return value;
    }
};

struct PLoopItem {
    bool has_pair = false;
    Int a = 0, b = 0;
    bool has_depth = false;
    Int depth = 0;
};
struct PDTailItem {
    bool has_l = false;
    Int l = 0;
    bool has_depth = false;
    Int depth = 0;
};
struct PSegment {
    Int mult = 1;  // [c]
    Int core_m = 1;
    std::vector<Int> core_res;
    bool star = false;  // I* with Kodaira index
    Int star_n = 0;
    Int genus = 0;
    std::vector<PLoopItem> loops;
    std::vector<PDTailItem> dtails;
    size_t text_pos = 0;
};
struct PEdge {
    int seg_from = 0, seg_to = 0;  // segment print positions
    bool has_pair = false;
    Int d = 0, dp = 0;
    bool has_depth = false;
    Int depth = 0;
};
struct PLabel {
    std::vector<PSegment> segments;
    std::vector<int> order;  // vertex id per path slot (segments and revisits)
    std::vector<PEdge> edges;
};

void parse_sub_item(Parser& P, PSegment& seg) {
    P.skip_ws();
    if (P.eat("g")) {
        seg.genus = P.integer(false);
        return;
    }
    PLoopItem li;
    PDTailItem di;
    bool have_brace = false;
    Int b1 = 0, b2 = 0;
    bool pair = false;
    if (P.eat("{")) {
        have_brace = true;
        b1 = P.integer(false);
        if (P.eat("-")) {
            pair = true;
            b2 = P.integer(false);
        }
        if (!P.eat("}")) P.fail("}");
    }
    bool have_depth = false;
    Int depth = 0;
    P.skip_ws();
    if (P.pos < P.text.size() &&
        (std::isdigit(static_cast<unsigned char>(P.text[P.pos])) || P.text[P.pos] == '-')) {
        // a '-' here must begin a signed depth, not an edge token
        size_t save = P.pos;
        if (P.text[P.pos] == '-' &&
            (P.pos + 1 >= P.text.size() ||
             !std::isdigit(static_cast<unsigned char>(P.text[P.pos + 1])))) {
            P.pos = save;
        } else {
            depth = P.integer(true);
            have_depth = true;
        }
    }
    if (P.eat("D")) {
        if (pair) P.fail("D-tail with a single residue in braces");
        di.has_l = have_brace;
        di.l = b1;
        di.has_depth = have_depth;
        di.depth = depth;
        seg.dtails.push_back(di);
        return;
    }
    if (pair || have_depth) {
        li.has_pair = pair;
        li.a = b1;
        li.b = b2;
        li.has_depth = have_depth;
        li.depth = depth;
        seg.loops.push_back(li);
        return;
    }
    if (have_brace) P.fail("loop pair or D-tail after braces");
    P.fail("subscript item");
}

PSegment parse_principal(Parser& P) {
    PSegment seg;
    seg.text_pos = P.pos;
    if (P.eat("[")) {
        seg.mult = P.integer(false);
        if (!P.eat("]")) P.fail("]");
    }
    P.skip_ws();
    // core name, longest match first
    static const std::vector<std::pair<std::string, std::pair<Int, std::vector<Int>>>> names = {
        {"III*", {4, {3, 3, 2}}}, {"III", {4, {1, 1, 2}}}, {"II*", {6, {5, 4, 3}}},
        {"IV*", {3, {2, 2, 2}}},  {"IV", {3, {1, 1, 1}}},  {"II", {6, {1, 2, 3}}},
        {"I*", {0, {}}},          {"I", {1, {}}},          {"D", {2, {1, 1}}},
        {"T", {3, {1, 2}}},
    };
    bool named = false;
    for (auto& [nm, core] : names)
        if (P.eat(nm)) {
            named = true;
            if (nm == "I*") {
                seg.star = true;
            } else {
                seg.core_m = core.first;
                seg.core_res = core.second;
            }
            break;
        }
    if (!named) {
        seg.core_m = P.integer(false);
        if (!P.eat("^")) P.fail("^ after a numeric core");
        if (!P.eat("{")) P.fail("{");
        seg.core_res.push_back(P.integer(false));
        while (P.eat(",")) seg.core_res.push_back(P.integer(false));
        if (!P.eat("}")) P.fail("}");
    } else if (P.peek("^")) {
        P.fail("superscript on a named core");
    }
    if (P.eat("_")) {
        bool braced = P.eat("{");
        if (seg.star) {
            seg.star_n = P.integer(false);
            if (seg.star_n == 0) {
                seg.core_m = 2;
                seg.core_res = {1, 1, 1, 1};
                seg.star = false;
            } else {
                seg.core_m = 2;
                seg.core_res = {1, 1};
            }
            if (braced && P.eat(",")) {
                parse_sub_item(P, seg);
                while (P.eat(",")) parse_sub_item(P, seg);
            }
        } else {
            parse_sub_item(P, seg);
            while (braced && P.eat(",")) parse_sub_item(P, seg);
        }
        if (braced && !P.eat("}")) P.fail("}");
    } else if (seg.star) {
        P.fail("subscript after I*");
    }
    return seg;
}

PLabel parse_structure(Parser& P) {
    PLabel lab;
    auto one_segment = [&]() -> int {
        P.skip_ws();
        if (P.peek("c") ) {
            size_t save = P.pos;
            P.pos++;
            if (P.pos < P.text.size() && std::isdigit(static_cast<unsigned char>(P.text[P.pos]))) {
                Int k = P.integer(false);
                if (k < 1 || k > Int(lab.segments.size())) P.fail("valid revisit index");
                return int(k) - 1;
            }
            P.pos = save;
        }
        lab.segments.push_back(parse_principal(P));
        return int(lab.segments.size()) - 1;
    };
    int cur = one_segment();
    lab.order.push_back(cur);
    while (!P.at_end()) {
        if (P.eat("&")) {
            int nxt = one_segment();
            lab.order.push_back(nxt);
            cur = nxt;
            continue;
        }
        // one or more edge tokens, then a segment
        std::vector<PEdge> group;
        while (P.peek("-")) {
            P.eat("-");
            PEdge e;
            if (P.eat("{")) {
                e.has_pair = true;
                e.d = P.integer(false);
                if (!P.eat("-")) P.fail("-");
                e.dp = P.integer(false);
                if (!P.eat("}")) P.fail("}");
            }
            if (P.eat("(")) {
                e.has_depth = true;
                e.depth = P.integer(true);
                if (!P.eat(")")) P.fail(")");
            }
            group.push_back(e);
        }
        if (group.empty()) P.fail("edge token, '&' or end of label");
        int nxt = one_segment();
        for (auto& e : group) {
            e.seg_from = cur;
            e.seg_to = nxt;
            lab.edges.push_back(e);
        }
        lab.order.push_back(nxt);
        cur = nxt;
    }
    return lab;
}

}  // namespace

Fibre parse_label(const std::string& text) {
    Parser P(text);
    PLabel lab = parse_structure(P);

    // exceptional looping type: a single bare "I_n" (or "[c]I_n")
    if (lab.segments.size() == 1 && lab.edges.empty()) {
        const PSegment& s = lab.segments[0];
        if (s.core_m == 1 && s.core_res.empty() && !s.star && s.genus == 0 &&
            s.dtails.empty() && s.loops.size() == 1 && !s.loops[0].has_pair &&
            s.loops[0].has_depth && s.loops[0].depth >= 1) {
            Int n = s.loops[0].depth;
            Fibre f;
            if (n == 1) {
                f.components.push_back({s.mult, 0, 1});
            } else {
                for (Int i = 0; i < n; i++) f.components.push_back({s.mult, 0, 0});
                for (Int i = 0; i < n; i++) {
                    int a = int(i), b = int((i + 1) % n);
                    if (n == 2 && i == 1) break;
                    f.add_intersection(a, b, n == 2 ? 2 : 1);
                }
            }
            return f;
        }
    }

    // resolve each segment
    struct RSeg {
        VertexData v;
        Pool pool{1, {}};
    };
    std::vector<RSeg> segs(lab.segments.size());
    for (size_t i = 0; i < lab.segments.size(); i++) {
        const PSegment& ps = lab.segments[i];
        RSeg& r = segs[i];
        Int m = ps.mult * ps.core_m;
        r.v.m = m;
        r.v.g = ps.genus;
        r.pool.m = m;
        for (Int x : ps.core_res) r.pool.res.insert(x * ps.mult);
        if (ps.star) {
            // zero-residue D-tail at the Kodaira depth
            if (ps.star_n < dtail_min_depth(m, m))
                throw parse_error(ps.text_pos, "feasible depth",
                                  "I* index below the minimal chain depth");
            r.v.dtails.push_back({m, ps.star_n});
        }
        for (const PLoopItem& li : ps.loops) {
            Loop l;
            if (li.has_pair) {
                l.a = li.a;
                l.b = li.b;
                if (l.a != m) {
                    if (!r.pool.has(l.a))
                        throw parse_error(ps.text_pos, "available residue",
                                          "loop residue not present in the core");
                    r.pool.remove(l.a);
                }
                if (l.b != m) {
                    if (!r.pool.has(l.b))
                        throw parse_error(ps.text_pos, "available residue",
                                          "loop residue not present in the core");
                    r.pool.remove(l.b);
                }
                if (gcd(l.a, m) != gcd(l.b, m))
                    throw parse_error(ps.text_pos, "equal weights", "loop residues of unequal weight");
            } else {
                auto p = r.pool.greedy_loop();
                if (!p) throw parse_error(ps.text_pos, "loop pair", "no available loop pair");
                l.a = p->first;
                l.b = p->second;
                if (l.a != m) r.pool.remove(l.a);
                if (l.b != m) r.pool.remove(l.b);
            }
            l.depth = li.has_depth ? li.depth : *min_depth(m, l.a, m, l.b);
            if (l.depth < *min_depth(m, l.a, m, l.b))
                throw parse_error(ps.text_pos, "feasible depth", "loop depth below minimum");
            r.v.loops.push_back(l);
        }
        for (const PDTailItem& di : ps.dtails) {
            DTail d;
            if (di.has_l) {
                d.l = di.l;
                if (d.l != m) {
                    if (!r.pool.has(d.l))
                        throw parse_error(ps.text_pos, "available residue",
                                          "D-tail residue not present in the core");
                    r.pool.remove(d.l);
                }
            } else {
                auto l = r.pool.greedy_dtail();
                if (!l)
                    throw parse_error(ps.text_pos, "even-weight residue",
                                      "no residue of even weight for a D-tail");
                d.l = *l;
                if (d.l != m) r.pool.remove(d.l);
            }
            if (gcd(d.l, m) % 2 != 0)
                throw parse_error(ps.text_pos, "even weight", "D-tail residue of odd weight");
            d.depth = di.has_depth ? di.depth : dtail_min_depth(m, d.l);
            if (d.depth < dtail_min_depth(m, d.l))
                throw parse_error(ps.text_pos, "feasible depth", "D-tail depth below minimum");
            r.v.dtails.push_back(d);
        }
    }

    // resolve edges in label order
    TypedGraph g;
    g.verts.resize(lab.segments.size());
    for (const PEdge& pe : lab.edges) {
        RSeg& a = segs[size_t(pe.seg_from)];
        RSeg& b = segs[size_t(pe.seg_to)];
        TypedChain c;
        c.u = pe.seg_from;
        c.v = pe.seg_to;
        if (pe.has_pair) {
            c.du = pe.d;
            c.dv = pe.dp;
            if (c.du != a.v.m) {
                if (!a.pool.has(c.du))
                    throw parse_error(0, "available residue", "edge residue not present");
                a.pool.remove(c.du);
            }
            if (c.dv != b.v.m) {
                if (!b.pool.has(c.dv))
                    throw parse_error(0, "available residue", "edge residue not present");
                b.pool.remove(c.dv);
            }
            if (gcd(c.du, a.v.m) != gcd(c.dv, b.v.m))
                throw parse_error(0, "equal weights", "edge weight mismatch");
        } else {
            auto p = greedy_edge(a.pool, b.pool);
            if (!p) throw parse_error(0, "matching residues", "no available edge pair");
            c.du = p->first;
            c.dv = p->second;
            if (c.du != a.v.m) a.pool.remove(c.du);
            if (c.dv != b.v.m) b.pool.remove(c.dv);
        }
        auto md = min_depth(a.v.m, c.du, b.v.m, c.dv);
        c.depth = pe.has_depth ? pe.depth : *md;
        if (c.depth < *md) throw parse_error(0, "feasible depth", "edge depth below minimum");
        a.v.LM.push_back(c.du);
        b.v.LM.push_back(c.dv);
        g.chains.push_back(c);
    }

    // leftovers are outer chains
    for (size_t i = 0; i < segs.size(); i++) {
        for (Int x : segs[i].pool.res) segs[i].v.O.push_back(x);
        segs[i].v.sort_canonical();
        TypedVertex tv;
        tv.type = segs[i].v.type();
        for (auto& l : segs[i].v.loops) tv.loop_depths.push_back(l.depth);
        for (auto& d : segs[i].v.dtails) tv.dtail_depths.push_back(d.depth);
        g.verts[i] = tv;
    }
    return fibre_of(g);
}

}  // namespace redtypes
