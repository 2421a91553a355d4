#include "redtypes/classify.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <cassert>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "redtypes/label.hpp"

namespace redtypes {

Int core_chi(const Core& c) {
    Int s = 0;
    for (Int o : c.residues) s += gcd(o, c.m);
    return c.m * (2 - Int(c.residues.size())) + s;
}

std::pair<Int, Core> core_of(const PrincipalInvariants& p) {
    std::vector<Int> nz;
    for (Int o : p.O) nz.push_back(o);
    for (Int l : p.L)
        if (l != p.m) nz.push_back(l);
    Int c = p.m;
    for (Int x : nz) c = gcd(c, x);
    Core core;
    core.m = p.m / c;
    for (Int x : nz) core.residues.push_back(x / c);
    sort_residues(core.residues, core.m);
    return {c, core};
}

std::vector<Core> enumerate_cores(Int chi) {
    if (chi == 2) throw std::invalid_argument("enumerate_cores: chi = 2 is an infinite family");
    std::vector<Core> out;
    if (chi > 0 || chi % 2 != 0) return out;
    for (Int k = 3; k <= 4 - chi; k++) {
        Int alpha = (k % 2 == 0) ? 8 : 6;
        Int mmax = (alpha - 2 * chi) / (k - 2);
        for (Int m = 2; m <= mmax; m++) {
            Int G = chi + m * (k - 2);  // required sum of gcds
            if (G < k || G > k * (m / 2)) continue;
            std::vector<Int> o(static_cast<size_t>(k));
            std::function<void(Int, Int, Int, Int)> rec = [&](Int t, Int lo, Int sum, Int gsum) {
                if (t == k) {
                    if (sum % m == 0 && gsum == G) {
                        Int g = m;
                        for (Int x : o) g = gcd(g, x);
                        if (g == 1) {
                            Core c{m, o};
                            sort_residues(c.residues, m);
                            out.push_back(c);
                        }
                    }
                    return;
                }
                Int left = k - t;
                for (Int x = lo; x < m; x++) {
                    Int gx = gcd(x, m);
                    if (gsum + gx + (left - 1) > G) continue;
                    if (gsum + gx + (left - 1) * (m / 2) < G) continue;
                    o[size_t(t)] = x;
                    rec(t + 1, x, sum + x, gsum + gx);
                }
            };
            rec(0, 1, 0, 0);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

// splits of a sorted multiset into (subset S, complement), by value counts
void value_counts(const std::vector<Int>& v, std::vector<std::pair<Int, Int>>& vc) {
    for (Int x : v) {
        if (!vc.empty() && vc.back().first == x)
            vc.back().second++;
        else
            vc.push_back({x, 1});
    }
}

}  // namespace

std::vector<PrincipalInvariants> enumerate_principal_invariants(Int chi) {
    assert(chi < 0);
    std::vector<Core> cores;
    cores.push_back({1, {}});  // I
    for (Int m = 2; m <= 2 - chi; m++)
        for (Int a = 1; 2 * a <= m; a++)
            if (gcd(a, m) == 1) {
                Core c{m, {a, m - a}};
                sort_residues(c.residues, m);
                cores.push_back(c);
            }
    for (Int c0 = 0; c0 >= chi; c0 -= 2) {
        auto cs = enumerate_cores(c0);
        cores.insert(cores.end(), cs.begin(), cs.end());
    }

    std::set<PrincipalInvariants> out;
    for (const Core& core : cores) {
        Int cchi = core_chi(core);
        for (Int d = 1; d <= -chi; d++) {
            if (chi % d != 0) continue;
            Int bracket = chi / d;
            // bracket = chi(core) - outsum(complement) - (2g+z) m0
            std::vector<std::pair<Int, Int>> vc;
            value_counts(core.residues, vc);
            // choose how many of each residue value go to O
            std::vector<Int> take(vc.size(), 0);
            std::function<void(size_t)> rec = [&](size_t i) {
                if (i == vc.size()) {
                    Int outsum = 0;  // gcd-sum of elements NOT in O
                    std::vector<Int> O, L;
                    for (size_t j = 0; j < vc.size(); j++) {
                        for (Int t = 0; t < take[j]; t++) O.push_back(vc[j].first * d);
                        for (Int t = take[j]; t < vc[j].second; t++) {
                            L.push_back(vc[j].first * d);
                            outsum += gcd(vc[j].first, core.m);
                        }
                    }
                    Int R = cchi - outsum - bracket;
                    if (R < 0 || R % core.m != 0) return;
                    Int total = R / core.m;  // = 2g + z
                    for (Int g = 0; 2 * g <= total; g++) {
                        Int z = total - 2 * g;
                        PrincipalInvariants p;
                        p.m = d * core.m;
                        p.g = g;
                        p.O = O;
                        p.L = L;
                        for (Int t = 0; t < z; t++) p.L.push_back(p.m);
                        if (p.O.size() + p.L.size() < 3 && p.g == 0) continue;
                        sort_residues(p.O, p.m);
                        sort_residues(p.L, p.m);
                        assert(redtypes::chi(p) == chi);
                        out.insert(p);
                    }
                }
                else {
                    for (Int t = 0; t <= vc[i].second; t++) {
                        take[i] = t;
                        rec(i + 1);
                    }
                }
            };
            rec(0);
        }
    }
    return {out.begin(), out.end()};
}

PrincipalInvariants PrincipalType::invariants() const {
    PrincipalInvariants p;
    p.m = m;
    p.g = g;
    p.O = O;
    for (auto& [a, b] : LL) {
        p.L.push_back(a);
        p.L.push_back(b);
    }
    p.L.insert(p.L.end(), LD.begin(), LD.end());
    p.L.insert(p.L.end(), LM.begin(), LM.end());
    sort_residues(p.O, m);
    sort_residues(p.L, m);
    return p;
}

Int PrincipalType::chi() const { return redtypes::chi(invariants()); }

std::vector<Int> PrincipalType::weights() const {
    std::vector<Int> w;
    for (Int l : LM) w.push_back(gcd(l, m));
    std::sort(w.begin(), w.end());
    return w;
}

namespace {

// all splits of a sorted residue multiset into loops (pairs with equal gcd),
// D-tails (even gcd) and edges, without multiset duplicates
void split_L(Int m, std::vector<Int> rest, PrincipalType cur,
             std::vector<PrincipalType>& out) {
    if (rest.empty()) {
        std::sort(cur.LL.begin(), cur.LL.end(), [m](auto& a, auto& b) {
            auto key = [m](const std::pair<Int, Int>& p) {
                return std::tuple(gcd(p.first, m), p.first, gcd(p.second, m), p.second);
            };
            return key(a) < key(b);
        });
        sort_residues(cur.LD, m);
        sort_residues(cur.LM, m);
        out.push_back(cur);
        return;
    }
    Int e = rest.front();
    rest.erase(rest.begin());
    if (gcd(e, m) % 2 == 0) {
        PrincipalType t = cur;
        t.LD.push_back(e);
        split_L(m, rest, t, out);
    }
    {
        PrincipalType t = cur;
        t.LM.push_back(e);
        split_L(m, rest, t, out);
    }
    // pair e with each distinct later element of equal gcd
    std::set<Int> tried;
    for (size_t i = 0; i < rest.size(); i++) {
        Int f = rest[i];
        if (gcd(f, m) != gcd(e, m) || tried.count(f)) continue;
        tried.insert(f);
        PrincipalType t = cur;
        Int a = e, b = f;
        if (residue_less(b, a, m)) std::swap(a, b);
        t.LL.push_back({a, b});
        std::vector<Int> r2 = rest;
        r2.erase(r2.begin() + long(i));
        split_L(m, r2, t, out);
    }
}

}  // namespace

std::vector<PrincipalType> enumerate_principal_types(Int chi) {
    std::vector<PrincipalType> out;
    for (const auto& p : enumerate_principal_invariants(chi)) {
        PrincipalType base;
        base.m = p.m;
        base.g = p.g;
        base.O = p.O;
        std::vector<Int> L = p.L;
        sort_residues(L, p.m);
        split_L(p.m, L, base, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Int count_types_by_weight_vector(Int chi, const std::vector<Int>& w) {
    Int total = 0;
    for (const auto& t : enumerate_principal_types(chi)) {
        if (t.LM.size() != w.size()) continue;
        // positions of w with weight g must receive the residues of gcd g;
        // distinct orderings of each gcd class count once per arrangement
        std::map<Int, std::vector<Int>> byg;
        for (Int l : t.LM) byg[gcd(l, t.m)].push_back(l);
        std::map<Int, Int> need;
        for (Int x : w) need[x]++;
        bool ok = byg.size() == need.size();
        for (auto& [g, ls] : byg)
            if (!need.count(g) || need[g] != Int(ls.size())) ok = false;
        if (!ok) continue;
        Int ways = 1;
        for (auto& [g, ls] : byg) {
            // distinct permutations of the multiset ls
            Int f = 1;
            for (Int i = 2; i <= Int(ls.size()); i++) f *= i;
            std::map<Int, Int> cnt;
            for (Int x : ls) cnt[x]++;
            for (auto& [x, c] : cnt)
                for (Int i = 2; i <= c; i++) f /= i;
            ways *= f;
        }
        total += ways;
    }
    return total;
}

namespace {

bool units_match(Int m, const std::vector<Int>& O, const std::vector<Int>& L,
                 const std::vector<Int>& Opat, const std::vector<Int>& Lpat) {
    // does some unit u mod m turn (u*Opat, u*Lpat) into (O, L)?
    for (Int u = 1; u <= m; u++) {
        if (gcd(u, m) != 1) continue;
        std::multiset<Int> o2, l2;
        for (Int x : Opat) o2.insert(residue(u * x, m));
        for (Int x : Lpat) l2.insert(residue(u * x, m));
        if (o2 == std::multiset<Int>(O.begin(), O.end()) &&
            l2 == std::multiset<Int>(L.begin(), L.end()))
            return true;
    }
    return false;
}

bool table_m_base(Int m, const std::vector<Int>& O, const std::vector<Int>& L) {
    // fixed small rows
    struct Row {
        Int m;
        std::vector<Int> O, L;
    };
    static const std::vector<Row> fixed = {
        {3, {1, 1}, {1}},   {3, {1, 2}, {3}},     {6, {1, 1, 4}, {}},  {6, {2, 4, 3, 3}, {}},
        {12, {1, 3, 8}, {}},{5, {1, 1, 3}, {}},   {15, {1, 9, 5}, {}}, {12, {3, 8}, {1}},
        {9, {1, 2, 6}, {}}, {15, {9, 5}, {1}},    {21, {1, 6, 14}, {}}};
    for (const Row& r : fixed)
        if (r.m == m && units_match(m, O, L, r.O, r.L)) return true;

    // parametric rows in k
    if (m >= 4 && m % 2 == 0) {
        Int h = m / 2;  // 2k+1 or 2k
        if (h % 2 == 1 && h >= 3) {
            Int k = (h - 1) / 2;
            // (4k+2; O = {2k+1-u, 2k+1}, L = {u}), k >= 1
            if (k >= 1 && units_match(m, O, L, {h - 1, h}, {1})) return true;
            // (4k+2; O = {u, 2k+1-u, 2k+1}), k >= 2
            if (k >= 2 && units_match(m, O, L, {1, h - 1, h}, {})) return true;
            // (4k+2; O = {u, 2k+1}, L = {2k+1-u}), k >= 1
            if (k >= 1 && units_match(m, O, L, {1, h}, {h - 1})) return true;
        }
        if (h % 2 == 0 && h >= 2) {
            Int k = h / 2;
            // (4k; O = {u, 2k-u, 2k}), k >= 2
            if (k >= 2 && units_match(m, O, L, {1, h - 1, h}, {})) return true;
            // (4k; O = {2k-u, 2k}, L = {u}), k >= 1
            if (k >= 1 && units_match(m, O, L, {h - 1, h}, {1})) return true;
        }
    }
    return false;
}

}  // namespace

bool table_m_member(const PrincipalInvariants& p) {
    if (p.g != 0) return false;
    Int g0 = p.m;
    for (Int x : p.O) g0 = gcd(g0, x);
    for (Int x : p.L) g0 = gcd(g0, x);
    for (Int n = 1; n <= g0; n++) {
        if (g0 % n != 0 || p.m % n != 0) continue;
        std::vector<Int> O, L;
        for (Int x : p.O) O.push_back(x / n);
        for (Int x : p.L) L.push_back(x / n);
        if (table_m_base(p.m / n, O, L)) return true;
    }
    return false;
}

bool large_ratio_form(Int m, Int chi) {
    assert(chi < 0);
    Int B = -chi;
    Int num = m - 2 * B;  // q - 2 = num / B
    if (num <= 0) return false;
    return (4 * B) % num == 0 || (3 * B) % num == 0;
}

std::vector<PrincipalInvariants> large_multiplicity_check(Int chi) {
    std::vector<PrincipalInvariants> out;
    for (const auto& p : enumerate_principal_invariants(chi))
        if (p.m > -2 * chi) out.push_back(p);
    return out;
}

// ---------------------------------------------------------------------------
// shapes

namespace {

// canonical key of a plain graph (adjacency matrix minimised over vertex
// permutations, ordered by degree classes first); fine for <= 10 vertices
std::string plain_graph_key(int n, const std::set<std::pair<int, int>>& edges) {
    std::vector<std::vector<char>> adj(size_t(n), std::vector<char>(size_t(n), 0));
    std::vector<int> deg(size_t(n), 0);
    for (auto& [a, b] : edges) {
        adj[size_t(a)][size_t(b)] = adj[size_t(b)][size_t(a)] = 1;
        deg[size_t(a)]++;
        deg[size_t(b)]++;
    }
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) { return deg[size_t(a)] > deg[size_t(b)]; });
    std::string best;
    std::vector<int> cur;
    std::vector<char> used(size_t(n), 0);
    std::string acc;
    // backtracking over degree-respecting permutations with prefix pruning
    std::function<void()> rec = [&]() {
        size_t t = cur.size();
        if (t == size_t(n)) {
            if (best.empty() || acc < best) best = acc;
            return;
        }
        for (int v = 0; v < n; v++) {
            if (used[size_t(v)]) continue;
            std::string row;
            for (size_t j = 0; j < t; j++) row += char('0' + adj[size_t(v)][size_t(cur[j])]);
            row += char('0' + deg[size_t(v)]);
            std::string nacc = acc + row + ';';
            if (!best.empty() && nacc > best.substr(0, nacc.size())) continue;
            used[size_t(v)] = 1;
            cur.push_back(v);
            std::swap(acc, nacc);
            rec();
            std::swap(acc, nacc);
            cur.pop_back();
            used[size_t(v)] = 0;
        }
    };
    rec();
    return best;
}

bool plain_connected(int n, const std::set<std::pair<int, int>>& edges) {
    if (n == 1) return true;
    std::vector<int> root(static_cast<size_t>(n));
    std::iota(root.begin(), root.end(), 0);
    std::function<int(int)> find = [&](int x) { return root[size_t(x)] == x ? x : root[size_t(x)] = find(root[size_t(x)]); };
    for (auto& [a, b] : edges) root[size_t(find(a))] = find(b);
    for (int i = 1; i < n; i++)
        if (find(i) != find(0)) return false;
    return true;
}

// all connected graphs on n labelled-then-canonicalised vertices with at
// most emax edges and maximum degree max_deg, one per isomorphism class
std::vector<std::set<std::pair<int, int>>> connected_graphs(int n, Int emax, Int max_deg) {
    std::set<std::string> seen;
    std::vector<std::set<std::pair<int, int>>> frontier = {{}}, result;
    seen.insert(plain_graph_key(n, {}));
    if (n == 1) return frontier;
    std::vector<std::pair<int, int>> all;
    for (int a = 0; a < n; a++)
        for (int b = a + 1; b < n; b++) all.push_back({a, b});
    for (Int e = 1; e <= emax && !frontier.empty(); e++) {
        std::set<std::string> level_seen;
        std::vector<std::set<std::pair<int, int>>> next;
        for (auto& g : frontier) {
            std::vector<Int> deg(static_cast<size_t>(n), 0);
            for (auto& [a, b] : g) {
                deg[size_t(a)]++;
                deg[size_t(b)]++;
            }
            for (auto& ed : all) {
                if (g.count(ed)) continue;
                if (deg[size_t(ed.first)] >= max_deg || deg[size_t(ed.second)] >= max_deg)
                    continue;
                auto g2 = g;
                g2.insert(ed);
                std::string key = plain_graph_key(n, g2);
                if (level_seen.insert(key).second) {
                    next.push_back(g2);
                    if (plain_connected(n, g2)) result.push_back(g2);
                }
            }
        }
        frontier = next;
    }
    return result;
}

// fast canonical key of a decorated graph (vertex colours, edge marks),
// used only to avoid recomputing minimal paths for repeated candidates
std::string decorated_key(const std::vector<Int>& chis,
                          const std::vector<std::pair<int, int>>& edges,
                          const std::vector<std::vector<Int>>& emarks) {
    int n = int(chis.size());
    // edge mark ids
    std::map<std::vector<Int>, int> mark_id;
    std::vector<std::vector<int>> adj(static_cast<size_t>(n),
                                      std::vector<int>(static_cast<size_t>(n), 0));
    for (size_t e = 0; e < edges.size(); e++) {
        auto it = mark_id.try_emplace(emarks[e], int(mark_id.size()) + 1).first;
        adj[size_t(edges[e].first)][size_t(edges[e].second)] = it->second;
        adj[size_t(edges[e].second)][size_t(edges[e].first)] = it->second;
    }
    std::string best;
    std::vector<int> cur;
    std::vector<char> used(static_cast<size_t>(n), 0);
    std::string acc;
    std::function<void()> rec = [&]() {
        size_t t = cur.size();
        if (t == size_t(n)) {
            if (best.empty() || acc < best) best = acc;
            return;
        }
        for (int v = 0; v < n; v++) {
            if (used[size_t(v)]) continue;
            std::string row = std::to_string(chis[size_t(v)]) + "/";
            for (size_t j = 0; j < t; j++) row += char('a' + adj[size_t(v)][size_t(cur[j])]);
            std::string nacc = acc + row + ';';
            if (!best.empty() && nacc > best.substr(0, nacc.size())) continue;
            used[size_t(v)] = 1;
            cur.push_back(v);
            std::swap(acc, nacc);
            rec();
            std::swap(acc, nacc);
            cur.pop_back();
            used[size_t(v)] = 0;
        }
    };
    rec();
    // append the mark dictionary in id order
    std::vector<std::vector<Int>> dict(mark_id.size());
    for (auto& [w, id2] : mark_id) dict[size_t(id2 - 1)] = w;
    for (auto& w : dict) {
        best += '#';
        for (Int x : w) best += std::to_string(x) + ",";
    }
    return best;
}

MarkedGraph shape_marked_graph(const Shape& s) {
    MarkedGraph g;
    for (Int chi : s.chis) g.vmarks.push_back(scores_shape_vertex(chi));
    for (auto& [uv, w] : s.edges) g.edges.push_back({uv.first, uv.second, scores_shape_edge(w)});
    return g;
}

// compositions of total into n parts, each >= 1
void compositions(Int total, int n, std::vector<Int>& cur, std::vector<std::vector<Int>>& out) {
    if (n == 1) {
        if (total >= 1) {
            cur.push_back(total);
            out.push_back(cur);
            cur.pop_back();
        }
        return;
    }
    for (Int x = 1; x + (n - 1) <= total; x++) {
        cur.push_back(x);
        compositions(total - x, n - 1, cur, out);
        cur.pop_back();
    }
}

struct TypeShapeInfo {
    std::set<std::vector<Int>> weight_multisets;  // per chi
    std::set<std::vector<Int>> sub_multisets;     // prefixes for pruning
    std::set<Int> weight_values;
    size_t max_edges = 0;

    void fill_subs() {
        for (const auto& w : weight_multisets) {
            size_t k = w.size();
            for (size_t mask = 0; mask < (size_t(1) << k); mask++) {
                std::vector<Int> sub;
                for (size_t i = 0; i < k; i++)
                    if (mask >> i & 1) sub.push_back(w[i]);
                sub_multisets.insert(sub);
            }
        }
    }
};

}  // namespace

std::vector<Shape> enumerate_shapes(Int genus, bool extended, int jobs) {
    assert(genus >= 2);
    int nmax = int(2 * genus - 2);
    if (nmax > 8 && !extended)
        throw std::invalid_argument("enumerate_shapes: graphs on > 8 vertices need extended mode");
    if (jobs < 1) jobs = 1;

    std::map<Int, TypeShapeInfo> info;
    for (Int chi = -1; chi >= 2 - 2 * genus; chi--) {
        TypeShapeInfo ti;
        for (const auto& t : enumerate_principal_types(chi)) {
            auto w = t.weights();
            if (chi == 2 - 2 * genus && !w.empty()) continue;
            ti.weight_multisets.insert(w);
            for (Int x : w) ti.weight_values.insert(x);
            ti.max_edges = std::max(ti.max_edges, w.size());
        }
        ti.fill_subs();
        info[chi] = ti;
    }

    // independent subproblems: one per (graph, chi-assignment)
    struct Job {
        int n;
        std::set<std::pair<int, int>> graph;
        std::vector<Int> chis;
    };
    std::vector<Job> jobs_list;
    for (int n = 1; n <= nmax; n++) {
        Int emax = n + genus - 1;
        // a vertex hosting chi carries at most max_edges(chi) chains; with n
        // vertices the most negative chi any vertex can take is -(2g-2-n+1)
        Int cap = 0;
        for (Int chi = -1; chi >= -(2 * genus - 2 - Int(n) + 1); chi--) {
            auto it = info.find(chi);
            if (it != info.end()) cap = std::max(cap, Int(it->second.max_edges));
        }
        if (cap == 0 && n > 1) continue;
        auto graphs = connected_graphs(n, emax, cap);
        std::vector<std::vector<Int>> parts;
        std::vector<Int> tmp;
        compositions(2 * genus - 2, n, tmp, parts);
        for (auto& g : graphs)
            for (auto& part : parts) {
                std::vector<Int> chis(part.size());
                for (size_t i = 0; i < part.size(); i++) chis[i] = -part[i];
                jobs_list.push_back({n, g, chis});
            }
    }

    std::mutex mtx;
    std::set<std::string> seen, seen_fast;
    std::vector<Shape> out;
    std::atomic<size_t> next(0);

    auto worker = [&]() {
        while (true) {
            size_t ji = next.fetch_add(1);
            if (ji >= jobs_list.size()) break;
            const Job& job = jobs_list[ji];
            int n = job.n;
            const auto& chis = job.chis;
            std::vector<std::pair<int, int>> edges(job.graph.begin(), job.graph.end());
            std::vector<std::vector<int>> inc(static_cast<size_t>(n));
            for (size_t i = 0; i < edges.size(); i++) {
                inc[size_t(edges[i].first)].push_back(int(i));
                inc[size_t(edges[i].second)].push_back(int(i));
            }
            bool ok = true;
            for (size_t i = 0; i < chis.size(); i++) {
                auto it = info.find(chis[i]);
                if (it == info.end() || inc[i].size() > it->second.max_edges ||
                    (n > 1 && inc[i].empty()))
                    ok = false;
            }
            if (!ok) continue;
            std::vector<std::vector<Int>> allowed(edges.size());
            for (size_t e = 0; e < edges.size(); e++) {
                auto& wu = info[chis[size_t(edges[e].first)]].weight_values;
                auto& wv = info[chis[size_t(edges[e].second)]].weight_values;
                std::set_intersection(wu.begin(), wu.end(), wv.begin(), wv.end(),
                                      std::back_inserter(allowed[e]));
                if (allowed[e].empty()) ok = false;
            }
            if (!ok) continue;

            std::vector<std::vector<Int>> emarks(edges.size());
            std::vector<std::vector<Int>> acc(static_cast<size_t>(n));
            auto acc_add = [&](int v, Int w) {
                auto& a = acc[size_t(v)];
                a.insert(std::lower_bound(a.begin(), a.end(), w), w);
            };
            auto acc_del = [&](int v, Int w) {
                auto& a = acc[size_t(v)];
                a.erase(std::lower_bound(a.begin(), a.end(), w));
            };
            auto acc_ok = [&](int v) {
                return info[chis[size_t(v)]].sub_multisets.count(acc[size_t(v)]) > 0;
            };
            std::function<void(size_t)> rec = [&](size_t e) {
                if (e == edges.size()) {
                    for (int v = 0; v < n; v++)
                        if (!info[chis[size_t(v)]].weight_multisets.count(acc[size_t(v)]))
                            return;
                    std::string fast = decorated_key(chis, edges, emarks);
                    {
                        std::lock_guard<std::mutex> lock(mtx);
                        if (!seen_fast.insert(fast).second) return;
                    }
                    Shape s;
                    s.chis = chis;
                    for (size_t i = 0; i < edges.size(); i++)
                        s.edges[{edges[i].first, edges[i].second}] = emarks[i];
                    s.canonical = path_to_string(minimal_path(shape_marked_graph(s), true).tokens);
                    std::lock_guard<std::mutex> lock(mtx);
                    if (seen.insert(s.canonical).second) out.push_back(s);
                    return;
                }
                int eu = edges[e].first, ev = edges[e].second;
                std::function<void(size_t)> grow = [&](size_t lo) {
                    if (!emarks[e].empty()) rec(e + 1);
                    for (size_t i = lo; i < allowed[e].size(); i++) {
                        Int w = allowed[e][i];
                        emarks[e].push_back(w);
                        acc_add(eu, w);
                        acc_add(ev, w);
                        if (acc_ok(eu) && acc_ok(ev)) grow(i);
                        acc_del(eu, w);
                        acc_del(ev, w);
                        emarks[e].pop_back();
                    }
                };
                grow(0);
            };
            rec(0);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; t++) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// families

namespace {

// distribute a residue multiset into labelled boxes with given sizes,
// enumerating distinct multiset splits (recursion over distinct values)
void distribute_rec(const std::vector<std::pair<Int, Int>>& vals, size_t vi,
                    const std::vector<size_t>& need, std::vector<std::vector<Int>>& cur,
                    std::vector<std::vector<std::vector<Int>>>& out) {
    if (vi == vals.size()) {
        for (size_t b = 0; b < need.size(); b++)
            if (cur[b].size() != need[b]) return;
        out.push_back(cur);
        return;
    }
    auto [x, count] = vals[vi];
    // split `count` copies of x among the boxes, respecting capacities
    std::function<void(size_t, Int)> put = [&](size_t b, Int left) {
        if (b == need.size()) {
            if (left == 0) distribute_rec(vals, vi + 1, need, cur, out);
            return;
        }
        Int cap = Int(need[b]) - Int(cur[b].size());
        for (Int t = 0; t <= std::min(cap, left); t++) {
            for (Int i = 0; i < t; i++) cur[b].push_back(x);
            put(b + 1, left - t);
            for (Int i = 0; i < t; i++) cur[b].pop_back();
        }
    };
    put(0, count);
}

void distribute(const std::vector<Int>& items, const std::vector<size_t>& need,
                std::vector<std::vector<Int>>& cur, size_t /*item_i*/,
                std::vector<std::vector<std::vector<Int>>>& out) {
    std::vector<Int> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<Int, Int>> vals;
    value_counts(sorted, vals);
    distribute_rec(vals, 0, need, cur, out);
}

// distinct perfect matchings between two residue multisets of equal size
void matchings(std::vector<Int> a, std::vector<Int> b,
               std::vector<std::vector<std::pair<Int, Int>>>& out,
               std::vector<std::pair<Int, Int>>& cur) {
    if (a.empty()) {
        out.push_back(cur);
        return;
    }
    Int x = a.front();
    a.erase(a.begin());
    std::set<Int> tried;
    for (size_t i = 0; i < b.size(); i++) {
        if (tried.count(b[i])) continue;
        tried.insert(b[i]);
        Int y = b[i];
        std::vector<Int> b2 = b;
        b2.erase(b2.begin() + long(i));
        cur.push_back({x, y});
        matchings(a, b2, out, cur);
        cur.pop_back();
    }
}

std::vector<Family> families_of_shape(const Shape& s,
                                      const std::map<Int, std::vector<PrincipalType>>& types) {
    int n = int(s.chis.size());
    std::vector<std::pair<std::pair<int, int>, std::vector<Int>>> edges(s.edges.begin(),
                                                                        s.edges.end());
    // vertex candidates: types whose weight multiset matches the shape
    std::vector<std::vector<const PrincipalType*>> cand(static_cast<size_t>(n));
    for (int v = 0; v < n; v++) {
        std::vector<Int> wv;
        for (auto& [uv, w] : edges)
            if (uv.first == v || uv.second == v) wv.insert(wv.end(), w.begin(), w.end());
        std::sort(wv.begin(), wv.end());
        for (const auto& t : types.at(s.chis[size_t(v)]))
            if (t.weights() == wv) cand[size_t(v)].push_back(&t);
    }

    std::map<std::string, Family> found;
    std::vector<const PrincipalType*> pick(static_cast<size_t>(n));
    std::function<void(int)> assign = [&](int v) {
        if (v < n) {
            for (auto* t : cand[size_t(v)]) {
                pick[size_t(v)] = t;
                assign(v + 1);
            }
            return;
        }
        // distribute each vertex's LM residues to its edge slots, by weight
        // slots at v: one box per (edge, this vertex); box sizes = bundle size
        // handled per weight class
        struct Alloc {
            // per edge, residues allocated at each endpoint
            std::vector<std::vector<Int>> at_u, at_v;
        };
        Alloc alloc;
        alloc.at_u.resize(edges.size());
        alloc.at_v.resize(edges.size());
        std::function<void(int)> dist_vertex = [&](int vv) {
            if (vv == n) {
                // all allocations fixed; now match residues across each edge,
                // within equal-weight groups
                std::vector<std::vector<std::vector<std::pair<Int, Int>>>> choice(edges.size());
                for (size_t e = 0; e < edges.size(); e++) {
                    // group by weight
                    std::map<Int, std::pair<std::vector<Int>, std::vector<Int>>> byw;
                    Int mu = pick[size_t(edges[e].first.first)]->m;
                    Int mv = pick[size_t(edges[e].first.second)]->m;
                    for (Int x : alloc.at_u[e]) byw[gcd(x, mu)].first.push_back(x);
                    for (Int y : alloc.at_v[e]) byw[gcd(y, mv)].second.push_back(y);
                    std::vector<std::vector<std::pair<Int, Int>>> ms = {{}};
                    for (auto& [w, ab] : byw) {
                        std::vector<std::vector<std::pair<Int, Int>>> part, nxt;
                        std::vector<std::pair<Int, Int>> cur;
                        matchings(ab.first, ab.second, part, cur);
                        for (auto& base : ms)
                            for (auto& ext : part) {
                                auto comb = base;
                                comb.insert(comb.end(), ext.begin(), ext.end());
                                nxt.push_back(comb);
                            }
                        ms = nxt;
                    }
                    choice[e] = ms;
                }
                // cartesian product over edges
                std::vector<size_t> idx(edges.size(), 0);
                while (true) {
                    TypedGraph tg;
                    for (int v2 = 0; v2 < n; v2++) {
                        TypedVertex tv;
                        tv.type = *pick[size_t(v2)];
                        for (auto& [a, b] : tv.type.LL) {
                            auto md = min_depth(tv.type.m, a, tv.type.m, b);
                            tv.loop_depths.push_back(*md);
                        }
                        for (Int l : tv.type.LD) {
                            Int w2 = gcd(l, tv.type.m);
                            auto md = min_depth(tv.type.m, l, w2, w2);
                            tv.dtail_depths.push_back(*md);
                        }
                        tg.verts.push_back(tv);
                    }
                    for (size_t e = 0; e < edges.size(); e++)
                        for (auto& [x, y] : choice[e][idx[e]]) {
                            Int mu = pick[size_t(edges[e].first.first)]->m;
                            Int mv = pick[size_t(edges[e].first.second)]->m;
                            auto md = min_depth(mu, x, mv, y);
                            tg.chains.push_back(
                                {edges[e].first.first, edges[e].first.second, x, y, *md});
                        }
                    Family fam;
                    fam.label = canonical_label(tg);
                    if (!found.count(fam.label)) {
                        auto [data, recs] = decompose(fibre_of(tg));
                        fam.data = data;
                        found[fam.label] = fam;
                    }
                    // advance
                    size_t e = 0;
                    while (e < edges.size()) {
                        if (++idx[e] < choice[e].size()) break;
                        idx[e] = 0;
                        e++;
                    }
                    if (e == edges.size()) break;
                }
                return;
            }
            // boxes: incident edges (endpoint side), grouped per weight class
            const PrincipalType& t = *pick[size_t(vv)];
            std::map<Int, std::vector<Int>> res_byw;
            for (Int l : t.LM) res_byw[gcd(l, t.m)].push_back(l);
            // incident edge slots per weight
            std::vector<std::pair<size_t, bool>> slots;  // (edge, is_u)
            for (size_t e = 0; e < edges.size(); e++) {
                if (edges[e].first.first == vv) slots.push_back({e, true});
                if (edges[e].first.second == vv) slots.push_back({e, false});
            }
            // per weight class: distribute residues into the slots' demand
            std::function<void(std::map<Int, std::vector<Int>>::iterator)> per_class =
                [&](std::map<Int, std::vector<Int>>::iterator it) {
                    if (it == res_byw.end()) {
                        dist_vertex(vv + 1);
                        return;
                    }
                    Int w = it->first;
                    std::vector<size_t> need;
                    std::vector<std::pair<size_t, bool>> boxes;
                    for (auto& [e, isu] : slots) {
                        size_t c = size_t(std::count(edges[e].second.begin(),
                                                     edges[e].second.end(), w));
                        if (c > 0) {
                            need.push_back(c);
                            boxes.push_back({e, isu});
                        }
                    }
                    std::vector<std::vector<Int>> cur(need.size());
                    std::vector<std::vector<std::vector<Int>>> splits;
                    distribute(it->second, need, cur, 0, splits);
                    for (auto& sp : splits) {
                        for (size_t b = 0; b < boxes.size(); b++) {
                            auto& dst = boxes[b].second ? alloc.at_u[boxes[b].first]
                                                        : alloc.at_v[boxes[b].first];
                            dst.insert(dst.end(), sp[b].begin(), sp[b].end());
                        }
                        per_class(std::next(it));
                        for (size_t b = 0; b < boxes.size(); b++) {
                            auto& dst = boxes[b].second ? alloc.at_u[boxes[b].first]
                                                        : alloc.at_v[boxes[b].first];
                            dst.resize(dst.size() - sp[b].size());
                        }
                    }
                };
            per_class(res_byw.begin());
        };
        dist_vertex(0);
    };
    if (std::all_of(cand.begin(), cand.end(),
                    [](const auto& c) { return !c.empty(); }))
        assign(0);

    std::vector<Family> out;
    for (auto& [_, f] : found) out.push_back(f);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<std::pair<Shape, std::vector<Family>>> enumerate_families_by_shape(Int genus,
                                                                               int jobs,
                                                                               bool extended) {
    auto shapes = enumerate_shapes(genus, extended, jobs);
    std::map<Int, std::vector<PrincipalType>> types;
    for (Int chi = -1; chi >= 2 - 2 * genus; chi--) {
        auto ts = enumerate_principal_types(chi);
        if (chi == 2 - 2 * genus)
            ts.erase(std::remove_if(ts.begin(), ts.end(),
                                    [](const PrincipalType& t) { return !t.LM.empty(); }),
                     ts.end());
        types[chi] = ts;
    }
    std::vector<std::pair<Shape, std::vector<Family>>> out(shapes.size());
    std::atomic<size_t> next(0);
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= shapes.size()) break;
            out[i] = {shapes[i], families_of_shape(shapes[i], types)};
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; t++) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

std::vector<Family> enumerate_families(Int genus, int jobs, bool extended) {
    std::vector<Family> out;
    for (auto& [s, fams] : enumerate_families_by_shape(genus, jobs, extended))
        out.insert(out.end(), fams.begin(), fams.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Family> enumerate_semistable_families(Int genus, int jobs) {
    std::vector<Family> out;
    for (const auto& f : enumerate_families(genus, jobs)) {
        bool ss = true;
        for (const auto& p : f.data.principals)
            if (p.m != 1) ss = false;
        if (ss) out.push_back(f);
    }
    return out;
}

}  // namespace redtypes
