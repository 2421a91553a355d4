#include "redtypes/fibre.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <numeric>
#include <set>

#include "json.hpp"

namespace redtypes {

Int Fibre::inter(int i, int j) const {
    if (i == j) return 0;
    if (i > j) std::swap(i, j);
    auto it = intersections.find({i, j});
    return it == intersections.end() ? 0 : it->second;
}

void Fibre::add_intersection(int i, int j, Int k) {
    assert(i != j && k >= 1);
    if (i > j) std::swap(i, j);
    intersections[{i, j}] += k;
}

bool residue_less(Int a, Int b, Int m) {
    Int ga = gcd(a, m), gb = gcd(b, m);
    if (ga != gb) return ga < gb;
    return a < b;
}

void sort_residues(std::vector<Int>& v, Int m) {
    std::sort(v.begin(), v.end(), [m](Int a, Int b) { return residue_less(a, b, m); });
}

std::vector<int> incidence(const Fibre& f, int c) {
    if (c < 0 || c >= f.size()) throw fibre_error("incidence: unknown component id");
    std::vector<int> out;
    for (int j = 0; j < f.size(); j++)
        for (Int t = 0; t < f.inter(c, j); t++) out.push_back(j);
    for (Int t = 0; t < 2 * f.components[c].nodes; t++) out.push_back(c);
    return out;
}

Int self_intersection(const Fibre& f, int c) {
    if (c < 0 || c >= f.size()) throw fibre_error("self_intersection: unknown component id");
    const Component& comp = f.components[c];
    Int s = 0;
    for (int j : incidence(f, c)) s += f.components[j].m;
    Int num = 2 * comp.nodes * comp.m - s;
    if (num % comp.m != 0)
        throw fibre_error("self_intersection: kernel condition fails at component " +
                          std::to_string(c));
    return num / comp.m;
}

Int total_genus(const Fibre& f) {
    Int rhs = 0;
    for (int i = 0; i < f.size(); i++) {
        const Component& c = f.components[i];
        rhs += c.m * (2 * c.g - 2);
        for (int j : incidence(f, i)) rhs += f.components[j].m;
    }
    if (rhs % 2 != 0) throw fibre_error("total_genus: adjunction sum is odd");
    return rhs / 2 + 1;
}

bool is_principal(const Fibre& f, int c) {
    return f.components[c].g > 0 || incidence(f, c).size() >= 3;
}

std::vector<int> principal_components(const Fibre& f) {
    std::vector<int> out;
    for (int i = 0; i < f.size(); i++)
        if (is_principal(f, i)) out.push_back(i);
    return out;
}

bool is_exceptional_loop(const Fibre& f) {
    if (!f.components.empty() && principal_components(f).empty()) {
        // a looping chain: single nodal component, or a cycle of >= 2
        if (f.size() == 1) return f.components[0].nodes == 1 && f.components[0].g == 0;
        for (int i = 0; i < f.size(); i++)
            if (incidence(f, i).size() != 2 || f.components[i].g > 0 ||
                f.components[i].nodes > 0)
                return false;
        return true;
    }
    return false;
}

std::pair<Int, Int> exceptional_loop_params(const Fibre& f) {
    assert(is_exceptional_loop(f));
    return {f.components[0].m, Int(f.size())};
}

Int chi(const PrincipalInvariants& p) {
    Int s = 0;
    for (Int o : p.O) s += gcd(o, p.m);
    return (2 - 2 * p.g - Int(p.O.size()) - Int(p.L.size())) * p.m + s;
}

void DecompositionData::normalise() {
    for (auto& p : principals) {
        sort_residues(p.O, p.m);
        sort_residues(p.L, p.m);
    }
    for (auto& pc : pairs) {
        if (pc.pi > pc.pj || (pc.pi == pc.pj && residue_less(pc.dj, pc.di, principals[pc.pi].m))) {
            std::swap(pc.pi, pc.pj);
            std::swap(pc.di, pc.dj);
        }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const PairedChain& a, const PairedChain& b) {
        auto key = [&](const PairedChain& c) {
            return std::tuple(c.pi, c.pj, gcd(c.di, principals[c.pi].m), c.di, c.dj, c.depth);
        };
        return key(a) < key(b);
    });
}

namespace {

// a maximal run of non-principal components, walked from a principal end
struct Walk {
    std::vector<int> members;
    int other_end = -1;  // principal id, or -1 (outer)
    bool closed = false; // inner chain back to the start
};

struct EdgeInstances {
    // multiset of edge instances as (neighbour, count)
    std::vector<std::map<int, Int>> adj;

    explicit EdgeInstances(const Fibre& f) : adj(f.size()) {
        for (auto& [ij, k] : f.intersections) {
            adj[ij.first][ij.second] += k;
            adj[ij.second][ij.first] += k;
        }
    }
    bool take(int a, int b) {
        auto it = adj[a].find(b);
        if (it == adj[a].end() || it->second == 0) return false;
        it->second--;
        adj[b][a]--;
        return true;
    }
    Int count(int a) const {
        Int s = 0;
        for (auto& [_, k] : adj[a]) s += k;
        return s;
    }
};

Walk walk_chain(const Fibre& f, EdgeInstances& ei, const std::vector<char>& principal,
                int start, int first) {
    Walk w;
    int prev = start, cur = first;
    while (true) {
        w.members.push_back(cur);
        // pick the continuation: any remaining edge instance at cur
        int next = -1;
        for (auto& [nb, k] : ei.adj[cur])
            if (k > 0) { next = nb; break; }
        if (next < 0) return w;  // outer
        bool ok = ei.take(cur, next);
        assert(ok);
        (void)ok;
        (void)prev;
        if (principal[next]) {
            w.other_end = next;
            w.closed = (next == start);
            return w;
        }
        prev = cur;
        cur = next;
    }
}

}  // namespace

std::vector<std::string> validate(const Fibre& f) {
    std::vector<std::string> bad;
    if (f.components.empty()) {
        bad.push_back("fibre has no components");
        return bad;
    }
    for (int i = 0; i < f.size(); i++) {
        const Component& c = f.components[i];
        if (c.m < 1) bad.push_back("component " + std::to_string(i) + ": multiplicity < 1");
        if (c.g < 0) bad.push_back("component " + std::to_string(i) + ": genus < 0");
        if (c.nodes < 0) bad.push_back("component " + std::to_string(i) + ": nodes < 0");
    }
    for (auto& [ij, k] : f.intersections) {
        if (ij.first < 0 || ij.second >= f.size() || ij.first >= ij.second)
            bad.push_back("intersection with bad component pair");
        if (k < 1) bad.push_back("intersection with multiplicity < 1");
    }
    if (!bad.empty()) return bad;

    // connectivity
    std::vector<int> root(f.size());
    std::iota(root.begin(), root.end(), 0);
    std::function<int(int)> find = [&](int x) { return root[x] == x ? x : root[x] = find(root[x]); };
    for (auto& [ij, k] : f.intersections) root[find(ij.first)] = find(ij.second);
    for (int i = 1; i < f.size(); i++)
        if (find(i) != find(0)) {
            bad.push_back("fibre is not connected");
            break;
        }

    // kernel condition: every self-intersection must be an integer
    for (int i = 0; i < f.size(); i++) {
        try {
            self_intersection(f, i);
        } catch (const fibre_error& e) {
            bad.push_back(e.what());
        }
    }
    if (!bad.empty()) return bad;

    // minimality: no contractible (-1)-curves with at most two branches
    for (int i = 0; i < f.size(); i++) {
        const Component& c = f.components[i];
        if (c.g == 0 && c.nodes == 0 && self_intersection(f, i) == -1 &&
            incidence(f, i).size() < 3)
            bad.push_back("component " + std::to_string(i) +
                          " is a contractible (-1)-curve (model not minimal)");
    }

    if (is_exceptional_loop(f)) return bad;

    // every chain of P^1s must carry a valid inner/outer sequence
    std::vector<char> principal(f.size(), 0);
    for (int i = 0; i < f.size(); i++) principal[i] = is_principal(f, i);
    bool any_principal = std::any_of(principal.begin(), principal.end(), [](char x) { return x; });
    if (!any_principal) {
        bad.push_back("no principal component and not of looping type [m]I_n");
        return bad;
    }
    for (int i = 0; i < f.size(); i++)
        if (!principal[i] && (f.components[i].g > 0 || f.components[i].nodes > 0))
            bad.push_back("non-principal component " + std::to_string(i) + " with genus or node");

    EdgeInstances ei(f);
    for (int p = 0; p < f.size(); p++) {
        if (!principal[p]) continue;
        for (int x = 0; x < f.size(); x++) {
            if (principal[x]) continue;
            while (ei.take(p, x)) {
                Walk w = walk_chain(f, ei, principal, p, x);
                ChainSequence seq = {f.components[p].m};
                for (int c : w.members) seq.push_back(f.components[c].m);
                if (w.other_end >= 0) {
                    seq.push_back(f.components[w.other_end].m);
                    if (!is_inner_sequence(seq))
                        bad.push_back("inner chain at component " + std::to_string(p) +
                                      " has invalid multiplicities");
                } else {
                    if (!is_outer_sequence(seq))
                        bad.push_back("outer chain at component " + std::to_string(p) +
                                      " has invalid multiplicities");
                }
            }
        }
    }
    // any untouched edge instance between two non-principals is a stray cycle
    for (int i = 0; i < f.size(); i++)
        if (!principal[i] && ei.count(i) > 0) {
            bad.push_back("non-principal components form a closed loop away from the fibre");
            break;
        }
    return bad;
}

std::pair<DecompositionData, std::vector<ChainRecord>> decompose(const Fibre& f) {
    auto bad = validate(f);
    if (!bad.empty()) throw fibre_error("decompose: invalid fibre: " + bad.front());
    if (is_exceptional_loop(f))
        throw fibre_error("decompose: exceptional looping type [m]I_n has no decomposition");

    std::vector<char> principal(f.size(), 0);
    std::vector<int> pidx(f.size(), -1);
    DecompositionData data;
    for (int i = 0; i < f.size(); i++) {
        if (is_principal(f, i)) {
            principal[i] = 1;
            pidx[i] = int(data.principals.size());
            data.principals.push_back({f.components[i].m, f.components[i].g, {}, {}});
        }
    }

    std::vector<ChainRecord> records;
    EdgeInstances ei(f);
    auto& P = data.principals;

    // chains with at least one member
    for (int p = 0; p < f.size(); p++) {
        if (!principal[p]) continue;
        for (int x = 0; x < f.size(); x++) {
            if (principal[x]) continue;
            while (ei.take(p, x)) {
                Walk w = walk_chain(f, ei, principal, p, x);
                ChainSequence seq = {f.components[p].m};
                for (int c : w.members) seq.push_back(f.components[c].m);
                ChainRecord rec;
                rec.end0 = p;
                rec.members = w.members;
                if (w.other_end >= 0) {
                    seq.push_back(f.components[w.other_end].m);
                    rec.outer = false;
                    rec.end1 = w.other_end;
                    rec.inner_type = inner_type_of(seq);
                    int qi = pidx[p], qj = pidx[w.other_end];
                    P[qi].L.push_back(rec.inner_type.d);
                    P[qj].L.push_back(rec.inner_type.dp);
                    data.pairs.push_back(
                        {qi, qj, rec.inner_type.d, rec.inner_type.dp, rec.inner_type.n});
                } else {
                    rec.outer = true;
                    rec.outer_type = outer_type_of(seq);
                    P[pidx[p]].O.push_back(rec.outer_type.d);
                }
                records.push_back(rec);
            }
        }
    }
    // empty chains: principal components meeting directly
    for (int p = 0; p < f.size(); p++) {
        if (!principal[p]) continue;
        for (int q = p; q < f.size(); q++) {
            if (!principal[q]) continue;
            while (p != q && ei.take(p, q)) {
                ChainRecord rec;
                rec.outer = false;
                rec.end0 = p;
                rec.end1 = q;
                rec.inner_type = inner_type_of({f.components[p].m, f.components[q].m});
                P[pidx[p]].L.push_back(rec.inner_type.d);
                P[pidx[q]].L.push_back(rec.inner_type.dp);
                data.pairs.push_back({pidx[p], pidx[q], rec.inner_type.d, rec.inner_type.dp,
                                      rec.inner_type.n});
                records.push_back(rec);
            }
        }
        // nodes: empty loops from a component to itself
        for (Int t = 0; t < f.components[p].nodes; t++) {
            Int m = f.components[p].m;
            ChainRecord rec;
            rec.outer = false;
            rec.end0 = rec.end1 = p;
            rec.inner_type = {m, m, m, m, 1};
            P[pidx[p]].L.push_back(m);
            P[pidx[p]].L.push_back(m);
            data.pairs.push_back({pidx[p], pidx[p], m, m, 1});
            records.push_back(rec);
        }
    }
    data.normalise();
    return {data, records};
}

Fibre assemble(const DecompositionData& d) {
    // check invariants first
    std::vector<Int> lcount(d.principals.size(), 0);
    for (auto& pc : d.pairs) {
        const auto& a = d.principals[pc.pi];
        const auto& b = d.principals[pc.pj];
        auto md = min_depth(a.m, pc.di, b.m, pc.dj);
        if (!md)
            throw fibre_error("assemble: paired residues have different weights");
        if (pc.depth < *md)
            throw fibre_error("assemble: chain depth below minimum");
        lcount[pc.pi]++;
        lcount[pc.pj]++;
    }
    for (size_t i = 0; i < d.principals.size(); i++) {
        const auto& p = d.principals[i];
        if (p.m < 1 || p.g < 0) throw fibre_error("assemble: bad principal invariants");
        if (Int(p.L.size()) != lcount[i])
            throw fibre_error("assemble: pairing does not match L multiset");
        Int s = 0;
        for (Int o : p.O) {
            if (o < 1 || o >= p.m) throw fibre_error("assemble: outer residue out of range");
            s += o;
        }
        for (Int l : p.L) {
            if (l < 1 || l > p.m) throw fibre_error("assemble: inner residue out of range");
            s += l;
        }
        if (s % p.m != 0) throw fibre_error("assemble: residues do not sum to 0 mod m");
        if (p.O.size() + p.L.size() < 3 && p.g == 0)
            throw fibre_error("assemble: principal component with genus 0 and < 3 chains");
    }
    {
        // L multisets must agree with the pairing residues
        std::vector<std::multiset<Int>> want(d.principals.size());
        for (auto& pc : d.pairs) {
            want[pc.pi].insert(pc.di);
            want[pc.pj].insert(pc.dj);
        }
        for (size_t i = 0; i < d.principals.size(); i++) {
            std::multiset<Int> have(d.principals[i].L.begin(), d.principals[i].L.end());
            if (have != want[i])
                throw fibre_error("assemble: pairing does not match L multiset");
        }
    }

    Fibre f;
    for (auto& p : d.principals) f.components.push_back({p.m, p.g, 0});
    for (size_t i = 0; i < d.principals.size(); i++) {
        const auto& p = d.principals[i];
        for (Int o : p.O) {
            ChainSequence seq = outer_sequence({p.m, o});
            int prev = int(i);
            for (size_t k = 1; k < seq.size(); k++) {
                f.components.push_back({seq[k], 0, 0});
                int cur = f.size() - 1;
                f.add_intersection(prev, cur);
                prev = cur;
            }
        }
    }
    for (auto& pc : d.pairs) {
        const auto& a = d.principals[pc.pi];
        const auto& b = d.principals[pc.pj];
        ChainSequence seq = inner_sequence({a.m, pc.di, b.m, pc.dj, pc.depth});
        if (seq.size() == 2) {
            if (pc.pi == pc.pj)
                f.components[pc.pi].nodes++;
            else
                f.add_intersection(pc.pi, pc.pj);
            continue;
        }
        int prev = pc.pi;
        for (size_t k = 1; k + 1 < seq.size(); k++) {
            f.components.push_back({seq[k], 0, 0});
            int cur = f.size() - 1;
            f.add_intersection(prev, cur);
            prev = cur;
        }
        f.add_intersection(prev, pc.pj);
    }
    return f;
}

bool chi_sum_check(const Fibre& f) {
    auto [data, recs] = decompose(f);
    Int s = 0;
    for (auto& p : data.principals) s += chi(p);
    return s == 2 - 2 * total_genus(f);
}

bool is_semistable(const Fibre& f) {
    return std::all_of(f.components.begin(), f.components.end(),
                       [](const Component& c) { return c.m == 1; });
}

bool is_snc(const Fibre& f) {
    return std::all_of(f.components.begin(), f.components.end(),
                       [](const Component& c) { return c.nodes == 0; });
}

std::pair<Int, Int> abelian_toric(const Fibre& f) {
    auto [data, recs] = decompose(f);
    Int a = 0;
    for (auto& p : data.principals) a += p.g;
    Int t = Int(data.pairs.size()) - Int(data.principals.size()) + 1;
    return {a, t};
}

Fibre family_representative(const Fibre& f) {
    if (is_exceptional_loop(f)) {
        Fibre g;
        g.components.push_back({f.components[0].m, 0, 1});
        return g;
    }
    auto [data, recs] = decompose(f);
    for (auto& pc : data.pairs) {
        auto md = min_depth(data.principals[pc.pi].m, pc.di, data.principals[pc.pj].m, pc.dj);
        pc.depth = *md;
    }
    return assemble(data);
}

std::string fibre_to_json(const Fibre& f, bool pretty) {
    nlohmann::json j;
    j["components"] = nlohmann::json::array();
    for (int i = 0; i < f.size(); i++) {
        const Component& c = f.components[i];
        j["components"].push_back({{"id", i}, {"m", c.m}, {"g", c.g}, {"nodes", c.nodes}});
    }
    j["intersections"] = nlohmann::json::array();
    for (auto& [ij, k] : f.intersections)
        j["intersections"].push_back({ij.first, ij.second, k});
    return pretty ? j.dump(2) : j.dump();
}

Fibre fibre_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw fibre_error(std::string("fibre_from_json: ") + e.what());
    }
    if (!j.is_object()) throw fibre_error("fibre_from_json: top level must be an object");
    for (auto& [key, _] : j.items())
        if (key != "components" && key != "intersections")
            throw fibre_error("fibre_from_json: unknown key \"" + key + "\"");
    if (!j.contains("components") || !j["components"].is_array())
        throw fibre_error("fibre_from_json: missing \"components\" array");

    int n = int(j["components"].size());
    Fibre f;
    f.components.resize(n);
    std::vector<char> seen(n, 0);
    for (auto& jc : j["components"]) {
        if (!jc.is_object()) throw fibre_error("fibre_from_json: component must be an object");
        for (auto& [key, _] : jc.items())
            if (key != "id" && key != "m" && key != "g" && key != "nodes")
                throw fibre_error("fibre_from_json: unknown component key \"" + key + "\"");
        if (!jc.contains("id") || !jc["id"].is_number_integer())
            throw fibre_error("fibre_from_json: component without integer id");
        int id = jc["id"].get<int>();
        if (id < 0 || id >= n || seen[id])
            throw fibre_error("fibre_from_json: component ids must be 0..N-1, each once");
        seen[id] = 1;
        Component c;
        c.m = jc.value("m", Int(1));
        c.g = jc.value("g", Int(0));
        c.nodes = jc.value("nodes", Int(0));
        f.components[id] = c;
    }
    if (j.contains("intersections")) {
        if (!j["intersections"].is_array())
            throw fibre_error("fibre_from_json: \"intersections\" must be an array");
        for (auto& je : j["intersections"]) {
            if (!je.is_array() || je.size() != 3)
                throw fibre_error("fibre_from_json: intersection entries are [i,j,k]");
            int a = je[0].get<int>(), b = je[1].get<int>();
            Int k = je[2].get<Int>();
            if (a < 0 || b < 0 || a >= n || b >= n || a >= b || k < 1)
                throw fibre_error("fibre_from_json: intersection needs i < j and k >= 1");
            f.add_intersection(a, b, k);
        }
    }
    return f;
}

}  // namespace redtypes
