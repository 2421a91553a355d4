#include "redtypes/chains.hpp"

#include <cassert>
#include <numeric>

namespace redtypes {

Int gcd(Int a, Int b) { return std::gcd(a, b); }

Int residue(Int x, Int m) {
    assert(m >= 1);
    Int r = x % m;
    if (r < 0) r += m;
    return r == 0 ? m : r;
}

Int weight(const ChainSequence& seq) {
    assert(!seq.empty());
    Int c = 0;
    for (Int d : seq) c = gcd(c, d);
    return c;
}

static bool valid_sequence(const ChainSequence& seq, bool outer) {
    if (seq.empty()) return false;
    for (Int d : seq)
        if (d < 1) return false;
    ChainSequence s = seq;
    if (outer) s.push_back(0);
    for (size_t i = 1; i + 1 < s.size(); i++) {
        Int num = s[i - 1] + s[i + 1];
        if (num % s[i] != 0 || num / s[i] < 2) return false;
    }
    return true;
}

bool is_inner_sequence(const ChainSequence& seq) {
    // a single entry has no type (no second endpoint); rejected
    return seq.size() >= 2 && valid_sequence(seq, false);
}

bool is_outer_sequence(const ChainSequence& seq) {
    return seq.size() >= 2 && valid_sequence(seq, true);
}

Int depth(const ChainSequence& seq) {
    if (!is_inner_sequence(seq)) throw chain_error("depth: not an inner sequence");
    Int c = weight(seq);
    Int count = 0;
    for (Int d : seq)
        if (d == c) count++;
    return count - 1;
}

ChainSequence outer_sequence(const OuterType& t) {
    assert(t.m >= 2 && t.d >= 1 && t.d < t.m);
    ChainSequence seq = {t.m, t.d};
    while (seq.back() > 1 && seq[seq.size() - 2] % seq.back() != 0) {
        Int prev2 = seq[seq.size() - 2], prev = seq.back();
        seq.push_back(residue(-prev2, prev));
    }
    return seq;
}

Int inv(Int a, Int b) {
    assert(b >= 1);
    Int g = gcd(residue(a, b) % b, b);  // gcd(a mod b, b); note residue(m,m)=m
    Int target = g == 0 ? 0 : g % b;
    Int ax = 0, step = ((a % b) + b) % b;
    for (Int x = 0; x < b; x++) {
        if (ax == target % b) return x;
        ax = (ax + step) % b;
    }
    assert(false && "inv: no solution");
    return -1;
}

std::optional<Int> min_depth(Int m, Int d, Int mp, Int dp) {
    assert(m >= 1 && mp >= 1);
    Int c = gcd(residue(d, m), m);
    if (c != gcd(residue(dp, mp), mp)) return std::nullopt;
    // scale-invariant: a chain of weight c is c times a weight-1 chain, so
    // the condition reads n + inv(d,m)/(m/c) + inv(d',m')/(m'/c) > 0; both
    // fractional parts lie in [0,1), leaving n in {-1,0,1}
    Int a = inv(d, m), b = inv(dp, mp);
    Int mr = m / c, mpr = mp / c;
    Int n = -1;
    while (n * mr * mpr + a * mpr + b * mr <= 0) n++;
    assert(n >= -1 && n <= 1);
    return n;
}

static ChainSequence inner_sequence_rec(Int m, Int d, Int mp, Int dp, int guard) {
    // depth -1 construction, steps (4)-(6); guard asserts the m+m' bound
    assert(guard >= 0 && "inner sequence recursion exceeded m+m' bound");
    if (residue(mp, m) == residue(d, m) && residue(m, mp) == residue(dp, mp))
        return {m, mp};
    if (m >= mp) {
        Int dl = residue(d, m);
        assert(dl < m);
        ChainSequence rest = inner_sequence_rec(dl, -m, mp, dp, guard - 1);
        ChainSequence seq = {m};
        seq.insert(seq.end(), rest.begin(), rest.end());
        return seq;
    }
    Int dl = residue(dp, mp);
    assert(dl < mp);
    ChainSequence seq = inner_sequence_rec(m, d, dl, -mp, guard - 1);
    seq.push_back(mp);
    return seq;
}

ChainSequence inner_sequence(const InnerType& t) {
    auto nmin = min_depth(t.m, t.d, t.mp, t.dp);
    if (!nmin) {
        chain_error e("inner_sequence: weight mismatch gcd(d,m) != gcd(d',m')");
        throw e;
    }
    if (t.n < *nmin) {
        chain_error e("inner_sequence: depth " + std::to_string(t.n) +
                      " below minimum " + std::to_string(*nmin));
        e.min_depth = *nmin;
        throw e;
    }
    Int c = gcd(residue(t.d, t.m), t.m);
    if (t.n == -1) {
        if (c > 1) {
            // a chain of weight c is c times the reduced weight-1 chain
            ChainSequence seq = inner_sequence(
                {t.m / c, residue(t.d, t.m) / c, t.mp / c, residue(t.dp, t.mp) / c, t.n});
            for (Int& x : seq) x *= c;
            return seq;
        }
        return inner_sequence_rec(t.m, t.d, t.mp, t.dp, int(t.m + t.mp));
    }

    ChainSequence left, right;
    if (c < t.m) left = outer_sequence({t.m, residue(t.d, t.m)});
    if (c < t.mp) {
        right = outer_sequence({t.mp, residue(t.dp, t.mp)});
        std::reverse(right.begin(), right.end());
    }
    Int have = (left.empty() ? 0 : 1) + (right.empty() ? 0 : 1);
    ChainSequence seq = left;
    if (t.n + 1 >= have) {
        seq.insert(seq.end(), size_t(t.n + 1 - have), c);
        seq.insert(seq.end(), right.begin(), right.end());
    } else {
        // n = 0 with both halves present: they share the single weight entry
        assert(t.n == 0 && have == 2);
        seq.insert(seq.end(), right.begin() + 1, right.end());
    }
    return seq;
}

OuterType outer_type_of(const ChainSequence& seq) {
    if (!is_outer_sequence(seq)) throw chain_error("outer_type_of: not an outer sequence");
    return {seq[0], seq[1]};
}

InnerType inner_type_of(const ChainSequence& seq) {
    if (!is_inner_sequence(seq)) throw chain_error("inner_type_of: not an inner sequence");
    size_t k = seq.size();
    InnerType t;
    t.m = seq[0];
    t.d = residue(seq[1], t.m);
    t.mp = seq[k - 1];
    t.dp = residue(seq[k - 2], t.mp);
    t.n = depth(seq);
    return t;
}

Fraction::Fraction(Int n, Int d) {
    assert(d != 0);
    if (d < 0) { n = -n; d = -d; }
    Int g = gcd(n < 0 ? -n : n, d);
    if (g == 0) g = 1;
    num = n / g;
    den = d / g;
}

bool operator<(const Fraction& a, const Fraction& b) {
    return a.num * b.den < b.num * a.den;
}

std::string to_string(const Fraction& f) {
    return std::to_string(f.num) + "/" + std::to_string(f.den);
}

// x = a^{-1} mod b in {1,...,b} for gcd(a,b)=1
static Int inverse_mod(Int a, Int b) {
    a = ((a % b) + b) % b;
    Int t = 0, newt = 1, r = b, newr = a;
    while (newr != 0) {
        Int q = r / newr;
        Int tmp = t - q * newt; t = newt; newt = tmp;
        tmp = r - q * newr; r = newr; newr = tmp;
    }
    assert(r == 1);
    t %= b;
    if (t <= 0) t += b;
    return t;
}

static void one_path_rec(Fraction a, Fraction b, std::vector<Fraction>& out) {
    if (a.num * b.den - a.den * b.num == 1) {
        out.push_back(a);
        out.push_back(b);
        return;
    }
    if (a.den >= b.den) {
        // bn - ad = 1 with 1 <= b' <= d
        Int bb = inverse_mod(a.num, a.den);
        Int aa = (bb * a.num - 1) / a.den;
        out.push_back(a);
        one_path_rec(Fraction(aa, bb), b, out);
    } else {
        // ad' - bn' = 1 with 1 <= b' <= d'
        Int bb = b.den - inverse_mod(b.num, b.den);
        if (bb == 0) bb = b.den;
        Int aa = (1 + bb * b.num) / b.den;
        std::vector<Fraction> left;
        one_path_rec(a, Fraction(aa, bb), left);
        out.insert(out.end(), left.begin(), left.end());
        out.push_back(b);
    }
}

std::vector<Fraction> shortest_one_path(const Fraction& a, const Fraction& b) {
    if (!(b < a)) throw chain_error("shortest_one_path: need a > b");
    std::vector<Fraction> out;
    one_path_rec(a, b, out);
    return out;
}

}  // namespace redtypes
