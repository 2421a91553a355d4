// chains.hpp
// Arithmetic of multiplicity sequences in chains of rational curves:
// outer/inner sequences, their compressed types, and shortest 1-paths
// between rationals.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace redtypes {

using Int = std::int64_t;

// gcd with gcd(0,0) = 0; always non-negative.
Int gcd(Int a, Int b);

// Representative of x mod m in {1,...,m}; 0 mod m is represented as m.
Int residue(Int x, Int m);

struct chain_error : std::runtime_error {
    explicit chain_error(const std::string& what) : std::runtime_error(what) {}
    std::optional<Int> min_depth;  // set when a depth was below the minimum
};

using ChainSequence = std::vector<Int>;

// Outer chain type m(d/): m >= 2, 1 <= d < m.
struct OuterType {
    Int m = 2;
    Int d = 1;
    bool operator==(const OuterType&) const = default;
};

// Inner chain type m<d,d'>n m'; residues d in 1..m, d' in 1..m'.
struct InnerType {
    Int m = 1, d = 1;
    Int mp = 1, dp = 1;
    Int n = 1;
    bool operator==(const InnerType&) const = default;
};

Int weight(const ChainSequence& seq);
bool is_inner_sequence(const ChainSequence& seq);
bool is_outer_sequence(const ChainSequence& seq);

// -1 + number of occurrences of the weight; requires a valid inner sequence.
Int depth(const ChainSequence& seq);

// The unique outer sequence m, d, ..., gcd(m,d), by d_i = -d_{i-2} mod d_{i-1}.
ChainSequence outer_sequence(const OuterType& t);

// Smallest x >= 0 with a*x = gcd(a,b) mod b.
Int inv(Int a, Int b);

// Smallest legal depth of an inner chain m<d,d'> m', or nullopt when
// gcd(d,m) != gcd(d',m'). Always in {-1,0,1} when feasible.
std::optional<Int> min_depth(Int m, Int d, Int mp, Int dp);

// The unique inner sequence of the given type; throws chain_error (carrying
// min_depth) if the type is not realisable.
ChainSequence inner_sequence(const InnerType& t);

// Inverse maps of the two constructions; throw chain_error on invalid input.
OuterType outer_type_of(const ChainSequence& seq);
InnerType inner_type_of(const ChainSequence& seq);

// Fraction in lowest terms; den > 0, sign in num.
struct Fraction {
    Int num = 0;
    Int den = 1;

    Fraction() = default;
    Fraction(Int n, Int d);  // normalises

    bool operator==(const Fraction&) const = default;
};

bool operator<(const Fraction& a, const Fraction& b);
std::string to_string(const Fraction& f);

// The unique shortest 1-path a = f_0 > f_1 > ... > f_k = b with
// n_i d_{i+1} - d_i n_{i+1} = 1 and no removable middle term.
std::vector<Fraction> shortest_one_path(const Fraction& a, const Fraction& b);

}  // namespace redtypes
