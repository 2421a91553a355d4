// classify.hpp
// Enumeration layers: cores, principal invariants and types, shapes, and
// isomorph-free reduction-family enumeration per genus.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "redtypes/fibre.hpp"

namespace redtypes {

struct Core {
    Int m = 1;
    std::vector<Int> residues;  // in 1..m-1, sorted by (gcd, value)
    bool operator==(const Core&) const = default;
    auto operator<=>(const Core&) const = default;
};

Int core_chi(const Core& c);

// (weight, core) of a principal component's invariants.
std::pair<Int, Core> core_of(const PrincipalInvariants& p);

// All cores of the given Euler characteristic; chi must be <= 0 and even
// (chi = 2 starts an infinite family and is rejected, odd chi gives none).
std::vector<Core> enumerate_cores(Int chi);

// All invariant tuples (m, g, O, L) of principal components with chi < 0.
std::vector<PrincipalInvariants> enumerate_principal_invariants(Int chi);

struct PrincipalType {
    Int m = 1, g = 0;
    std::vector<Int> O;                     // outer residues, 1..m-1
    std::vector<std::pair<Int, Int>> LL;    // loops, pairs of residues in 1..m
    std::vector<Int> LD;                    // D-tails; gcd(l, m) even
    std::vector<Int> LM;                    // edges
    PrincipalInvariants invariants() const;
    Int chi() const;
    std::vector<Int> weights() const;  // sorted gcds of LM
    bool operator==(const PrincipalType&) const = default;
    auto operator<=>(const PrincipalType&) const = default;
};

// All principal types with the given chi < 0.
std::vector<PrincipalType> enumerate_principal_types(Int chi);

// Number of principal types with an ordering of LM whose weight vector is w.
Int count_types_by_weight_vector(Int chi, const std::vector<Int>& w);

// Invariant tuples with m/(-chi) > 2; each must match a Table M row.
std::vector<PrincipalInvariants> large_multiplicity_check(Int chi);
bool table_m_member(const PrincipalInvariants& p);
// true iff q = m/(-chi) is of the form 2 + 4/k or 2 + 3/k
bool large_ratio_form(Int m, Int chi);

struct Shape {
    std::vector<Int> chis;  // per-vertex chi < 0
    // unordered vertex pairs (i < j) -> non-empty sorted weight multiset
    std::map<std::pair<int, int>, std::vector<Int>> edges;
    std::string canonical;  // minimal-path canonical form
    bool operator<(const Shape& o) const { return canonical < o.canonical; }
};

// Isomorph-free shapes of reduction families of the given genus >= 2.
// Graphs on more than 8 vertices (genus 6) require extended = true.
std::vector<Shape> enumerate_shapes(Int genus, bool extended = false, int jobs = 1);

struct Family {
    DecompositionData data;  // minimal depths
    std::string label;       // canonical label, the identity key
    bool operator<(const Family& o) const { return label < o.label; }
};

// All reduction families of the given genus, sorted by label.
std::vector<Family> enumerate_families(Int genus, int jobs = 1, bool extended = false);
std::vector<Family> enumerate_semistable_families(Int genus, int jobs = 1);

// Families grouped per shape, in the order of enumerate_shapes.
std::vector<std::pair<Shape, std::vector<Family>>> enumerate_families_by_shape(
    Int genus, int jobs = 1, bool extended = false);

}  // namespace redtypes
