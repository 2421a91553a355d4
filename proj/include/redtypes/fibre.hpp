// fibre.hpp
// Reduction types as combinatorial data: components with multiplicities and
// genera plus a symmetric intersection pairing. Validation, genus, and the
// decomposition into principal components and chains.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "redtypes/chains.hpp"

namespace redtypes {

struct Component {
    Int m = 1;      // multiplicity, >= 1
    Int g = 0;      // geometric genus, >= 0
    Int nodes = 0;  // p - g, >= 0
    bool operator==(const Component&) const = default;
};

struct Fibre {
    std::vector<Component> components;
    // i < j -> |C_i . C_j| >= 1
    std::map<std::pair<int, int>, Int> intersections;

    Int inter(int i, int j) const;
    void add_intersection(int i, int j, Int k = 1);
    int size() const { return int(components.size()); }
};

struct fibre_error : std::runtime_error {
    explicit fibre_error(const std::string& what) : std::runtime_error(what) {}
};

// All violations of the reduction-type axioms; empty means valid.
std::vector<std::string> validate(const Fibre& f);

// Incident components, each C' != C taken |C.C'| times and C itself 2*nodes times.
std::vector<int> incidence(const Fibre& f, int c);

// C.C from the left-kernel condition; throws fibre_error when not integral.
Int self_intersection(const Fibre& f, int c);

// Total genus g with 2g-2 = sum_C ( m(2g_C-2) + sum_{C' in I(C)} m_C' ).
Int total_genus(const Fibre& f);

bool is_principal(const Fibre& f, int c);
std::vector<int> principal_components(const Fibre& f);

// True for the exceptional looping types [m]I_n (no principal component).
bool is_exceptional_loop(const Fibre& f);
// (m, n) of an exceptional [m]I_n fibre.
std::pair<Int, Int> exceptional_loop_params(const Fibre& f);

struct PrincipalInvariants {
    Int m = 1, g = 0;
    std::vector<Int> O;  // outer initial multiplicities mod m, in 1..m-1
    std::vector<Int> L;  // inner initial multiplicities mod m, in 1..m
    bool operator==(const PrincipalInvariants&) const = default;
    auto operator<=>(const PrincipalInvariants&) const = default;
};

// Residue sort of the label convention: by (gcd(x,m), x).
bool residue_less(Int a, Int b, Int m);
void sort_residues(std::vector<Int>& v, Int m);

Int chi(const PrincipalInvariants& p);

struct PairedChain {
    int pi = 0, pj = 0;  // indices into DecompositionData::principals
    Int di = 1, dj = 1;  // initial multiplicities mod m_pi / m_pj
    Int depth = 0;
    bool operator==(const PairedChain&) const = default;
};

struct DecompositionData {
    std::vector<PrincipalInvariants> principals;
    std::vector<PairedChain> pairs;
    // canonical reordering so equal data compare equal
    void normalise();
    bool operator==(const DecompositionData&) const = default;
};

struct ChainRecord {
    bool outer = true;
    int end0 = -1, end1 = -1;  // principal component ids (end1 = -1 for outer)
    OuterType outer_type;
    InnerType inner_type;
    std::vector<int> members;  // non-principal component ids, in order from end0
    bool operator==(const ChainRecord&) const = default;
};

// Decomposition data of a valid fibre with at least one principal component.
std::pair<DecompositionData, std::vector<ChainRecord>> decompose(const Fibre& f);

// The unique fibre with the given decomposition data; inverse of decompose.
Fibre assemble(const DecompositionData& d);

bool chi_sum_check(const Fibre& f);
bool is_semistable(const Fibre& f);
bool is_snc(const Fibre& f);

// (abelian, toric) parts: sum of genera of principal components and
// |inner chains| - |principal components| + 1.
std::pair<Int, Int> abelian_toric(const Fibre& f);

// Same reduction family, all inner chain depths minimal.
Fibre family_representative(const Fibre& f);

// JSON wire format: {"components":[{"id","m","g","nodes"},...],
//                    "intersections":[[i,j,k],...]}
std::string fibre_to_json(const Fibre& f, bool pretty = false);
Fibre fibre_from_json(const std::string& text);

}  // namespace redtypes
