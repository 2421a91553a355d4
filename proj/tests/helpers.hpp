// shared test fixtures: Kodaira fibres and small builders
#pragma once

#include <string>

#include "redtypes/fibre.hpp"

namespace redtypes::testing {

inline Fibre from_invariants(const std::vector<PrincipalInvariants>& ps,
                             const std::vector<PairedChain>& pairs = {}) {
    DecompositionData d;
    d.principals = ps;
    d.pairs = pairs;
    return assemble(d);
}

// the ten Kodaira reduction types; depth n used for I_n and I*_n
inline Fibre kodaira(const std::string& name, Int n = 1) {
    if (name == "Ig1") return from_invariants({{1, 1, {}, {}}});
    if (name == "I") {
        Fibre f;
        if (n == 1) {
            f.components.push_back({1, 0, 1});
        } else {
            for (Int i = 0; i < n; i++) f.components.push_back({1, 0, 0});
            if (n == 2)
                f.add_intersection(0, 1, 2);
            else
                for (Int i = 0; i < n; i++) f.add_intersection(int(i), int((i + 1) % n));
        }
        return f;
    }
    if (name == "I*0") return from_invariants({{2, 0, {1, 1, 1, 1}, {}}});
    if (name == "I*")
        return from_invariants({{2, 0, {1, 1}, {2}}, {2, 0, {1, 1}, {2}}},
                               {{0, 1, 2, 2, n}});
    if (name == "IV") return from_invariants({{3, 0, {1, 1, 1}, {}}});
    if (name == "IV*") return from_invariants({{3, 0, {2, 2, 2}, {}}});
    if (name == "III") return from_invariants({{4, 0, {1, 1, 2}, {}}});
    if (name == "III*") return from_invariants({{4, 0, {3, 3, 2}, {}}});
    if (name == "II") return from_invariants({{6, 0, {1, 2, 3}, {}}});
    if (name == "II*") return from_invariants({{6, 0, {5, 4, 3}, {}}});
    throw std::runtime_error("unknown Kodaira name " + name);
}

}  // namespace redtypes::testing
