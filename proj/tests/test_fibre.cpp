#include "doctest.h"
#include "helpers.hpp"
#include "redtypes/fibre.hpp"

#include <random>
#include <set>

using namespace redtypes;
using redtypes::testing::from_invariants;
using redtypes::testing::kodaira;

TEST_CASE("validate accepts Kodaira II") {
    Fibre f = kodaira("II");
    CHECK(validate(f).empty());
    CHECK(f.size() == 4);
}

TEST_CASE("validate flags a broken kernel") {
    Fibre f = kodaira("II");
    // II has components 6,1,2,3 all meeting the multiplicity-6 one; bumping
    // the multiplicity-1 tail to 4 breaks the left-kernel condition
    REQUIRE(f.components[1].m == 1);
    f.components[1].m = 4;
    auto bad = validate(f);
    CHECK_FALSE(bad.empty());
}

TEST_CASE("validate accepts a smooth genus 2 curve") {
    Fibre f;
    f.components.push_back({1, 2, 0});
    CHECK(validate(f).empty());
    CHECK(total_genus(f) == 2);
    CHECK(self_intersection(f, 0) == 0);
}

TEST_CASE("incidence multiset") {
    // one central component, two simple branches, one double branch, a node
    Fibre f;
    f.components = {{2, 0, 1}, {1, 0, 0}, {1, 0, 0}, {1, 0, 0}};
    f.add_intersection(0, 1);
    f.add_intersection(0, 2);
    f.add_intersection(0, 3, 2);
    std::vector<int> got = incidence(f, 0);
    std::multiset<int> gotset(got.begin(), got.end());
    CHECK(gotset == std::multiset<int>{1, 2, 3, 3, 0, 0});
    CHECK(incidence(f, 1) == std::vector<int>{0});
    CHECK_THROWS_AS(incidence(f, 7), fibre_error);
}

TEST_CASE("self intersections") {
    Fibre f = kodaira("II");
    CHECK(self_intersection(f, 0) == -1);  // 2*0 - (1+2+3)/6
    for (int i = 1; i < f.size(); i++) CHECK(self_intersection(f, i) <= -2);

    // elliptic tail of multiplicity 1 meeting one multiplicity-1 chain once
    Fibre g;
    g.components = {{1, 1, 0}, {1, 1, 0}};
    g.add_intersection(0, 1);
    CHECK(self_intersection(g, 0) == -1);
}

TEST_CASE("total genus") {
    CHECK(total_genus(kodaira("II")) == 1);
    CHECK(total_genus(kodaira("I*0")) == 1);
    CHECK(total_genus(kodaira("I*", 3)) == 1);
    CHECK(total_genus(kodaira("I", 5)) == 1);
    // two multiplicity-23 components, total genus 22
    Fibre f = from_invariants({{23, 0, {3, 3}, {17}}, {23, 0, {4, 9}, {10}}},
                              {{0, 1, 17, 10, -1}});
    CHECK(validate(f).empty());
    CHECK(total_genus(f) == 22);
}

TEST_CASE("principal components") {
    Fibre f = kodaira("II");
    CHECK(principal_components(f) == std::vector<int>{0});
    Fibre g = kodaira("Ig1");
    CHECK(principal_components(g) == std::vector<int>{0});
    CHECK(principal_components(kodaira("I", 4)).empty());
    CHECK(is_exceptional_loop(kodaira("I", 4)));
    CHECK(is_exceptional_loop(kodaira("I", 1)));
    CHECK_FALSE(is_exceptional_loop(kodaira("II")));
}

TEST_CASE("decompose reads off invariants") {
    auto [data, recs] = decompose(kodaira("II*"));
    REQUIRE(data.principals.size() == 1);
    CHECK(data.principals[0] == PrincipalInvariants{6, 0, {5, 4, 3}, {}});
    CHECK(data.pairs.empty());
    CHECK(recs.size() == 3);

    CHECK_THROWS_AS(decompose(kodaira("I", 3)), fibre_error);

    // D-tail shaped component for n = 2: (4, 0, {2,2}, {4})
    Fibre f = from_invariants({{4, 0, {2, 2}, {4}}, {4, 0, {2, 2}, {4}}}, {{0, 1, 4, 4, 1}});
    auto [d2, r2] = decompose(f);
    CHECK(d2.principals[0] == PrincipalInvariants{4, 0, {2, 2}, {4}});
    CHECK(chi(d2.principals[0]) == 0);
}

TEST_CASE("assemble round trips") {
    Fibre f = kodaira("I*", 2);
    auto [data, recs] = decompose(f);
    Fibre g = assemble(data);
    auto [data2, recs2] = decompose(g);
    CHECK(data == data2);

    // two genus-1 components joined by a depth-1 chain
    Fibre h = from_invariants({{1, 1, {}, {1}}, {1, 1, {}, {1}}}, {{0, 1, 1, 1, 1}});
    CHECK(validate(h).empty());
    CHECK(total_genus(h) == 2);
    CHECK(h.size() == 2);  // depth 1 on weight 1 means a direct intersection
    CHECK(h.inter(0, 1) == 1);
}

TEST_CASE("assemble rejects bad data") {
    DecompositionData d;
    d.principals = {{2, 0, {1, 1}, {2}}, {3, 0, {1, 2}, {3}}};
    d.pairs = {{0, 1, 2, 3, 0}};  // weights 2 != 3
    CHECK_THROWS_AS(assemble(d), fibre_error);
    d.principals = {{5, 0, {1, 1}, {3}}, {5, 0, {2, 3}, {3}}};
    d.pairs = {{0, 1, 3, 3, -1}};  // below minimal depth 0
    CHECK_THROWS_AS(assemble(d), fibre_error);
}

TEST_CASE("chi") {
    CHECK(chi({2, 0, {1, 1}, {2}}) == 0);
    CHECK(chi({6, 1, {5}, {6, 6, 4, 3}}) == -29);
    CHECK(chi({3, 2, {}, {3}}) == -9);
}

TEST_CASE("chi sum check") {
    for (auto name : {"Ig1", "I*0", "IV", "IV*", "III", "III*", "II", "II*"})
        CHECK(chi_sum_check(kodaira(name)));
    CHECK(chi_sum_check(kodaira("I*", 2)));
    Fibre f = from_invariants({{23, 0, {3, 3}, {17}}, {23, 0, {4, 9}, {10}}},
                              {{0, 1, 17, 10, -1}});
    CHECK(chi_sum_check(f));
    // genus 2 example with two D-tails: chi's are 0, -1, -1, 0
    Fibre g = from_invariants({{2, 0, {1}, {2, 1}},
                               {2, 0, {1}, {2, 1}},
                               {2, 0, {1, 1}, {2}},
                               {2, 0, {1, 1}, {2}}},
                              {{0, 1, 1, 1, 0}, {0, 2, 2, 2, 2}, {1, 3, 2, 2, 2}});
    CHECK(total_genus(g) == 2);
    CHECK(chi_sum_check(g));
}

TEST_CASE("semistable and snc") {
    Fibre ig2;
    ig2.components.push_back({1, 2, 0});
    CHECK(is_semistable(ig2));
    CHECK(is_snc(ig2));
    CHECK_FALSE(is_semistable(kodaira("II")));
    Fibre i1 = kodaira("I", 1);
    CHECK(is_semistable(i1));
    CHECK_FALSE(is_snc(i1));
}

TEST_CASE("abelian and toric parts") {
    Fibre h = from_invariants({{1, 1, {}, {1}}, {1, 1, {}, {1}}}, {{0, 1, 1, 1, 1}});
    CHECK(abelian_toric(h) == std::pair<Int, Int>{2, 0});
    Fibre t = from_invariants({{1, 0, {}, {1, 1, 1}}, {1, 0, {}, {1, 1, 1}}},
                              {{0, 1, 1, 1, 1}, {0, 1, 1, 1, 1}, {0, 1, 1, 1, 1}});
    CHECK(total_genus(t) == 2);
    CHECK(abelian_toric(t) == std::pair<Int, Int>{0, 2});
    CHECK(abelian_toric(kodaira("II")) == std::pair<Int, Int>{0, 0});
}

TEST_CASE("family representative") {
    // I_2 - (3) I_4: loops of depth 2 and 4, edge of depth 3
    Fibre f = from_invariants({{1, 0, {}, {1, 1, 1}}, {1, 0, {}, {1, 1, 1}}},
                              {{0, 0, 1, 1, 2}, {1, 1, 1, 1, 4}, {0, 1, 1, 1, 3}});
    CHECK(total_genus(f) == 2);
    Fibre rep = family_representative(f);
    auto [data, recs] = decompose(rep);
    for (auto& pc : data.pairs) CHECK(pc.depth == 1);
    // already minimal is a fixed point
    auto [d1, r1] = decompose(family_representative(rep));
    CHECK(d1 == data);
}

TEST_CASE("json round trip") {
    Fibre f = kodaira("II*");
    Fibre g = fibre_from_json(fibre_to_json(f));
    CHECK(f.components == g.components);
    CHECK(f.intersections == g.intersections);

    CHECK_THROWS_AS(fibre_from_json("{\"components\":[{\"id\":0,\"m\":1}],\"extra\":1}"),
                    fibre_error);
    CHECK_THROWS_AS(fibre_from_json("{\"components\":[{\"id\":1,\"m\":1}]}"), fibre_error);
    CHECK_THROWS_AS(fibre_from_json("not json"), fibre_error);
    CHECK_THROWS_AS(
        fibre_from_json("{\"components\":[{\"id\":0},{\"id\":1}],\"intersections\":[[1,0,1]]}"),
        fibre_error);
}

TEST_CASE("chain components have self-intersection <= -2") {
    Fibre f = from_invariants({{8, 0, {5, 3}, {8}}, {8, 0, {5, 3}, {8}}}, {{0, 1, 8, 8, 1}});
    REQUIRE(validate(f).empty());
    auto prin = principal_components(f);
    std::set<int> prinset(prin.begin(), prin.end());
    for (int i = 0; i < f.size(); i++) {
        if (prinset.count(i)) continue;
        CHECK(self_intersection(f, i) <= -2);
    }
}
