#include "doctest.h"
#include "redtypes/chains.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace redtypes;

TEST_CASE("weight of a sequence") {
    CHECK(weight({8, 5, 2, 1}) == 1);
    CHECK(weight({6, 6, 6}) == 6);
    CHECK(weight({8, 5, 2, 3, 4}) == 1);
    // equals the gcd of every consecutive pair of a valid sequence
    ChainSequence s = {8, 5, 2, 1, 1, 1, 2, 3, 4};
    for (size_t i = 0; i + 1 < s.size(); i++) CHECK(gcd(s[i], s[i + 1]) == weight(s));
}

TEST_CASE("inner/outer sequence recognition") {
    CHECK(is_inner_sequence({8, 5, 2, 1, 1, 1, 2, 3, 4}));
    CHECK(is_inner_sequence({8, 5, 2, 3, 4}));
    CHECK(is_outer_sequence({8, 5, 2, 1}));
    CHECK(is_outer_sequence({4, 3, 2, 1}));
    CHECK_FALSE(is_inner_sequence({2, 3, 2}));  // (2+2)/3 not an integer
    CHECK_FALSE(is_outer_sequence({2, 3, 2}));
    CHECK_FALSE(is_inner_sequence({4}));  // single entry has no type
    CHECK_FALSE(is_outer_sequence({4}));
    CHECK(is_inner_sequence({2, 1, 2}));
    CHECK_FALSE(is_inner_sequence({2, 2, 1}));  // (2+1)/2 not an integer
}

TEST_CASE("depth") {
    CHECK(depth({8, 5, 2, 1, 1, 1, 2, 3, 4}) == 2);
    CHECK(depth({8, 5, 2, 3, 4}) == -1);
    CHECK(depth({1, 1}) == 1);
    CHECK(depth({2, 2}) == 1);
    CHECK_THROWS_AS(depth({2, 3, 2}), chain_error);
}

TEST_CASE("outer sequences") {
    CHECK(outer_sequence({8, 5}) == ChainSequence{8, 5, 2, 1});
    CHECK(outer_sequence({2, 1}) == ChainSequence{2, 1});
    CHECK(outer_sequence({6, 3}) == ChainSequence{6, 3});
    CHECK(outer_sequence({4, 3}) == ChainSequence{4, 3, 2, 1});
    // strictly decreasing, ends at the gcd, and is a valid outer sequence
    for (Int m = 2; m <= 25; m++)
        for (Int d = 1; d < m; d++) {
            ChainSequence s = outer_sequence({m, d});
            CHECK(is_outer_sequence(s));
            CHECK(std::is_sorted(s.rbegin(), s.rend()));
            CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
            CHECK(s.back() == gcd(m, d));
        }
}

TEST_CASE("inv") {
    CHECK(inv(3, 5) == 2);
    CHECK(inv(1, 1) == 0);
    // brute-force oracle
    auto brute = [](Int a, Int b) {
        for (Int x = 0;; x++)
            if (residue(a * x, b) == residue(gcd(a, b), b)) return x;
    };
    CHECK(brute(17, 23) == 19);
    CHECK(inv(17, 23) == 19);
    for (Int b = 1; b <= 20; b++)
        for (Int a = 1; a <= b; a++) CHECK(inv(a, b) == brute(a, b));
}

TEST_CASE("min_depth") {
    CHECK(min_depth(8, 5, 4, 3) == -1);
    CHECK(min_depth(5, 3, 5, 3) == 0);
    CHECK_FALSE(min_depth(2, 2, 3, 1).has_value());  // weights 2 != 1
    // feasible values always land in {-1, 0, 1}
    for (Int m = 1; m <= 10; m++)
        for (Int d = 1; d <= m; d++)
            for (Int mp = 1; mp <= 10; mp++)
                for (Int dp = 1; dp <= mp; dp++) {
                    auto n = min_depth(m, d, mp, dp);
                    if (gcd(d, m) == gcd(dp, mp)) {
                        REQUIRE(n.has_value());
                        CHECK(*n >= -1);
                        CHECK(*n <= 1);
                    } else {
                        CHECK_FALSE(n.has_value());
                    }
                }
}

TEST_CASE("inner sequences from types") {
    CHECK(inner_sequence({8, 5, 4, 3, -1}) == ChainSequence{8, 5, 2, 3, 4});
    CHECK(inner_sequence({8, 5, 4, 3, 0}) == ChainSequence{8, 5, 2, 1, 2, 3, 4});
    CHECK(inner_sequence({3, 1, 6, 5, 1}) == ChainSequence{3, 1, 1, 2, 3, 4, 5, 6});
    CHECK(inner_sequence({2, 2, 2, 2, 1}) == ChainSequence{2, 2});
    CHECK(inner_sequence({23, 17, 23, 10, -1}) ==
          ChainSequence{23, 17, 11, 5, 4, 7, 10, 23});
    try {
        inner_sequence({5, 3, 5, 3, -1});
        FAIL("expected chain_error");
    } catch (const chain_error& e) {
        CHECK(e.min_depth == 0);
    }
}

TEST_CASE("sequence types") {
    CHECK(inner_type_of({8, 5, 2, 3, 4}) == InnerType{8, 5, 4, 3, -1});
    CHECK(outer_type_of({2, 1}) == OuterType{2, 1});
    CHECK(inner_type_of({23, 17, 11, 5, 4, 7, 10, 23}) == InnerType{23, 17, 23, 10, -1});
    CHECK_THROWS_AS(inner_type_of({8}), chain_error);
    CHECK_THROWS_AS(outer_type_of({8}), chain_error);
}

TEST_CASE("type <-> sequence round trips on a grid") {
    for (Int m = 1; m <= 12; m++)
        for (Int d = 1; d <= m; d++)
            for (Int mp = 1; mp <= 12; mp++)
                for (Int dp = 1; dp <= mp; dp++) {
                    auto nmin = min_depth(m, d, mp, dp);
                    if (!nmin) continue;
                    for (Int n = *nmin; n <= *nmin + 3; n++) {
                        InnerType t{m, d, mp, dp, n};
                        ChainSequence s = inner_sequence(t);
                        REQUIRE(is_inner_sequence(s));
                        CHECK(weight(s) == gcd(d, m));
                        // convex
                        for (size_t i = 1; i + 1 < s.size(); i++)
                            CHECK(2 * s[i] <= s[i - 1] + s[i + 1]);
                        CHECK(inner_type_of(s) == t);
                    }
                }
    for (Int m = 2; m <= 12; m++)
        for (Int d = 1; d < m; d++) {
            OuterType t{m, d};
            CHECK(outer_type_of(outer_sequence(t)) == t);
        }
}

TEST_CASE("shortest 1-paths") {
    using F = Fraction;
    std::vector<F> expect = {F(19, 23), F(14, 17), F(9, 11), F(4, 5),
                             F(3, 4),  F(5, 7),  F(7, 10), F(16, 23)};
    CHECK(shortest_one_path(F(19, 23), F(16, 23)) == expect);
    CHECK(shortest_one_path(F(1, 2), F(0, 1)) == std::vector<F>{F(1, 2), F(0, 1)});
    CHECK(shortest_one_path(F(3, 4), F(2, 3)) == std::vector<F>{F(3, 4), F(2, 3)});
    CHECK_THROWS_AS(shortest_one_path(F(1, 3), F(1, 2)), chain_error);
}

TEST_CASE("1-path properties for small denominators") {
    using F = Fraction;
    for (Int db = 1; db <= 12; db++)
        for (Int nb = 0; nb < db; nb++) {
            if (gcd(nb, db) != 1) continue;
            for (Int da = 1; da <= 12; da++)
                for (Int na = 1; na <= da; na++) {
                    if (gcd(na, da) != 1) continue;
                    F a(na, da), b(nb, db);
                    if (!(b < a)) continue;
                    auto path = shortest_one_path(a, b);
                    REQUIRE(path.size() >= 2);
                    CHECK(path.front() == a);
                    CHECK(path.back() == b);
                    ChainSequence dens;
                    for (size_t i = 0; i < path.size(); i++) {
                        dens.push_back(path[i].den);
                        if (i + 1 < path.size())
                            CHECK(path[i].num * path[i + 1].den -
                                      path[i].den * path[i + 1].num == 1);
                    }
                    CHECK(is_inner_sequence(dens));
                    CHECK(weight(dens) == 1);
                }
        }
}
