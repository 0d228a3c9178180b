#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "phaseplane/dyadic.hpp"

using namespace phaseplane;

namespace {

const DyadicGrid kGrid{};   // t = 0, r = 1, t' = 0

Tile tile(std::int32_t k, std::int64_t n, std::int64_t m) { return Tile(kGrid, k, n, m); }

// Independent rectangle predicates on exact endpoints: an interval at scale
// k, index n has endpoints n 2^k and (n+1) 2^k; lift both to the common
// finer scale and compare 128-bit integers.
struct ExactInterval {
    std::int32_t scale;
    std::int64_t index;
};

bool oracle_contains(ExactInterval outer, ExactInterval inner) {
    const std::int32_t k = std::min(outer.scale, inner.scale);
    const __int128 olo = static_cast<__int128>(outer.index) << (outer.scale - k);
    const __int128 ohi = static_cast<__int128>(outer.index + 1) << (outer.scale - k);
    const __int128 ilo = static_cast<__int128>(inner.index) << (inner.scale - k);
    const __int128 ihi = static_cast<__int128>(inner.index + 1) << (inner.scale - k);
    return olo <= ilo && ihi <= ohi;
}

bool oracle_disjoint(ExactInterval a, ExactInterval b) {
    const std::int32_t k = std::min(a.scale, b.scale);
    const __int128 alo = static_cast<__int128>(a.index) << (a.scale - k);
    const __int128 ahi = static_cast<__int128>(a.index + 1) << (a.scale - k);
    const __int128 blo = static_cast<__int128>(b.index) << (b.scale - k);
    const __int128 bhi = static_cast<__int128>(b.index + 1) << (b.scale - k);
    return ahi <= blo || bhi <= alo;
}

bool oracle_tile_le(const Tile& p, const Tile& pp) {
    return oracle_contains({pp.time.scale, pp.time.index}, {p.time.scale, p.time.index}) &&
           oracle_contains({p.freq.scale, p.freq.index}, {pp.freq.scale, pp.freq.index});
}

Tile random_tile(std::mt19937_64& rng) {
    const std::int32_t k = static_cast<std::int32_t>(rng() % 5) - 2;
    const std::int64_t n = static_cast<std::int64_t>(rng() % 64) - 32;
    const std::int64_t m = static_cast<std::int64_t>(rng() % 16) - 8;
    return tile(k, n, m);
}

}  // namespace

TEST_SUITE("dyadic") {

TEST_CASE("half order anchors") {
    const Tile a = tile(0, 0, 0);   // [0,1) x [0,1)
    const Tile b = tile(1, 0, 0);   // [0,2) x [0,1/2)
    const HalfTile ad(a, Half::Down), bd(b, Half::Down);
    CHECK(half_le(ad, ad));                       // reflexive
    CHECK(half_le(ad, bd));                       // [0,1) in [0,2), [0,1/2) contains [0,1/4)
    const Tile c = tile(0, 1, 0);                 // [1,2) x [0,1)
    CHECK_FALSE(half_le(HalfTile(c, Half::Down), ad));
}

TEST_CASE("tile order anchors") {
    const Tile p = tile(0, 0, 0);
    CHECK(tile_le(p, tile(1, 0, 0)));
    CHECK_FALSE(tile_le(p, tile(1, 1, 0)));   // time intervals disjoint
}

TEST_CASE("tile order equals the half-tile disjunction on random pairs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10000; ++trial) {
        const Tile p = random_tile(rng), q = random_tile(rng);
        const bool le = tile_le(p, q);
        CHECK(le == (tile_le_d(p, q) || tile_le_u(p, q)));
        CHECK(le == oracle_tile_le(p, q));
    }
}

TEST_CASE("tile order is a partial order on random triples") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10000; ++trial) {
        const Tile a = random_tile(rng), b = random_tile(rng), c = random_tile(rng);
        CHECK(tile_le(a, a));
        if (tile_le(a, b) && tile_le(b, a)) CHECK(a == b);
        if (tile_le(a, b) && tile_le(b, c)) CHECK(tile_le(a, c));
    }
}

TEST_CASE("same-axis intervals are nested or disjoint") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10000; ++trial) {
        const DyadicInterval a(kGrid, Axis::Time, static_cast<std::int32_t>(rng() % 7) - 3,
                               static_cast<std::int64_t>(rng() % 128) - 64);
        const DyadicInterval b(kGrid, Axis::Time, static_cast<std::int32_t>(rng() % 7) - 3,
                               static_cast<std::int64_t>(rng() % 128) - 64);
        const bool nested = interval_contains(a, b) || interval_contains(b, a);
        const bool disj = interval_disjoint(a, b);
        CHECK((nested || disj));
        CHECK(disj == oracle_disjoint({a.scale, a.index}, {b.scale, b.index}));
    }
}

TEST_CASE("tiles have area one by construction") {
    const Tile p = tile(-2, 5, 3);
    CHECK(p.time.scale == -p.freq.scale);
    CHECK(p.time.length() * p.freq.length() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(Tile(DyadicInterval(kGrid, Axis::Time, 0, 0),
                         DyadicInterval(kGrid, Axis::Frequency, 1, 0)),
                    Error);
}

TEST_CASE("frequency halves partition omega") {
    const Tile p = tile(1, 0, 3);
    const DyadicInterval d = p.freq_down(), u = p.freq_up();
    CHECK(interval_disjoint(d, u));
    CHECK(interval_contains(p.freq, d));
    CHECK(interval_contains(p.freq, u));
    CHECK(d.length() == doctest::Approx(u.length()));
    CHECK(d.length() == doctest::Approx(p.freq.length() / 2.0));
}

TEST_CASE("grid mismatch raises") {
    const DyadicGrid other(0.5, 1.0, 0.0);
    CHECK_THROWS_AS(tile_le(tile(0, 0, 0), Tile(other, 0, 0, 0)), GridMismatchError);
}

TEST_CASE("minimal top interval") {
    SUBCASE("single-tile tree with itself as top") {
        const Tile p = tile(0, 3, 0);
        const Tree t({p}, p, TreeKind::General);
        CHECK(minimal_top_interval(t) == p.time);
    }
    SUBCASE("two separated tiles under a wide top") {
        const Tile top = tile(2, 0, 0);
        const Tile p1 = tile(0, 0, 0), p2 = tile(0, 2, 0);
        const Tree t({p1, p2}, top, TreeKind::General);
        const DyadicInterval join = minimal_top_interval(t);
        CHECK(join == top.time);   // [0,4)

        // Oracle: enumerate every dyadic interval in a bounded universe and
        // keep the shortest one containing both member time intervals.
        double best = 1e18;
        for (std::int32_t k = 0; k <= 6; ++k) {
            for (std::int64_t n = -64; n <= 64; ++n) {
                const ExactInterval cand{k, n};
                if (oracle_contains(cand, {0, 0}) && oracle_contains(cand, {0, 2}))
                    best = std::min(best, std::ldexp(1.0, k));
            }
        }
        CHECK(join.length() == doctest::Approx(best));
    }
    SUBCASE("top plus nested child returns the top interval") {
        const Tile top = tile(1, 0, 0);
        const Tile child = tile(0, 1, 0);
        REQUIRE(tile_le(child, top));
        const Tree t({top, child}, top, TreeKind::General);
        CHECK(minimal_top_interval(t) == top.time);
    }
    SUBCASE("empty tree raises") {
        const Tree t({}, tile(0, 0, 0), TreeKind::General);
        CHECK_THROWS_AS(minimal_top_interval(t), Error);
    }
}

TEST_CASE("tree construction validates the order for its kind") {
    const Tile top = tile(1, 0, 0);
    const Tile inside = tile(0, 0, 0);
    REQUIRE(tile_le(inside, top));
    CHECK_NOTHROW(Tree({inside}, top, TreeKind::General));
    const Tile outside = tile(0, 5, 0);
    CHECK_THROWS_AS(Tree({outside}, top, TreeKind::General), Error);
}

TEST_CASE("disjointness property checker") {
    SUBCASE("empty forest and singleton trees pass") {
        CHECK_FALSE(check_disjointness_property({}).has_value());
        const Tile p = tile(0, 0, 0);
        CHECK_FALSE(check_disjointness_property({Tree({p}, p, TreeKind::General)}).has_value());
    }
    SUBCASE("nested pair inside one tree violates") {
        const Tile top = tile(2, 0, 0);
        const Tile pp = tile(0, 0, 0);   // [0,1) x [0,1)
        const Tile p = tile(1, 0, 0);    // [0,2) x [0,1/2) ; omega_P = omega_{P'_d}
        const Tree t({p, pp}, top, TreeKind::General);
        const auto violation = check_disjointness_property({t});
        REQUIRE(violation.has_value());
        CHECK(violation->tile == p);
        CHECK(violation->other_tile == pp);
    }
    SUBCASE("time-separated trees with nested frequencies pass") {
        const Tile top1 = tile(1, 0, 0);    // times [0,2)
        const Tile top2 = tile(0, 20, 0);   // times [20,21)
        const Tree t1({top1}, top1, TreeKind::Up);
        const Tree t2({top2}, top2, TreeKind::Up);
        const auto violation = check_disjointness_property({t1, t2});
        CHECK_FALSE(violation.has_value());

        // Brute-force oracle over all cross pairs.
        const std::vector<Tree> forest{t1, t2};
        bool oracle_ok = true;
        for (const Tree& ta : forest)
            for (const Tile& p : ta.tiles())
                for (const Tree& tb : forest)
                    for (const Tile& pp : tb.tiles()) {
                        ExactInterval od{pp.freq.lower_half().scale, pp.freq.lower_half().index};
                        if (!oracle_contains(od, {p.freq.scale, p.freq.index})) continue;
                        const DyadicInterval it = minimal_top_interval(ta);
                        if (!oracle_disjoint({pp.time.scale, pp.time.index},
                                             {it.scale, it.index}))
                            oracle_ok = false;
                    }
        CHECK(oracle_ok);
    }
}

TEST_CASE("down halves of a clean forest are pairwise disjoint") {
    const Tile a = tile(0, 0, 0);
    CHECK(down_halves_disjoint(std::vector<Tile>{a}));

    // The violating forest from the checker case overlaps in the down halves.
    const Tile pp = tile(0, 0, 0);
    const Tile p = tile(1, 0, 0);
    CHECK_FALSE(down_halves_disjoint(std::vector<Tile>{p, pp}));
}

TEST_CASE("splitting into up-trees") {
    SUBCASE("an up-tree splits into itself") {
        const Tile top = tile(2, 0, 1);   // omega = [1/4, 1/2), omega_u = [3/8, 1/2)
        const Tile member = tile(1, 0, 0);   // omega = [0, 1/2), omega_u = [1/4, 1/2)
        REQUIRE(tile_le_u(member, top));
        const Tree t({member}, top, TreeKind::Up);
        const std::vector<Tree> parts = split_into_up_trees(t);
        REQUIRE(parts.size() == 1);
        CHECK(parts[0].tiles() == t.tiles());
        CHECK(parts[0].kind() == TreeKind::Up);
    }
    SUBCASE("two maximal tiles at disjoint times give two up-trees") {
        const Tile top = tile(2, 0, 0);
        const Tile m1 = tile(1, 0, 0);
        const Tile m2 = tile(1, 1, 0);
        const Tree t({m1, m2}, top, TreeKind::General);
        const std::vector<Tree> parts = split_into_up_trees(t);
        REQUIRE(parts.size() == 2);

        // Oracle: maximality scan.
        for (const Tile& m : {m1, m2}) {
            bool maximal = true;
            for (const Tile& other : t.tiles())
                if (!(other == m) && tile_le(m, other)) maximal = false;
            CHECK(maximal);
        }

        // Partition property: output tiles equal input tiles as a multiset.
        std::vector<Tile> collected;
        for (const Tree& part : parts)
            collected.insert(collected.end(), part.tiles().begin(), part.tiles().end());
        std::sort(collected.begin(), collected.end(), tile_less);
        CHECK(collected == t.tiles());
    }
}

TEST_CASE("disjoint time ancestors") {
    const Tile p = tile(0, 0, 0);
    const Tree t({p}, p, TreeKind::General);
    SUBCASE("vacuously true without qualifying tiles") {
        CHECK(disjoint_time_ancestors(p, {p}, t));
    }
    SUBCASE("qualifying tile overlapping the tree interval fails") {
        const Tile pp = tile(1, 0, 0);   // omega_{P'_d} = [0,1/4)... contains? no
        // Build a genuine qualifier: omega_{P'_d} must contain omega_P = [0,1).
        const Tile qual = tile(-1, 0, 0);   // omega at scale 1: [0,2), down half [0,1)
        REQUIRE(interval_contains(qual.freq.lower_half(), p.freq));
        CHECK_FALSE(disjoint_time_ancestors(p, {qual}, t));
        (void)pp;
    }
}

TEST_CASE("tile collection enforces the separation assumption") {
    const TileUniverse universe{-2, 3, 64.0};
    SUBCASE("20-separated equal-frequency tiles are accepted") {
        const std::vector<Tile> tiles{tile(0, 0, 0), tile(0, 20, 0), tile(0, -20, 0)};
        CHECK_NOTHROW(TileCollection(kGrid, tiles, universe));
    }
    SUBCASE("other offsets are rejected") {
        const std::vector<Tile> tiles{tile(0, 0, 0), tile(0, 7, 0)};
        CHECK_THROWS_AS(TileCollection(kGrid, tiles, universe), Error);
    }
    SUBCASE("duplicates are rejected") {
        const std::vector<Tile> tiles{tile(0, 0, 0), tile(0, 0, 0)};
        CHECK_THROWS_AS(TileCollection(kGrid, tiles, universe), Error);
    }
    SUBCASE("tiles outside the universe are rejected") {
        CHECK_THROWS_AS(TileCollection(kGrid, {tile(5, 0, 0)}, universe), CapacityError);
    }
}

TEST_CASE("dominating tiles enumerate ancestors crossed with subintervals") {
    const TileUniverse universe{-2, 3, 64.0};
    const Tile p = tile(0, 1, 2);
    const std::vector<Tile> doms = dominating_tiles(p, universe);
    CHECK(!doms.empty());
    // p itself appears, every dominator is >= p, and the count per scale is
    // 2^(k'-k).
    bool found_self = false;
    std::map<std::int32_t, int> per_scale;
    for (const Tile& d : doms) {
        CHECK(tile_le(p, d));
        per_scale[d.scale()]++;
        if (d == p) found_self = true;
    }
    CHECK(found_self);
    for (const auto& [k, count] : per_scale) CHECK(count == (1 << (k - p.scale())));
}

}  // TEST_SUITE
