#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phaseplane/errors.hpp"

namespace phaseplane {

// A translated/dilated pair of dyadic grids for the phase plane: the time
// axis uses steps 2^k * time_unit from time_origin, the frequency axis uses
// steps 2^k / time_unit from freq_origin. The two translation parameters are
// independent; the dilations are reciprocal so every tile has area one.
struct DyadicGrid {
    double time_origin = 0.0;   // t
    double time_unit = 1.0;     // r > 0
    double freq_origin = 0.0;   // t'

    DyadicGrid() = default;
    DyadicGrid(double t, double r, double tprime);

    bool operator==(const DyadicGrid&) const = default;
};

enum class Axis : std::uint8_t { Time = 0, Frequency = 1 };

// Half-open interval origin + [n 2^k u, (n+1) 2^k u) with u the axis unit.
// All geometric predicates are exact integer arithmetic on (scale, index);
// floating endpoints are used only when sampling.
struct DyadicInterval {
    DyadicGrid grid;
    Axis axis = Axis::Time;
    std::int32_t scale = 0;
    std::int64_t index = 0;

    DyadicInterval() = default;
    DyadicInterval(const DyadicGrid& g, Axis a, std::int32_t k, std::int64_t n)
        : grid(g), axis(a), scale(k), index(n) {}

    double unit() const {
        return axis == Axis::Time ? grid.time_unit : 1.0 / grid.time_unit;
    }
    double origin() const {
        return axis == Axis::Time ? grid.time_origin : grid.freq_origin;
    }
    double length() const;
    double left() const;
    double right() const;
    double center() const;
    bool contains_point(double x) const { return x >= left() && x < right(); }

    DyadicInterval parent() const;
    DyadicInterval lower_half() const;
    DyadicInterval upper_half() const;
    // Ancestor at the given coarser scale.
    DyadicInterval ancestor(std::int32_t target_scale) const;

    bool operator==(const DyadicInterval& o) const {
        return grid == o.grid && axis == o.axis && scale == o.scale && index == o.index;
    }
};

// Exact predicates. Both intervals must share grid and axis.
bool interval_contains(const DyadicInterval& outer, const DyadicInterval& inner);
bool interval_disjoint(const DyadicInterval& a, const DyadicInterval& b);
// -1 / 0 / +1 comparison of interval centers, exact.
int compare_centers(const DyadicInterval& a, const DyadicInterval& b);
// -1 / 0 / +1 comparison of left endpoints, exact.
int compare_left_endpoints(const DyadicInterval& a, const DyadicInterval& b);
// Smallest dyadic interval containing both. Throws CapacityError if the
// scales run away (no common ancestor below the guard scale).
DyadicInterval dyadic_join(const DyadicInterval& a, const DyadicInterval& b);

// A tile I x omega with |I| * |omega| = 1, i.e. freq scale == -time scale.
struct Tile {
    DyadicInterval time;   // I
    DyadicInterval freq;   // omega

    Tile() = default;
    Tile(const DyadicInterval& I, const DyadicInterval& omega);
    Tile(const DyadicGrid& g, std::int32_t time_scale, std::int64_t time_index,
         std::int64_t freq_index);

    const DyadicGrid& grid() const { return time.grid; }
    std::int32_t scale() const { return time.scale; }

    DyadicInterval freq_down() const { return freq.lower_half(); }   // omega_d
    DyadicInterval freq_up() const { return freq.upper_half(); }     // omega_u

    bool operator==(const Tile& o) const { return time == o.time && freq == o.freq; }
};

// Canonical tile order: lexicographic in (time scale, time index, freq index).
bool tile_less(const Tile& a, const Tile& b);

enum class Half : std::uint8_t { Down = 0, Up = 1 };

// One of the rectangles P_d = I x omega_d, P_u = I x omega_u.
struct HalfTile {
    DyadicInterval time;
    DyadicInterval freq_half;

    HalfTile() = default;
    HalfTile(const Tile& tile, Half which)
        : time(tile.time),
          freq_half(which == Half::Down ? tile.freq_down() : tile.freq_up()) {}
};

// h <= h'  iff  I subset I' and omega superset omega' for the rectangles.
bool half_le(const HalfTile& h, const HalfTile& hp);

// P <= P'  iff  I_P subset I_P' and omega_P superset omega_P'.
bool tile_le(const Tile& p, const Tile& pp);
bool tile_le_d(const Tile& p, const Tile& pp);   // P_d <= P'_d
bool tile_le_u(const Tile& p, const Tile& pp);   // P_u <= P'_u

enum class TreeKind : std::uint8_t { General = 0, Up = 1, Down = 2 };

// A finite set of tiles below a common top (the top need not be a member).
// The kind is stored and validated on construction.
class Tree {
public:
    Tree(std::vector<Tile> tiles, Tile top, TreeKind kind);

    const std::vector<Tile>& tiles() const { return tiles_; }
    const Tile& top() const { return top_; }
    TreeKind kind() const { return kind_; }
    bool empty() const { return tiles_.empty(); }
    std::size_t size() const { return tiles_.size(); }

    // Members below the top in the up-order (the up-portion used by the
    // energy functional). For an up-tree this is every member.
    std::vector<Tile> up_portion() const;

private:
    std::vector<Tile> tiles_;
    Tile top_;
    TreeKind kind_;
};

// The unique minimal top time interval I_T: the dyadic join of the member
// time intervals. Throws Error on an empty tree.
DyadicInterval minimal_top_interval(const Tree& tree);

// Bounded universe for enumerations: scale range and a symmetric time window.
struct TileUniverse {
    std::int32_t scale_min = 0;
    std::int32_t scale_max = 0;
    double time_halfwidth = 0.0;

    bool admits(const Tile& tile) const;
    bool admits_interval(const DyadicInterval& time_interval) const;
};

// Universe tiles P' >= P (time ancestors crossed with frequency
// subintervals), in canonical order. Includes P itself when admissible.
std::vector<Tile> dominating_tiles(const Tile& tile, const TileUniverse& universe);

// A finite tile collection with universe metadata. Construction enforces the
// standing separation assumption: two distinct tiles with equal frequency
// interval have time offset an integer multiple of 20 |I|, i.e. equal time
// index mod 20. Duplicates are rejected.
class TileCollection {
public:
    TileCollection(DyadicGrid grid, std::vector<Tile> tiles, TileUniverse universe);

    const DyadicGrid& grid() const { return grid_; }
    const std::vector<Tile>& tiles() const { return tiles_; }
    const TileUniverse& universe() const { return universe_; }
    bool empty() const { return tiles_.empty(); }
    std::size_t size() const { return tiles_.size(); }

private:
    DyadicGrid grid_;
    std::vector<Tile> tiles_;   // kept in canonical order
    TileUniverse universe_;
};

struct DisjointnessViolation {
    std::size_t tree_index = 0;        // tree containing P
    Tile tile;                         // P
    std::size_t other_tree_index = 0;  // tree containing P'
    Tile other_tile;                   // P'
    std::string describe() const;
};

// Checks the tree-collection disjointness property: whenever omega_P is
// contained in omega_{P'_d} for P in T, P' in T', the time interval I_{P'}
// misses I_T. Returns the first violating quadruple in scan order, if any.
std::optional<DisjointnessViolation> check_disjointness_property(
    const std::vector<Tree>& forest);

// All down-halves of distinct tiles in the collection are pairwise disjoint
// rectangles (a consequence of the disjointness property).
bool down_halves_disjoint(const TileCollection& tiles);
bool down_halves_disjoint(const std::vector<Tile>& tiles);

// Splits a tree into up-trees rooted at its maximal member tiles. Verifies
// the postconditions (partition, up-order, pairwise disjoint supports) and
// throws TreeSplitError naming the first one that fails.
std::vector<Tree> split_into_up_trees(const Tree& tree);

// Among the tiles P' in `collection` whose lower frequency half contains
// omega_P, the time intervals are pairwise disjoint and avoid I_T of the
// tree containing P. Vacuously true when no such P' exists.
bool disjoint_time_ancestors(const Tile& p, const std::vector<Tile>& collection,
                             const Tree& tree);

void require_same_grid(const DyadicGrid& a, const DyadicGrid& b, const char* what);

}  // namespace phaseplane
