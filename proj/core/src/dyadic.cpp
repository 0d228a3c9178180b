#include "phaseplane/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

namespace phaseplane {

namespace {

constexpr std::int32_t kScaleGuard = 62;

double pow2d(std::int32_t k) { return std::ldexp(1.0, k); }

void require_comparable(const DyadicInterval& a, const DyadicInterval& b) {
    require_same_grid(a.grid, b.grid, "interval predicate");
    if (a.axis != b.axis) throw GridMismatchError("interval predicate: mixed axes");
}

}  // namespace

void require_same_grid(const DyadicGrid& a, const DyadicGrid& b, const char* what) {
    if (!(a == b)) {
        std::ostringstream os;
        os << what << ": operands belong to different dyadic grids";
        throw GridMismatchError(os.str());
    }
}

DyadicGrid::DyadicGrid(double t, double r, double tprime)
    : time_origin(t), time_unit(r), freq_origin(tprime) {
    if (!(r > 0.0) || !std::isfinite(r))
        throw Error("dyadic grid requires a positive finite dilation r");
    if (!std::isfinite(t) || !std::isfinite(tprime))
        throw Error("dyadic grid requires finite translations");
}

double DyadicInterval::length() const { return pow2d(scale) * unit(); }

double DyadicInterval::left() const {
    return origin() + static_cast<double>(index) * length();
}

double DyadicInterval::right() const {
    return origin() + static_cast<double>(index + 1) * length();
}

double DyadicInterval::center() const {
    return origin() + (static_cast<double>(index) + 0.5) * length();
}

DyadicInterval DyadicInterval::parent() const {
    if (scale >= kScaleGuard) throw CapacityError("dyadic interval scale overflow");
    // C++20 guarantees arithmetic right shift = floor division by 2.
    return DyadicInterval(grid, axis, scale + 1, index >> 1);
}

DyadicInterval DyadicInterval::lower_half() const {
    if (scale <= -kScaleGuard) throw CapacityError("dyadic interval scale underflow");
    return DyadicInterval(grid, axis, scale - 1, index * 2);
}

DyadicInterval DyadicInterval::upper_half() const {
    if (scale <= -kScaleGuard) throw CapacityError("dyadic interval scale underflow");
    return DyadicInterval(grid, axis, scale - 1, index * 2 + 1);
}

DyadicInterval DyadicInterval::ancestor(std::int32_t target_scale) const {
    if (target_scale < scale) throw Error("ancestor requires a coarser scale");
    const std::int32_t d = target_scale - scale;
    if (d >= kScaleGuard) throw CapacityError("ancestor scale gap too large");
    return DyadicInterval(grid, axis, target_scale, index >> d);
}

bool interval_contains(const DyadicInterval& outer, const DyadicInterval& inner) {
    require_comparable(outer, inner);
    if (inner.scale > outer.scale) return false;
    const std::int32_t d = outer.scale - inner.scale;
    if (d >= kScaleGuard) throw CapacityError("interval comparison scale gap too large");
    return (inner.index >> d) == outer.index;
}

bool interval_disjoint(const DyadicInterval& a, const DyadicInterval& b) {
    require_comparable(a, b);
    // Same grid and axis: nested or disjoint.
    if (a.scale <= b.scale) return (a.index >> (b.scale - a.scale)) != b.index;
    return (b.index >> (a.scale - b.scale)) != a.index;
}

int compare_centers(const DyadicInterval& a, const DyadicInterval& b) {
    require_comparable(a, b);
    // Centers are origin + (2n+1) 2^(k-1) u; compare (2n+1) 2^k at a common
    // scale in 128-bit arithmetic.
    const std::int32_t k = std::min(a.scale, b.scale);
    const std::int32_t da = a.scale - k, db = b.scale - k;
    if (da >= kScaleGuard || db >= kScaleGuard)
        throw CapacityError("center comparison scale gap too large");
    const __int128 ca = static_cast<__int128>(2 * a.index + 1) << da;
    const __int128 cb = static_cast<__int128>(2 * b.index + 1) << db;
    if (ca < cb) return -1;
    if (ca > cb) return 1;
    return 0;
}

int compare_left_endpoints(const DyadicInterval& a, const DyadicInterval& b) {
    require_comparable(a, b);
    const std::int32_t k = std::min(a.scale, b.scale);
    const std::int32_t da = a.scale - k, db = b.scale - k;
    if (da >= kScaleGuard || db >= kScaleGuard)
        throw CapacityError("endpoint comparison scale gap too large");
    const __int128 la = static_cast<__int128>(a.index) << da;
    const __int128 lb = static_cast<__int128>(b.index) << db;
    if (la < lb) return -1;
    if (la > lb) return 1;
    return 0;
}

DyadicInterval dyadic_join(const DyadicInterval& a, const DyadicInterval& b) {
    require_comparable(a, b);
    DyadicInterval j = a;
    while (!interval_contains(j, b)) {
        if (j.scale >= kScaleGuard)
            throw CapacityError("dyadic join does not exist below the scale guard");
        j = j.parent();
    }
    return j;
}

Tile::Tile(const DyadicInterval& I, const DyadicInterval& omega) : time(I), freq(omega) {
    require_same_grid(I.grid, omega.grid, "tile construction");
    if (I.axis != Axis::Time || omega.axis != Axis::Frequency)
        throw Error("tile construction: axes swapped");
    if (omega.scale != -I.scale)
        throw Error("tile construction: |I| * |omega| != 1 (freq scale must be -time scale)");
}

Tile::Tile(const DyadicGrid& g, std::int32_t time_scale, std::int64_t time_index,
           std::int64_t freq_index)
    : Tile(DyadicInterval(g, Axis::Time, time_scale, time_index),
           DyadicInterval(g, Axis::Frequency, -time_scale, freq_index)) {}

bool tile_less(const Tile& a, const Tile& b) {
    if (a.time.scale != b.time.scale) return a.time.scale < b.time.scale;
    if (a.time.index != b.time.index) return a.time.index < b.time.index;
    return a.freq.index < b.freq.index;
}

bool half_le(const HalfTile& h, const HalfTile& hp) {
    return interval_contains(hp.time, h.time) &&
           interval_contains(h.freq_half, hp.freq_half);
}

bool tile_le(const Tile& p, const Tile& pp) {
    return interval_contains(pp.time, p.time) && interval_contains(p.freq, pp.freq);
}

bool tile_le_d(const Tile& p, const Tile& pp) {
    return half_le(HalfTile(p, Half::Down), HalfTile(pp, Half::Down));
}

bool tile_le_u(const Tile& p, const Tile& pp) {
    return half_le(HalfTile(p, Half::Up), HalfTile(pp, Half::Up));
}

namespace {

bool tile_le_kind(const Tile& p, const Tile& top, TreeKind kind) {
    switch (kind) {
        case TreeKind::General: return tile_le(p, top);
        case TreeKind::Up: return tile_le_u(p, top);
        case TreeKind::Down: return tile_le_d(p, top);
    }
    return false;
}

}  // namespace

Tree::Tree(std::vector<Tile> tiles, Tile top, TreeKind kind)
    : tiles_(std::move(tiles)), top_(top), kind_(kind) {
    for (const Tile& p : tiles_) {
        require_same_grid(p.grid(), top_.grid(), "tree construction");
        if (!tile_le_kind(p, top_, kind_))
            throw Error("tree construction: member tile not below the top for this kind");
    }
    std::sort(tiles_.begin(), tiles_.end(), tile_less);
}

std::vector<Tile> Tree::up_portion() const {
    std::vector<Tile> up;
    for (const Tile& p : tiles_)
        if (tile_le_u(p, top_)) up.push_back(p);
    return up;
}

DyadicInterval minimal_top_interval(const Tree& tree) {
    if (tree.empty()) throw Error("minimal top interval of an empty tree");
    DyadicInterval j = tree.tiles().front().time;
    for (const Tile& p : tree.tiles()) j = dyadic_join(j, p.time);
    return j;
}

bool TileUniverse::admits_interval(const DyadicInterval& time_interval) const {
    if (time_interval.scale < scale_min || time_interval.scale > scale_max) return false;
    return time_interval.left() >= -time_halfwidth &&
           time_interval.right() <= time_halfwidth;
}

bool TileUniverse::admits(const Tile& tile) const { return admits_interval(tile.time); }

std::vector<Tile> dominating_tiles(const Tile& tile, const TileUniverse& universe) {
    std::vector<Tile> out;
    for (std::int32_t k = std::max(tile.scale(), universe.scale_min);
         k <= universe.scale_max; ++k) {
        const DyadicInterval anc = tile.time.ancestor(k);
        if (!universe.admits_interval(anc)) continue;
        const std::int32_t d = k - tile.scale();
        if (d >= 20) throw CapacityError("dominator enumeration scale gap too large");
        const std::int64_t first = tile.freq.index << d;
        const std::int64_t count = std::int64_t{1} << d;
        for (std::int64_t j = 0; j < count; ++j)
            out.emplace_back(anc, DyadicInterval(tile.grid(), Axis::Frequency, -k, first + j));
    }
    std::sort(out.begin(), out.end(), tile_less);
    return out;
}

TileCollection::TileCollection(DyadicGrid grid, std::vector<Tile> tiles,
                               TileUniverse universe)
    : grid_(grid), tiles_(std::move(tiles)), universe_(universe) {
    std::sort(tiles_.begin(), tiles_.end(), tile_less);
    for (std::size_t i = 0; i < tiles_.size(); ++i) {
        require_same_grid(tiles_[i].grid(), grid_, "tile collection");
        if (!universe_.admits(tiles_[i]))
            throw CapacityError("tile collection: tile outside the configured universe");
        if (i > 0 && tiles_[i] == tiles_[i - 1])
            throw Error("tile collection: duplicate tile");
    }
    // Standing separation assumption: equal-frequency tiles sit on the same
    // time sublattice mod 20.
    std::map<std::pair<std::int32_t, std::int64_t>, std::int64_t> residue_by_freq;
    for (const Tile& p : tiles_) {
        const auto key = std::make_pair(p.freq.scale, p.freq.index);
        const std::int64_t residue = ((p.time.index % 20) + 20) % 20;
        auto [it, inserted] = residue_by_freq.try_emplace(key, residue);
        if (!inserted && it->second != residue)
            throw Error(
                "tile collection: equal-frequency tiles must be separated by "
                "multiples of 20 |I|");
    }
}

std::string DisjointnessViolation::describe() const {
    std::ostringstream os;
    os << "disjointness violation: tile (k=" << tile.scale()
       << ", n=" << tile.time.index << ", m=" << tile.freq.index << ") in tree "
       << tree_index << " vs tile (k=" << other_tile.scale()
       << ", n=" << other_tile.time.index << ", m=" << other_tile.freq.index
       << ") in tree " << other_tree_index;
    return os.str();
}

std::optional<DisjointnessViolation> check_disjointness_property(
    const std::vector<Tree>& forest) {
    if (forest.empty()) return std::nullopt;
    for (const Tree& t : forest)
        if (!t.empty())
            require_same_grid(t.tiles().front().grid(), forest.front().top().grid(),
                              "disjointness check");

    std::vector<DyadicInterval> tops;
    tops.reserve(forest.size());
    for (const Tree& t : forest)
        tops.push_back(t.empty() ? t.top().time : minimal_top_interval(t));

    for (std::size_t ti = 0; ti < forest.size(); ++ti) {
        for (const Tile& p : forest[ti].tiles()) {
            for (std::size_t tj = 0; tj < forest.size(); ++tj) {
                for (const Tile& pp : forest[tj].tiles()) {
                    if (!interval_contains(pp.freq.lower_half(), p.freq)) continue;
                    if (!interval_disjoint(pp.time, tops[ti]))
                        return DisjointnessViolation{ti, p, tj, pp};
                }
            }
        }
    }
    return std::nullopt;
}

namespace {

bool down_halves_disjoint_impl(const std::vector<Tile>& tiles) {
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        const DyadicInterval di = tiles[i].freq.lower_half();
        for (std::size_t j = i + 1; j < tiles.size(); ++j) {
            const DyadicInterval dj = tiles[j].freq.lower_half();
            if (!interval_disjoint(tiles[i].time, tiles[j].time) &&
                !interval_disjoint(di, dj))
                return false;
        }
    }
    return true;
}

}  // namespace

bool down_halves_disjoint(const TileCollection& tiles) {
    return down_halves_disjoint_impl(tiles.tiles());
}

bool down_halves_disjoint(const std::vector<Tile>& tiles) {
    return down_halves_disjoint_impl(tiles);
}

std::vector<Tree> split_into_up_trees(const Tree& tree) {
    const std::vector<Tile>& members = tree.tiles();
    if (members.empty()) return {};

    std::vector<std::size_t> maximal;
    for (std::size_t i = 0; i < members.size(); ++i) {
        bool is_max = true;
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (i == j) continue;
            if (tile_le(members[i], members[j]) && !(members[i] == members[j])) {
                is_max = false;
                break;
            }
        }
        if (is_max) maximal.push_back(i);
    }

    std::vector<Tree> out;
    std::vector<bool> assigned(members.size(), false);
    for (std::size_t mi : maximal) {
        std::vector<Tile> part;
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (assigned[i]) continue;
            if (tile_le(members[i], members[mi])) {
                part.push_back(members[i]);
                assigned[i] = true;
            }
        }
        // Postcondition: each part is an up-tree with top the maximal tile.
        for (const Tile& p : part) {
            if (!tile_le_u(p, members[mi]))
                throw TreeSplitError(
                    "split_into_up_trees: member not below its maximal tile in the "
                    "up-order (input forest violates the disjointness property)");
        }
        out.emplace_back(std::move(part), members[mi], TreeKind::Up);
    }

    std::size_t total = 0;
    for (const Tree& t : out) total += t.size();
    if (total != members.size())
        throw TreeSplitError("split_into_up_trees: output trees do not partition the input");

    for (std::size_t i = 0; i < out.size(); ++i) {
        const DyadicInterval ii = minimal_top_interval(out[i]);
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            if (!interval_disjoint(ii, minimal_top_interval(out[j])))
                throw TreeSplitError(
                    "split_into_up_trees: up-tree time supports are not pairwise "
                    "disjoint");
        }
    }
    return out;
}

bool disjoint_time_ancestors(const Tile& p, const std::vector<Tile>& collection,
                             const Tree& tree) {
    const DyadicInterval top_time = minimal_top_interval(tree);
    std::vector<const Tile*> hits;
    for (const Tile& pp : collection)
        if (interval_contains(pp.freq.lower_half(), p.freq)) hits.push_back(&pp);

    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (!interval_disjoint(hits[i]->time, top_time)) return false;
        for (std::size_t j = i + 1; j < hits.size(); ++j)
            if (!interval_disjoint(hits[i]->time, hits[j]->time)) return false;
    }
    return true;
}

}  // namespace phaseplane
