#include "phaseplane/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace phaseplane {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 finalizer over the combined word.
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::mt19937_64 seeded_rng(std::uint64_t base, std::uint64_t stream) {
    return std::mt19937_64(mix_seed(base, stream));
}

void EnsembleSpec::validate(double sampling_window, std::size_t samples) const {
    if (tree_count < 1) throw ConfigError("ensemble.tree_count", "need at least one tree");
    if (tiles_per_tree < 1)
        throw ConfigError("ensemble.tiles_per_tree", "need at least one tile per tree");
    if (member_scale_min > member_scale_max)
        throw ConfigError("ensemble.scale_range", "member scale range is empty");
    if (top_scale_min > top_scale_max || top_scale_min <= member_scale_max)
        throw ConfigError("ensemble.top_scale", "top scales must sit above member scales");
    if (time_halfwidth > sampling_window / 2.0)
        throw ConfigError("ensemble.window",
                          "universe window exceeds the middle half of the sampling window");
    const double nyquist = static_cast<double>(samples) / (4.0 * sampling_window);
    // Worst member frequency reach: an interval of length 2^{-k_min} around
    // the top frequency band, plus the packet bump radius.
    const double reach = top_freq_halfwidth + std::ldexp(1.0, -member_scale_min) +
                         std::ldexp(1.0, -member_scale_min) / 20.0;
    if (reach >= nyquist)
        throw ConfigError("ensemble.top_freq",
                          "member frequencies would exceed the representable band; "
                          "reduce top_freq_halfwidth or raise samples");
}

std::vector<Tile> GeneratedForest::all_tiles() const {
    std::vector<Tile> out;
    for (const Tree& t : trees) out.insert(out.end(), t.tiles().begin(), t.tiles().end());
    std::sort(out.begin(), out.end(), tile_less);
    return out;
}

TileCollection GeneratedForest::collection() const {
    return TileCollection(grid, all_tiles(), universe);
}

namespace {

// Global residue of the 20-separated time sublattice for a frequency class;
// deterministic within a run, shared across trees.
std::int64_t class_residue(std::uint64_t salt, std::int32_t scale, std::int64_t freq_index) {
    const std::uint64_t h =
        mix_seed(salt, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(scale)) << 40) ^
                           static_cast<std::uint64_t>(freq_index + (1LL << 30)));
    return static_cast<std::int64_t>(h % 20);
}

}  // namespace

GeneratedForest random_disjprop_collection(const EnsembleSpec& spec, const DyadicGrid& grid) {
    GeneratedForest out;
    out.grid = grid;
    out.universe = TileUniverse{spec.member_scale_min, spec.top_scale_max,
                                spec.time_halfwidth};

    std::mt19937_64 rng = seeded_rng(spec.seed, 0xF0E57ULL);
    const std::uint64_t residue_salt = mix_seed(spec.seed, 0x5EEDULL);

    struct Top {
        Tile tile;
    };
    std::vector<Top> tops;
    std::vector<std::vector<Tile>> members;

    // Admissible member positions under a top: at each scale the frequency
    // interval is forced (its upper half must be the ancestor of
    // omega_{top,u}, which must itself be an upper half); time positions run
    // over the 20-separated class sublattice inside I_top.
    auto available_members = [&](const Tile& top) {
        std::vector<Tile> available;
        for (std::int32_t k = spec.member_scale_min;
             k <= std::min(spec.member_scale_max, top.scale()); ++k) {
            const DyadicInterval anc = top.freq_up().ancestor(-k - 1);
            if ((anc.index & 1) == 0) continue;
            const DyadicInterval omega = anc.parent();
            const std::int64_t residue = class_residue(residue_salt, -k, omega.index);
            const std::int32_t gap = top.scale() - k;
            const std::int64_t first = top.time.index << gap;
            const std::int64_t count = std::int64_t{1} << gap;
            std::int64_t n = first + ((residue - first) % 20 + 20) % 20;
            for (; n < first + count; n += 20)
                available.emplace_back(grid, k, n, omega.index);
        }
        return available;
    };

    // Sample tops: random scale in the top range, random admissible time
    // slot, random frequency near the origin. Tops whose frequency intervals
    // intersect must occupy disjoint time intervals, and a top must admit at
    // least one member position.
    const int max_attempts = 400 * spec.tree_count;
    int attempts = 0;
    while (static_cast<int>(tops.size()) < spec.tree_count) {
        if (++attempts > max_attempts)
            throw CapacityError(
                "ensemble spec infeasible: could not place disjoint populated tree "
                "tops in the window");
        const std::int32_t k_top =
            spec.top_scale_min +
            static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(
                                                  spec.top_scale_max - spec.top_scale_min + 1));
        const double slot_len = std::ldexp(1.0, k_top) * grid.time_unit;
        const std::int64_t n_lo = static_cast<std::int64_t>(
            std::ceil((-spec.time_halfwidth - grid.time_origin) / slot_len));
        const std::int64_t n_hi = static_cast<std::int64_t>(
            std::floor((spec.time_halfwidth - grid.time_origin) / slot_len)) - 1;
        if (n_hi < n_lo) continue;
        const std::int64_t n_top =
            n_lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n_hi - n_lo + 1));

        const double freq_step = std::ldexp(1.0, -k_top) / grid.time_unit;
        const std::int64_t m_max = static_cast<std::int64_t>(
            std::floor(spec.top_freq_halfwidth / freq_step));
        const std::int64_t m_top =
            -m_max + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(2 * m_max + 1));

        Tile cand(grid, k_top, n_top, m_top);
        bool ok = true;
        for (const Top& existing : tops) {
            if (!interval_disjoint(existing.tile.freq, cand.freq) &&
                !interval_disjoint(existing.tile.time, cand.time)) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        std::vector<Tile> available = available_members(cand);
        if (available.empty()) continue;
        std::shuffle(available.begin(), available.end(), rng);
        const std::size_t take = std::min<std::size_t>(
            available.size(), static_cast<std::size_t>(spec.tiles_per_tree));
        tops.push_back(Top{cand});
        members.emplace_back(available.begin(), available.begin() + take);
    }

    auto rebuild = [&](void) {
        std::vector<Tree> forest;
        for (std::size_t ti = 0; ti < tops.size(); ++ti)
            if (!members[ti].empty())
                forest.emplace_back(members[ti], tops[ti].tile, TreeKind::Up);
        return forest;
    };

    std::vector<Tree> forest = rebuild();
    while (auto violation = check_disjointness_property(forest)) {
        // Evict the time-interfering tile P' and rebuild.
        std::size_t live_index = 0;
        std::size_t owner = tops.size();
        for (std::size_t ti = 0; ti < tops.size(); ++ti) {
            if (members[ti].empty()) continue;
            if (live_index == violation->other_tree_index) {
                owner = ti;
                break;
            }
            ++live_index;
        }
        if (owner == tops.size())
            throw Error("ensemble eviction bookkeeping failed");
        auto& own = members[owner];
        const auto it = std::find(own.begin(), own.end(), violation->other_tile);
        if (it == own.end()) throw Error("ensemble eviction bookkeeping failed");
        own.erase(it);
        ++out.evictions;
        if (own.empty()) ++out.emptied_trees;
        forest = rebuild();
    }

    out.trees = std::move(forest);
    if (out.trees.empty())
        throw CapacityError("ensemble spec infeasible: eviction emptied every tree");
    return out;
}

SampledFunction random_bandlimited(const ValueSpace& space, double window,
                                   std::size_t samples, std::uint64_t seed, double band,
                                   double envelope_width) {
    SampledFunction f(window, samples, space);
    std::mt19937_64 rng = seeded_rng(seed, 0xBA2DULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::int64_t half = static_cast<std::int64_t>(samples / 2);
    const int c = f.components();
    std::vector<Complex> spec(samples);
    for (int k = 0; k < c; ++k) {
        std::fill(spec.begin(), spec.end(), Complex{0.0, 0.0});
        for (std::int64_t j = -half; j < half; ++j) {
            const double xi = f.frequency(j);
            if (std::abs(xi) > band) continue;
            const double env = std::exp(-(xi * xi) / (envelope_width * envelope_width));
            spec[static_cast<std::size_t>(j + half)] =
                env * Complex(gauss(rng), gauss(rng));
        }
        set_from_spectrum(f, spec, k);
    }
    const double sup = sup_norm(f);
    if (sup > 0.0) {
        const Complex s(1.0 / sup, 0.0);
        for (Complex& z : f.raw()) z *= s;
    }
    return f;
}

SampledFunction random_adapted_function(const WavePacketFactory& factory,
                                        const std::vector<Tile>& tiles,
                                        const ValueSpace& space, std::uint64_t seed,
                                        double band, double mix) {
    if (!(mix >= 0.0 && mix <= 1.0)) throw Error("adapted mix must lie in [0, 1]");
    SampledFunction noise =
        random_bandlimited(space, factory.window(), factory.samples(), seed, band);
    if (mix == 0.0 || tiles.empty()) return noise;

    SampledFunction adapted = factory.zero_function(space);
    std::mt19937_64 rng = seeded_rng(seed, 0xADA7ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int c = adapted.components();
    std::vector<Complex> coeff(static_cast<std::size_t>(c));
    for (const Tile& p : tiles) {
        double norm_sq = 0.0;
        for (Complex& z : coeff) {
            z = Complex(gauss(rng), gauss(rng));
            norm_sq += std::norm(z);
        }
        if (norm_sq > 0.0) {
            const Complex s(1.0 / std::sqrt(norm_sq), 0.0);
            for (Complex& z : coeff) z *= s;
        }
        const auto packet = factory.packet(p);
        accumulate_scaled(adapted, coeff, packet->values, packet->support_begin,
                          packet->support_end);
    }
    const double adapted_sup = sup_norm(adapted);
    if (adapted_sup == 0.0) return noise;

    const Complex sa(mix / adapted_sup, 0.0);
    const Complex sn(1.0 - mix, 0.0);
    for (std::size_t k = 0; k < adapted.raw().size(); ++k)
        adapted.raw()[k] = adapted.raw()[k] * sa + noise.raw()[k] * sn;
    const double sup = sup_norm(adapted);
    if (sup > 0.0) {
        const Complex s(1.0 / sup, 0.0);
        for (Complex& z : adapted.raw()) z *= s;
    }
    return adapted;
}

MeasurableSet random_set(double window, std::size_t cells, std::uint64_t seed,
                         double extent, double fraction, int blocks) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("set.fraction", "set fraction must lie in (0, 1]");
    MeasurableSet s(window, cells);
    std::mt19937_64 rng = seeded_rng(seed, 0x5E7ULL);
    const double h = s.cell_length();
    const std::size_t lo = static_cast<std::size_t>(std::ceil((window - extent) / h));
    const std::size_t hi = static_cast<std::size_t>(std::floor((window + extent) / h));
    const std::size_t span = hi > lo ? hi - lo : 1;
    const std::size_t target = std::max<std::size_t>(
        1, static_cast<std::size_t>(fraction * static_cast<double>(span)));
    const std::size_t block_len = std::max<std::size_t>(1, target / static_cast<std::size_t>(blocks));
    std::size_t placed = 0;
    int guard = 64 * blocks;
    while (placed < target && guard-- > 0) {
        const std::size_t start = lo + rng() % span;
        for (std::size_t i = start; i < std::min(start + block_len, hi); ++i) {
            if (!s.contains(i)) {
                s.set(i);
                ++placed;
            }
        }
    }
    return s;
}

FrequencyChoice random_frequency_choice(const std::vector<Tile>& tiles, double window,
                                        std::size_t cells, std::uint64_t seed,
                                        int block_cells) {
    FrequencyChoice out;
    out.values.assign(cells, 0.0);
    std::mt19937_64 rng = seeded_rng(seed, 0xF2EDULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    (void)window;
    if (tiles.empty()) return out;
    for (std::size_t start = 0; start < cells; start += static_cast<std::size_t>(block_cells)) {
        const Tile& pick = tiles[rng() % tiles.size()];
        const DyadicInterval up = pick.freq_up();
        // A point inside omega_{P,u} with jitter, half the time dead center.
        const double u = (rng() & 1) ? 0.5 : unit(rng);
        const double value = up.left() + u * up.length();
        for (std::size_t i = start; i < std::min(cells, start + static_cast<std::size_t>(block_cells)); ++i)
            out.values[i] = value;
    }
    return out;
}

namespace {

void clip_to_support(SampledFunction& f, const MeasurableSet& support) {
    const int c = f.components();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!support.contains(i)) {
            for (int k = 0; k < c; ++k) f.raw()[i * c + k] = Complex{0.0, 0.0};
            continue;
        }
        const double v = value_norm(f.space(), f.value(i));
        if (v > 1.0) {
            const Complex s(1.0 / v, 0.0);
            for (int k = 0; k < c; ++k) f.raw()[i * c + k] *= s;
        }
    }
}

void project_to_band(SampledFunction& f, double band) {
    const std::int64_t half = static_cast<std::int64_t>(f.size() / 2);
    for (int k = 0; k < f.components(); ++k) {
        std::vector<Complex> spec = spectrum(f, k);
        for (std::int64_t j = -half; j < half; ++j)
            if (std::abs(f.frequency(j)) > band)
                spec[static_cast<std::size_t>(j + half)] = Complex{0.0, 0.0};
        set_from_spectrum(f, spec, k);
    }
}

}  // namespace

double shape_to_support(SampledFunction& f, const MeasurableSet& support, double band) {
    for (int round = 0; round < 2; ++round) {
        clip_to_support(f, support);
        project_to_band(f, band);
    }
    // Final exact clip; record the band leakage it introduces.
    SampledFunction before_clip = f;
    clip_to_support(f, support);
    double leak = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::vector<Complex> diff(static_cast<std::size_t>(f.components()));
        for (int k = 0; k < f.components(); ++k)
            diff[static_cast<std::size_t>(k)] =
                f.raw()[i * f.components() + k] - before_clip.raw()[i * f.components() + k];
        leak = std::max(leak, value_norm(f.space(), diff));
    }
    return leak;
}

SampledFunction random_dual_function(const ValueSpace& primal_space, const MeasurableSet& e,
                                     std::uint64_t seed) {
    const ValueSpace dual = dual_space(primal_space);
    SampledFunction g(e.window(), e.cells(), dual);
    std::mt19937_64 rng = seeded_rng(seed, 0xD0A1ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int c = g.components();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!e.contains(i)) continue;
        for (int k = 0; k < c; ++k)
            g.raw()[i * c + k] = Complex(gauss(rng), gauss(rng));
        const double v = value_norm(dual, g.value(i));
        if (v > 0.0) {
            const Complex s(1.0 / v, 0.0);
            for (int k = 0; k < c; ++k) g.raw()[i * c + k] *= s;
        }
    }
    return g;
}

}  // namespace phaseplane
