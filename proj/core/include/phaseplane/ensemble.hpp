#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "phaseplane/carleson.hpp"
#include "phaseplane/density_energy.hpp"
#include "phaseplane/dyadic.hpp"

namespace phaseplane {

// Deterministic stream seeding: one generator per (base seed, stream id).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);
std::mt19937_64 seeded_rng(std::uint64_t base, std::uint64_t stream);

// Geometry of a seeded ensemble: a forest of up-trees whose union satisfies
// the tree-collection disjointness property by construction and eviction.
struct EnsembleSpec {
    std::uint64_t seed = 1;
    int tree_count = 2;
    int tiles_per_tree = 5;
    std::int32_t member_scale_min = -1;
    std::int32_t member_scale_max = 2;
    std::int32_t top_scale_min = 4;
    std::int32_t top_scale_max = 6;
    double time_halfwidth = 128.0;     // universe window
    double top_freq_halfwidth = 1.0;   // |c(omega_top)| bound

    void validate(double sampling_window, std::size_t samples) const;
};

struct GeneratedForest {
    DyadicGrid grid;
    TileUniverse universe;
    std::vector<Tree> trees;           // up-trees
    int evictions = 0;
    int emptied_trees = 0;

    std::vector<Tile> all_tiles() const;
    TileCollection collection() const;
};

// Samples up-tree tops with per-stratum disjoint time supports, populates
// complete up-trees on the 20-separated time sublattices, then greedily
// evicts tiles violating the disjointness property (deterministic scan
// order) until the checker passes. Throws CapacityError when the spec does
// not fit the window.
GeneratedForest random_disjprop_collection(const EnsembleSpec& spec, const DyadicGrid& grid);

// Random band-limited function: Gaussian spectral envelope times seeded
// coefficients on [-band, band], normalized to sup norm one. Components are
// filled in flat order, so value kinds with equal component counts consume
// identical randomness.
SampledFunction random_bandlimited(const ValueSpace& space, double window,
                                   std::size_t samples, std::uint64_t seed, double band,
                                   double envelope_width = 2.0);

// Test input adapted to a tile family: `mix` parts a random-coefficient
// packet sum (which nearly extremizes the quasi-orthogonality bounds) plus
// 1 - mix parts band-limited noise; sup norm one. mix = 0 is pure noise.
SampledFunction random_adapted_function(const WavePacketFactory& factory,
                                        const std::vector<Tile>& tiles,
                                        const ValueSpace& space, std::uint64_t seed,
                                        double band, double mix);

// Random measurable set: a union of grid-aligned blocks covering roughly the
// requested fraction of [-extent, extent].
MeasurableSet random_set(double window, std::size_t cells, std::uint64_t seed,
                         double extent, double fraction, int blocks);

// Piecewise-constant frequency choice taking values near the upper-half
// centers of the given tiles (with jitter), constant on blocks of cells.
FrequencyChoice random_frequency_choice(const std::vector<Tile>& tiles, double window,
                                        std::size_t cells, std::uint64_t seed,
                                        int block_cells = 32);

// Shapes a function to satisfy |f| <= 1_F: two rounds of clip-to-support
// followed by band re-projection, then a final exact clip. Returns the
// band-leakage sup recorded after the final clip.
double shape_to_support(SampledFunction& f, const MeasurableSet& support, double band);

// Random dual-space function bounded by 1_E (dual Schatten norm for matrix
// kinds), exactly zero off E.
SampledFunction random_dual_function(const ValueSpace& primal_space, const MeasurableSet& e,
                                     std::uint64_t seed);

}  // namespace phaseplane
