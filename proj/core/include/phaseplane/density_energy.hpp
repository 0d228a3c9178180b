#pragma once

#include <map>
#include <vector>

#include "phaseplane/carleson.hpp"
#include "phaseplane/dyadic.hpp"
#include "phaseplane/sampled.hpp"
#include "phaseplane/wavelet.hpp"
#include "phaseplane/weight.hpp"

namespace phaseplane {

// Fixed data of the density functional: the set E and the frequency choice.
struct DensityContext {
    MeasurableSet set;        // E
    FrequencyChoice choice;   // N(x), one value per cell of E's grid
};

// Fixed data of the energy functional: the input function and the exponent.
struct EnergyContext {
    SampledFunction f;
    double q = 2.0;
};

// density(P) = sup over P in the collection, P' >= P in the universe, of the
// quadrature mass of v_{I_P'} over E_{P'} = E intersect {N in omega_P'}.
// Caches per-tile masses; a fixed context may be reused across many calls.
class DensityEvaluator {
public:
    DensityEvaluator(DensityContext ctx, TileUniverse universe);

    double tile_mass(const Tile& dominator) const;
    double tile_density(const Tile& p) const;
    double density(const std::vector<Tile>& tiles) const;

    const DensityContext& context() const { return ctx_; }
    const TileUniverse& universe() const { return universe_; }
    double set_measure() const { return ctx_.set.measure(); }

private:
    using TileKey = std::tuple<std::int32_t, std::int64_t, std::int64_t>;
    static TileKey key_of(const Tile& t) {
        return {t.time.scale, t.time.index, t.freq.index};
    }
    DensityContext ctx_;
    TileUniverse universe_;
    std::vector<std::size_t> member_cells_;   // cells of E
    mutable std::map<TileKey, double> mass_cache_;
    mutable std::map<TileKey, double> density_cache_;
};

// Complete tree with a candidate top: all collection tiles below the top.
struct CandidateTree {
    Tile top;
    std::vector<Tile> members;
    std::vector<Tile> up_members;
    double delta = 0.0;
};

// energy(P) = sup of Delta over complete trees whose tops run over the
// collection members and their universe dominators. Delta of a tree is the
// |I_T|-normalized L^q norm of the up-portion tile sum.
class EnergyEvaluator {
public:
    EnergyEvaluator(const WavePacketFactory& factory, EnergyContext ctx,
                    TileUniverse universe);

    const BanachValue& coefficient(const Tile& p) const;
    double tree_delta(const Tree& tree) const;
    std::vector<CandidateTree> complete_trees(const std::vector<Tile>& tiles) const;
    double energy(const std::vector<Tile>& tiles) const;

    const EnergyContext& context() const { return ctx_; }
    const TileUniverse& universe() const { return universe_; }
    const WavePacketFactory& factory() const { return *factory_; }

private:
    using TileKey = std::tuple<std::int32_t, std::int64_t, std::int64_t>;
    static TileKey key_of(const Tile& t) {
        return {t.time.scale, t.time.index, t.freq.index};
    }
    double delta_of(const std::vector<Tile>& up_members,
                    const DyadicInterval& top_interval) const;

    const WavePacketFactory* factory_;
    EnergyContext ctx_;
    TileUniverse universe_;
    mutable std::map<TileKey, BanachValue> coeff_cache_;
    mutable std::map<std::vector<std::int64_t>, double> delta_cache_;
};

// Exhaustive reference for tiny collections: sup of Delta over every subset
// of every complete tree (2^|T| per top); compares the complete-tree sup
// against the unrestricted one.
struct EnergyGap {
    double complete_tree_energy = 0.0;
    double exhaustive_energy = 0.0;
};
EnergyGap exhaustive_energy_gap(const EnergyEvaluator& eval, const std::vector<Tile>& tiles,
                                std::size_t max_tiles = 10);

struct DensitySplitResult {
    std::vector<Tile> sparse;
    std::vector<Tree> trees;
    double input_density = 0.0;
    double sparse_density = 0.0;        // recomputed
    double top_interval_sum = 0.0;      // sum_j |I_{T_j}|
    double empirical_constant = 0.0;    // sum * density / |E|
};

// Splits off trees rooted at maximal heavy witnesses so that the remainder
// has at most half the input density (recomputed, not assumed).
DensitySplitResult density_split(const DensityEvaluator& eval, const std::vector<Tile>& tiles);

struct EnergySplitResult {
    std::vector<Tile> small;
    std::vector<Tree> trees;            // selected complete trees
    std::vector<Tree> up_trees;         // their up-portions (the selected family)
    double input_energy = 0.0;
    double small_energy = 0.0;          // recomputed
    double top_interval_sum = 0.0;
    double empirical_constant = 0.0;    // sum * energy^{q/alpha} / |F|
};

// Iteratively removes maximal complete trees with Delta above half the input
// energy, minimal top frequency center first (ties: leftmost, then shortest
// top interval), until the remainder's energy is at most half the input.
EnergySplitResult energy_split(const EnergyEvaluator& eval, const std::vector<Tile>& tiles,
                               double alpha, double support_measure);

struct DecompositionLevel {
    int level = 0;
    std::vector<Tree> trees;
    double interval_sum = 0.0;
    double max_density = 0.0;           // recomputed over the level's trees
    double max_energy = 0.0;
    double empirical_constant = 0.0;    // interval_sum / 2^level
};

struct TileDecomposition {
    std::vector<DecompositionLevel> levels;   // ascending level
    std::vector<Tile> residual;
    std::size_t input_size = 0;
    int demotions = 0;
    double residual_density = 0.0;
    double residual_energy = 0.0;

    std::size_t tree_tile_count() const;
};

// Runs the density and energy splits in tandem, producing levels n with
//   density(T_{n,j}) <= |E| 2^{-n},   energy(T_{n,j}) <= |F|^{alpha/q} 2^{-n alpha/q}
// (both recomputed per tree; a tree failing its iteration level is demoted
// to the largest level whose bounds it meets). The residual has zero density
// and energy. Throws DecompositionStallError when the iteration guard
// (#tiles + scale range) is exceeded.
TileDecomposition full_decomposition(const DensityEvaluator& density_eval,
                                     const EnergyEvaluator& energy_eval,
                                     const std::vector<Tile>& tiles, double alpha,
                                     double support_measure);

// Amplitude validation |f| <= 1_S: value norms at most 1 + tol on S and at
// most tol off S. Throws Error naming the first offending cell.
void validate_amplitude(const SampledFunction& f, const MeasurableSet& s,
                        double tol = 1e-9);

// Per-tile pairing terms |<a_P, b_P>| with a_P = <f, phi_P> and
// b_P = <g 1_{N in omega_{P_u}}, phi_P>, in canonical tile order.
std::vector<double> pairing_terms(const WavePacketFactory& factory,
                                  const SampledFunction& f, const SampledFunction& g,
                                  const FrequencyChoice& choice, std::vector<Tile> tiles);

struct TreeLemmaCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double tree_density = 0.0;
    double tree_energy = 0.0;
};

// Both sides of the tree estimate: lhs the pairing sum over the tree, rhs
// density * energy * |I_T|. Validates the amplitude preconditions.
TreeLemmaCheck tree_lemma_check(const WavePacketFactory& factory, const Tree& tree,
                                const SampledFunction& f, const MeasurableSet& F,
                                const SampledFunction& g, const DensityContext& dctx,
                                double q, const TileUniverse& universe);

}  // namespace phaseplane
