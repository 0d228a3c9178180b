#include "phaseplane/density_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace phaseplane {

namespace {

double position_of_cell(const MeasurableSet& s, std::size_t i) {
    return -s.window() + static_cast<double>(i) * s.cell_length();
}

}  // namespace

DensityEvaluator::DensityEvaluator(DensityContext ctx, TileUniverse universe)
    : ctx_(std::move(ctx)), universe_(universe) {
    if (ctx_.choice.values.size() != ctx_.set.cells())
        throw ResolutionMismatchError("frequency choice does not match the set grid");
    for (std::size_t i = 0; i < ctx_.set.cells(); ++i)
        if (ctx_.set.contains(i)) member_cells_.push_back(i);
}

double DensityEvaluator::tile_mass(const Tile& dominator) const {
    const TileKey key = key_of(dominator);
    auto it = mass_cache_.find(key);
    if (it != mass_cache_.end()) return it->second;

    const double lo = dominator.freq.left();
    const double hi = dominator.freq.right();
    const double h = ctx_.set.cell_length();
    double mass = 0.0;
    for (std::size_t i : member_cells_) {
        const double nx = ctx_.choice.values[i];
        if (nx < lo || nx >= hi) continue;
        mass += weight_v(dominator.time, position_of_cell(ctx_.set, i)) * h;
    }
    mass_cache_.emplace(key, mass);
    return mass;
}

double DensityEvaluator::tile_density(const Tile& p) const {
    const TileKey key = key_of(p);
    auto it = density_cache_.find(key);
    if (it != density_cache_.end()) return it->second;
    double best = 0.0;
    for (const Tile& dom : dominating_tiles(p, universe_))
        best = std::max(best, tile_mass(dom));
    density_cache_.emplace(key, best);
    return best;
}

double DensityEvaluator::density(const std::vector<Tile>& tiles) const {
    double best = 0.0;
    for (const Tile& p : tiles) best = std::max(best, tile_density(p));
    return best;
}

EnergyEvaluator::EnergyEvaluator(const WavePacketFactory& factory, EnergyContext ctx,
                                 TileUniverse universe)
    : factory_(&factory), ctx_(std::move(ctx)), universe_(universe) {
    if (!(ctx_.q > 1.0) || std::isinf(ctx_.q))
        throw ConfigError("q", "energy exponent q must lie in (1, inf)");
    if (ctx_.f.window() != factory.window() || ctx_.f.size() != factory.samples())
        throw ResolutionMismatchError("energy context does not match the packet grid");
}

const BanachValue& EnergyEvaluator::coefficient(const Tile& p) const {
    const TileKey key = key_of(p);
    auto it = coeff_cache_.find(key);
    if (it != coeff_cache_.end()) return it->second;
    const auto packet = factory_->packet(p);
    auto [ins, ok] = coeff_cache_.emplace(key, pair(ctx_.f, packet->values));
    return ins->second;
}

double EnergyEvaluator::delta_of(const std::vector<Tile>& up_members,
                                 const DyadicInterval& top_interval) const {
    if (up_members.empty()) return 0.0;

    std::vector<std::int64_t> cache_key;
    cache_key.reserve(up_members.size() * 3 + 1);
    for (const Tile& p : up_members) {
        cache_key.push_back(p.time.scale);
        cache_key.push_back(p.time.index);
        cache_key.push_back(p.freq.index);
    }
    cache_key.push_back(top_interval.scale);
    auto it = delta_cache_.find(cache_key);
    if (it != delta_cache_.end()) return it->second;

    SampledFunction sum(ctx_.f.window(), ctx_.f.size(), ctx_.f.space());
    for (const Tile& p : up_members) {
        const auto packet = factory_->packet(p);
        accumulate_scaled(sum, coefficient(p).data, packet->values, packet->support_begin,
                          packet->support_end);
    }
    const int c = sum.components();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < sum.size(); ++i) {
        bool zero = true;
        for (int k = 0; k < c && zero; ++k)
            zero = sum.raw()[i * c + k] == Complex{0.0, 0.0};
        if (zero) continue;
        const double v = value_norm(sum.space(), sum.value(i));
        acc += std::pow(static_cast<long double>(v), static_cast<long double>(ctx_.q));
    }
    acc *= static_cast<long double>(sum.step());
    acc /= static_cast<long double>(top_interval.length());
    const double delta =
        static_cast<double>(std::pow(acc, 1.0L / static_cast<long double>(ctx_.q)));
    delta_cache_.emplace(std::move(cache_key), delta);
    return delta;
}

double EnergyEvaluator::tree_delta(const Tree& tree) const {
    if (tree.empty()) throw Error("tree energy of an empty tree");
    return delta_of(tree.up_portion(), minimal_top_interval(tree));
}

std::vector<CandidateTree> EnergyEvaluator::complete_trees(
    const std::vector<Tile>& tiles) const {
    std::vector<Tile> tops;
    for (const Tile& p : tiles) {
        const std::vector<Tile> doms = dominating_tiles(p, universe_);
        tops.insert(tops.end(), doms.begin(), doms.end());
        if (!universe_.admits(p)) tops.push_back(p);
    }
    std::sort(tops.begin(), tops.end(), tile_less);
    tops.erase(std::unique(tops.begin(), tops.end()), tops.end());

    std::vector<CandidateTree> out;
    for (const Tile& top : tops) {
        CandidateTree cand;
        cand.top = top;
        for (const Tile& p : tiles) {
            if (!tile_le(p, top)) continue;
            cand.members.push_back(p);
            if (tile_le_u(p, top)) cand.up_members.push_back(p);
        }
        if (cand.members.empty()) continue;
        DyadicInterval join = cand.members.front().time;
        for (const Tile& p : cand.members) join = dyadic_join(join, p.time);
        cand.delta = delta_of(cand.up_members, join);
        out.push_back(std::move(cand));
    }
    return out;
}

double EnergyEvaluator::energy(const std::vector<Tile>& tiles) const {
    double best = 0.0;
    for (const CandidateTree& cand : complete_trees(tiles))
        best = std::max(best, cand.delta);
    return best;
}

EnergyGap exhaustive_energy_gap(const EnergyEvaluator& eval, const std::vector<Tile>& tiles,
                                std::size_t max_tiles) {
    if (tiles.size() > max_tiles)
        throw CapacityError("exhaustive energy enumeration capped at " +
                            std::to_string(max_tiles) + " tiles");
    EnergyGap gap;
    gap.complete_tree_energy = eval.energy(tiles);
    for (const CandidateTree& cand : eval.complete_trees(tiles)) {
        const std::size_t m = cand.members.size();
        for (std::size_t subset = 1; subset < (std::size_t{1} << m); ++subset) {
            std::vector<Tile> part;
            for (std::size_t b = 0; b < m; ++b)
                if (subset & (std::size_t{1} << b)) part.push_back(cand.members[b]);
            const Tree t(part, cand.top, TreeKind::General);
            gap.exhaustive_energy = std::max(gap.exhaustive_energy, eval.tree_delta(t));
        }
    }
    return gap;
}

DensitySplitResult density_split(const DensityEvaluator& eval,
                                 const std::vector<Tile>& tiles) {
    DensitySplitResult out;
    out.input_density = eval.density(tiles);
    if (out.input_density == 0.0) {
        out.sparse = tiles;
        std::sort(out.sparse.begin(), out.sparse.end(), tile_less);
        return out;
    }
    const double threshold = out.input_density / 2.0;

    // Heavy tiles and their witnesses: dominators with mass above threshold.
    std::vector<Tile> heavy;
    std::vector<Tile> witnesses;
    for (const Tile& p : tiles) {
        bool is_heavy = false;
        for (const Tile& dom : dominating_tiles(p, eval.universe())) {
            if (eval.tile_mass(dom) > threshold) {
                is_heavy = true;
                witnesses.push_back(dom);
            }
        }
        if (is_heavy)
            heavy.push_back(p);
        else
            out.sparse.push_back(p);
    }
    std::sort(witnesses.begin(), witnesses.end(), tile_less);
    witnesses.erase(std::unique(witnesses.begin(), witnesses.end()), witnesses.end());

    std::vector<Tile> maximal;
    for (const Tile& w : witnesses) {
        bool is_max = true;
        for (const Tile& other : witnesses)
            if (!(w == other) && tile_le(w, other)) {
                is_max = false;
                break;
            }
        if (is_max) maximal.push_back(w);
    }

    std::vector<std::vector<Tile>> groups(maximal.size());
    for (const Tile& p : heavy) {
        for (std::size_t j = 0; j < maximal.size(); ++j) {
            if (tile_le(p, maximal[j])) {
                groups[j].push_back(p);
                break;
            }
        }
    }
    for (std::size_t j = 0; j < maximal.size(); ++j) {
        if (groups[j].empty()) continue;
        Tree t(groups[j], maximal[j], TreeKind::General);
        out.top_interval_sum += minimal_top_interval(t).length();
        out.trees.push_back(std::move(t));
    }

    std::sort(out.sparse.begin(), out.sparse.end(), tile_less);
    out.sparse_density = eval.density(out.sparse);
    const double e_measure = eval.set_measure();
    out.empirical_constant =
        e_measure > 0.0 ? out.top_interval_sum * out.input_density / e_measure : 0.0;
    return out;
}

namespace {

// Selection order for energy trees: minimal top frequency center, then
// leftmost minimal top interval, then shortest.
bool select_before(const CandidateTree& a, const DyadicInterval& a_join,
                   const CandidateTree& b, const DyadicInterval& b_join) {
    const int c = compare_centers(a.top.freq, b.top.freq);
    if (c != 0) return c < 0;
    const int l = compare_left_endpoints(a_join, b_join);
    if (l != 0) return l < 0;
    if (a_join.scale != b_join.scale) return a_join.scale < b_join.scale;
    return tile_less(a.top, b.top);
}

}  // namespace

EnergySplitResult energy_split(const EnergyEvaluator& eval, const std::vector<Tile>& tiles,
                               double alpha, double support_measure) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha", "energy split requires alpha in (0, 1)");
    EnergySplitResult out;
    out.input_energy = eval.energy(tiles);
    std::vector<Tile> remaining = tiles;
    std::sort(remaining.begin(), remaining.end(), tile_less);
    if (out.input_energy == 0.0) {
        out.small = std::move(remaining);
        return out;
    }
    const double threshold = out.input_energy / 2.0;

    while (true) {
        std::vector<CandidateTree> cands = eval.complete_trees(remaining);
        std::erase_if(cands, [&](const CandidateTree& c) { return !(c.delta > threshold); });
        if (cands.empty()) break;

        // Keep only member-maximal candidates.
        std::vector<bool> drop(cands.size(), false);
        for (std::size_t i = 0; i < cands.size(); ++i) {
            for (std::size_t j = 0; j < cands.size() && !drop[i]; ++j) {
                if (i == j || drop[j]) continue;
                if (cands[i].members.size() < cands[j].members.size() &&
                    std::includes(cands[j].members.begin(), cands[j].members.end(),
                                  cands[i].members.begin(), cands[i].members.end(),
                                  tile_less))
                    drop[i] = true;
            }
        }

        std::size_t pick = cands.size();
        DyadicInterval pick_join;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (drop[i]) continue;
            DyadicInterval join = cands[i].members.front().time;
            for (const Tile& p : cands[i].members) join = dyadic_join(join, p.time);
            if (pick == cands.size()) {
                pick = i;
                pick_join = join;
            } else if (select_before(cands[i], join, cands[pick], pick_join)) {
                pick = i;
                pick_join = join;
            }
        }
        if (pick == cands.size()) break;

        const CandidateTree& chosen = cands[pick];
        Tree tree(chosen.members, chosen.top, TreeKind::General);
        out.top_interval_sum += minimal_top_interval(tree).length();
        out.up_trees.emplace_back(chosen.up_members, chosen.top, TreeKind::Up);
        out.trees.push_back(std::move(tree));

        std::vector<Tile> next;
        next.reserve(remaining.size());
        std::set_difference(remaining.begin(), remaining.end(), chosen.members.begin(),
                            chosen.members.end(), std::back_inserter(next), tile_less);
        remaining = std::move(next);
        if (remaining.empty()) break;
    }

    out.small = std::move(remaining);
    out.small_energy = eval.energy(out.small);
    out.empirical_constant =
        support_measure > 0.0
            ? out.top_interval_sum *
                  std::pow(out.input_energy, eval.context().q / alpha) / support_measure
            : 0.0;
    return out;
}

std::size_t TileDecomposition::tree_tile_count() const {
    std::size_t n = residual.size();
    for (const DecompositionLevel& lvl : levels)
        for (const Tree& t : lvl.trees) n += t.size();
    return n;
}

namespace {

double density_bound(double e_measure, int n) { return std::ldexp(e_measure, -n); }

double energy_bound(double f_measure, int n, double alpha, double q) {
    const double base = std::ldexp(f_measure, -n);   // |F| 2^{-n}
    if (base <= 0.0) return 0.0;
    return std::pow(base, alpha / q);
}

}  // namespace

TileDecomposition full_decomposition(const DensityEvaluator& density_eval,
                                     const EnergyEvaluator& energy_eval,
                                     const std::vector<Tile>& tiles, double alpha,
                                     double support_measure) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha", "decomposition requires alpha in (0, 1)");
    const double q = energy_eval.context().q;
    const double e_measure = density_eval.set_measure();

    TileDecomposition out;
    out.input_size = tiles.size();
    if (tiles.empty()) return out;

    std::vector<Tile> remaining = tiles;
    std::sort(remaining.begin(), remaining.end(), tile_less);

    double d = density_eval.density(remaining);
    double e = energy_eval.energy(remaining);

    // Starting level: the largest n whose bounds hold for the full collection.
    int n = 0;
    if (d > 0.0 || e > 0.0) {
        n = std::numeric_limits<int>::max();
        if (d > 0.0) n = std::min(n, static_cast<int>(std::floor(std::log2(e_measure / d))));
        if (e > 0.0)
            n = std::min(n, static_cast<int>(std::floor(
                                 std::log2(support_measure) - (q / alpha) * std::log2(e))));
        if (n == std::numeric_limits<int>::max()) n = 0;
        while (n > -2000 &&
               (d > density_bound(e_measure, n) ||
                e > energy_bound(support_measure, n, alpha, q)))
            --n;
    }

    std::map<int, std::vector<Tree>> levels;
    const long guard = static_cast<long>(tiles.size()) +
                       (density_eval.universe().scale_max -
                        density_eval.universe().scale_min + 1);
    long iterations = 0;

    while (!remaining.empty() && (d > 0.0 || e > 0.0)) {
        if (++iterations > guard) {
            std::ostringstream os;
            os << "decomposition stalled after " << iterations - 1
               << " iterations with " << remaining.size()
               << " tiles left (density=" << d << ", energy=" << e << ")";
            throw DecompositionStallError(os.str());
        }

        // Advance the level until one of the next thresholds triggers.
        while (d <= density_bound(e_measure, n + 1) &&
               e <= energy_bound(support_measure, n + 1, alpha, q)) {
            ++n;
            if (n > 4000) throw DecompositionStallError("decomposition level ran away");
        }

        if (d > density_bound(e_measure, n + 1)) {
            DensitySplitResult split = density_split(density_eval, remaining);
            for (Tree& t : split.trees) levels[n].push_back(std::move(t));
            remaining = std::move(split.sparse);
            d = split.sparse_density;
            e = energy_eval.energy(remaining);
        }
        if (!remaining.empty() && e > energy_bound(support_measure, n + 1, alpha, q)) {
            EnergySplitResult split =
                energy_split(energy_eval, remaining, alpha, support_measure);
            for (Tree& t : split.trees) levels[n].push_back(std::move(t));
            remaining = std::move(split.small);
            e = split.small_energy;
            d = density_eval.density(remaining);
        }
        ++n;
    }

    out.residual = std::move(remaining);
    out.residual_density = density_eval.density(out.residual);
    out.residual_energy = energy_eval.energy(out.residual);

    // Verify each tree against its level; demote when the recomputed
    // functionals need a looser (smaller) level.
    std::map<int, std::vector<Tree>> final_levels;
    for (auto& [level_n, trees] : levels) {
        for (Tree& t : trees) {
            const double td = density_eval.density(t.tiles());
            const double te = energy_eval.energy(t.tiles());
            int assigned = level_n;
            while (assigned > -2000 &&
                   (td > density_bound(e_measure, assigned) ||
                    te > energy_bound(support_measure, assigned, alpha, q))) {
                --assigned;
                ++out.demotions;
            }
            final_levels[assigned].push_back(std::move(t));
        }
    }

    for (auto& [level_n, trees] : final_levels) {
        DecompositionLevel lvl;
        lvl.level = level_n;
        for (const Tree& t : trees) {
            lvl.interval_sum += minimal_top_interval(t).length();
            lvl.max_density = std::max(lvl.max_density, density_eval.density(t.tiles()));
            lvl.max_energy = std::max(lvl.max_energy, energy_eval.energy(t.tiles()));
        }
        lvl.empirical_constant = lvl.interval_sum * std::ldexp(1.0, -level_n);
        lvl.trees = std::move(trees);
        out.levels.push_back(std::move(lvl));
    }
    return out;
}

void validate_amplitude(const SampledFunction& f, const MeasurableSet& s, double tol) {
    if (f.size() != s.cells() || f.window() != s.window())
        throw ResolutionMismatchError("amplitude validation: grid mismatch");
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = value_norm(f.space(), f.value(i));
        const double limit = s.contains(i) ? 1.0 + tol : tol;
        if (v > limit) {
            std::ostringstream os;
            os << "amplitude precondition violated at cell " << i << ": |f| = " << v
               << (s.contains(i) ? " > 1" : " off the support");
            throw Error(os.str());
        }
    }
}

std::vector<double> pairing_terms(const WavePacketFactory& factory,
                                  const SampledFunction& f, const SampledFunction& g,
                                  const FrequencyChoice& choice, std::vector<Tile> tiles) {
    if (!f.compatible_with(g))
        throw ResolutionMismatchError("pairing: functions on different grids");
    if (choice.values.size() != f.size())
        throw ResolutionMismatchError("pairing: frequency choice grid mismatch");
    std::sort(tiles.begin(), tiles.end(), tile_less);

    std::vector<double> terms;
    terms.reserve(tiles.size());
    const int cf = f.components();
    const int cg = g.components();
    for (const Tile& p : tiles) {
        const auto packet = factory.packet(p);
        const BanachValue a = pair(f, packet->values);
        // b_P = <g 1_{N in omega_{P_u}}, phi_P>
        const DyadicInterval up = p.freq_up();
        const double lo = up.left(), hi = up.right();
        std::vector<Complex> b(static_cast<std::size_t>(cg), Complex{0.0, 0.0});
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double nx = choice.values[i];
            if (nx < lo || nx >= hi) continue;
            const Complex w = std::conj(packet->values.scalar_at(i));
            for (int k = 0; k < cg; ++k) b[static_cast<std::size_t>(k)] += g.raw()[i * cg + k] * w;
        }
        for (Complex& z : b) z *= g.step();
        if (cf != cg) throw Error("pairing: value dimensions differ");
        terms.push_back(std::abs(value_dual_pair(a.data, b)));
    }
    return terms;
}

TreeLemmaCheck tree_lemma_check(const WavePacketFactory& factory, const Tree& tree,
                                const SampledFunction& f, const MeasurableSet& F,
                                const SampledFunction& g, const DensityContext& dctx,
                                double q, const TileUniverse& universe) {
    validate_amplitude(f, F);
    validate_amplitude(g, dctx.set);

    TreeLemmaCheck out;
    for (double term : pairing_terms(factory, f, g, dctx.choice, tree.tiles()))
        out.lhs += term;

    DensityEvaluator deval(dctx, universe);
    EnergyEvaluator eeval(factory, EnergyContext{f, q}, universe);
    out.tree_density = deval.density(tree.tiles());
    out.tree_energy = eeval.energy(tree.tiles());
    out.rhs = out.tree_density * out.tree_energy *
              (tree.empty() ? 0.0 : minimal_top_interval(tree).length());
    return out;
}

}  // namespace phaseplane
