#include "phaseplane/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phaseplane {

MeasurableSet::MeasurableSet(double window_halflength, std::size_t cells)
    : window_(window_halflength), mask_(cells, 0) {
    if (!(window_ > 0.0)) throw Error("measurable set requires a positive window");
    if (cells == 0) throw Error("measurable set requires at least one cell");
}

std::size_t MeasurableSet::cell_count() const {
    std::size_t n = 0;
    for (std::uint8_t b : mask_) n += b;
    return n;
}

double MeasurableSet::measure() const {
    return static_cast<double>(cell_count()) * cell_length();
}

namespace {

void require_same_domain(const MeasurableSet& a, const MeasurableSet& b) {
    if (a.window() != b.window() || a.cells() != b.cells())
        throw ResolutionMismatchError("measurable sets live on different grids");
}

}  // namespace

MeasurableSet MeasurableSet::intersect(const MeasurableSet& o) const {
    require_same_domain(*this, o);
    MeasurableSet out(window_, mask_.size());
    for (std::size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] & o.mask_[i];
    return out;
}

MeasurableSet MeasurableSet::unite(const MeasurableSet& o) const {
    require_same_domain(*this, o);
    MeasurableSet out(window_, mask_.size());
    for (std::size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] | o.mask_[i];
    return out;
}

MeasurableSet MeasurableSet::setminus(const MeasurableSet& o) const {
    require_same_domain(*this, o);
    MeasurableSet out(window_, mask_.size());
    for (std::size_t i = 0; i < mask_.size(); ++i)
        out.mask_[i] = static_cast<std::uint8_t>(mask_[i] & ~o.mask_[i] & 1);
    return out;
}

bool MeasurableSet::subset_of(const MeasurableSet& o) const {
    require_same_domain(*this, o);
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i] && !o.mask_[i]) return false;
    return true;
}

SampledFunction partial_sum(const SampledFunction& f, double m, double n) {
    if (!(m < n)) throw Error("partial_sum requires m < n");
    SampledFunction out = f;
    const std::size_t count = f.size();
    const std::int64_t half = static_cast<std::int64_t>(count / 2);
    for (int k = 0; k < f.components(); ++k) {
        std::vector<Complex> spec = spectrum(f, k);
        for (std::int64_t j = -half; j < half; ++j) {
            const double xi = f.frequency(j);
            if (xi < m || xi > n) spec[static_cast<std::size_t>(j + half)] = Complex{0.0, 0.0};
        }
        set_from_spectrum(out, spec, k);
    }
    return out;
}

std::vector<double> maximal_partial_sum(
    const SampledFunction& f, const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw Error("maximal_partial_sum requires a nonempty pair set");
    std::vector<double> out(f.size(), 0.0);
    for (const auto& [m, n] : pairs) {
        const SampledFunction s = partial_sum(f, m, n);
        for (std::size_t i = 0; i < f.size(); ++i)
            out[i] = std::max(out[i], value_norm(f.space(), s.value(i)));
    }
    return out;
}

SampledFunction partial_sum_via_kernel(const SampledFunction& f, double m, double n) {
    if (!(m < n)) throw Error("partial_sum requires m < n");
    const std::size_t count = f.size();
    const double h = f.step();
    auto kernel = [&](double x) -> Complex {
        if (x == 0.0) return Complex(n - m, 0.0);
        const double phase = std::numbers::pi * x * (m + n);
        const double envelope = std::sin(std::numbers::pi * x * (n - m)) / (std::numbers::pi * x);
        return Complex(std::cos(phase), std::sin(phase)) * envelope;
    };
    // Kernel samples over the difference range (-2L, 2L).
    std::vector<Complex> k(2 * count);
    for (std::size_t d = 0; d < 2 * count; ++d) {
        const double x = (static_cast<double>(d) - static_cast<double>(count)) * h;
        k[d] = kernel(x);
    }
    SampledFunction out(f.window(), count, f.space());
    const int c = f.components();
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            const Complex w = k[i + count - j] * h;
            for (int comp = 0; comp < c; ++comp)
                out.raw()[i * c + comp] += f.raw()[j * c + comp] * w;
        }
    }
    return out;
}

PeriodicFunction::PeriodicFunction(std::size_t cells, ValueSpace space)
    : count_(cells), space_(space) {
    if (!fft::is_power_of_two(cells))
        throw Error("periodic sample count must be a power of two");
    space_.validate();
    data_.assign(count_ * static_cast<std::size_t>(components()), Complex{0.0, 0.0});
}

namespace {

// Coefficients of one component: fhat(k) = (1/N) DFT_k of the samples.
std::vector<Complex> periodic_spectrum(const PeriodicFunction& f, int component) {
    const std::size_t n = f.size();
    std::vector<Complex> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = f.raw()[i * f.components() + component];
    fft::transform(buf, false);
    const double inv = 1.0 / static_cast<double>(n);
    for (Complex& z : buf) z *= inv;
    return buf;
}

std::int64_t wrap_bin(std::int64_t k, std::size_t n) {
    const std::int64_t nn = static_cast<std::int64_t>(n);
    return ((k % nn) + nn) % nn;
}

}  // namespace

BanachValue periodic_coefficient(const PeriodicFunction& f, std::int64_t k) {
    const std::int64_t half = static_cast<std::int64_t>(f.size() / 2);
    if (k < -half || k >= half) throw Error("periodic coefficient outside resolvable band");
    BanachValue out = BanachValue::zero(f.space());
    for (int c = 0; c < f.components(); ++c) {
        const std::vector<Complex> coeff = periodic_spectrum(f, c);
        out.data[static_cast<std::size_t>(c)] =
            coeff[static_cast<std::size_t>(wrap_bin(k, f.size()))];
    }
    return out;
}

PeriodicFunction periodic_partial_sum(const PeriodicFunction& f, std::int64_t m,
                                      std::int64_t n) {
    if (m > n) throw Error("periodic partial sum requires m <= n");
    const std::int64_t half = static_cast<std::int64_t>(f.size() / 2);
    if (m < -half || n >= half)
        throw Error("periodic partial sum outside the resolvable band");
    PeriodicFunction out(f.size(), f.space());
    for (int c = 0; c < f.components(); ++c) {
        std::vector<Complex> coeff = periodic_spectrum(f, c);
        std::vector<Complex> kept(f.size(), Complex{0.0, 0.0});
        for (std::int64_t k = m; k <= n; ++k) {
            const std::size_t bin = static_cast<std::size_t>(wrap_bin(k, f.size()));
            kept[bin] = coeff[bin];
        }
        fft::transform(kept, true);
        // inverse already divides by N; coefficients were pre-divided, so undo once
        for (Complex& z : kept) z *= static_cast<double>(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            out.raw()[i * f.components() + c] = kept[i];
    }
    return out;
}

std::vector<double> periodic_maximal(
    const PeriodicFunction& f,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
    if (pairs.empty()) throw Error("periodic_maximal requires a nonempty pair set");
    std::vector<double> out(f.size(), 0.0);
    for (const auto& [m, n] : pairs) {
        const PeriodicFunction s = periodic_partial_sum(f, m, n);
        for (std::size_t i = 0; i < f.size(); ++i)
            out[i] = std::max(out[i], value_norm(f.space(), s.value(i)));
    }
    return out;
}

double periodic_sup_distance(const PeriodicFunction& a, const PeriodicFunction& b) {
    if (a.size() != b.size() || !(a.space() == b.space()))
        throw ResolutionMismatchError("periodic functions live on different grids");
    std::vector<Complex> diff(a.space().components());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (int c = 0; c < a.components(); ++c)
            diff[static_cast<std::size_t>(c)] =
                a.raw()[i * a.components() + c] - b.raw()[i * b.components() + c];
        m = std::max(m, value_norm(a.space(), diff));
    }
    return m;
}

namespace {

// Shared accumulation core: tiles in canonical order, one fused
// coefficient-times-packet pass per tile, optional frequency gate.
SampledFunction accumulate_tiles(const WavePacketFactory& factory, const SampledFunction& f,
                                 const FrequencyChoice* choice, std::vector<Tile> tiles,
                                 const std::vector<Complex>* unimodular = nullptr) {
    SampledFunction out(f.window(), f.size(), f.space());
    std::sort(tiles.begin(), tiles.end(), tile_less);
    const int c = f.components();
    std::vector<Complex> coeff(static_cast<std::size_t>(c));
    for (std::size_t ti = 0; ti < tiles.size(); ++ti) {
        const auto packet = factory.packet(tiles[ti]);
        const BanachValue a = pair(f, packet->values);
        for (int k = 0; k < c; ++k) coeff[static_cast<std::size_t>(k)] = a.data[static_cast<std::size_t>(k)];
        if (unimodular) {
            const Complex eps = (*unimodular)[ti];
            if (std::abs(std::abs(eps) - 1.0) > 1e-12)
                throw Error("signed tree operator requires unimodular constants");
            for (Complex& z : coeff) z *= eps;
        }
        if (choice) {
            const DyadicInterval up = tiles[ti].freq_up();
            const double lo = up.left(), hi = up.right();
            for (std::size_t i = packet->support_begin; i < packet->support_end; ++i) {
                const double nx = choice->values[i];
                if (nx < lo || nx >= hi) continue;
                const Complex w = packet->values.scalar_at(i);
                for (int k = 0; k < c; ++k) out.raw()[i * c + k] += coeff[static_cast<std::size_t>(k)] * w;
            }
        } else {
            accumulate_scaled(out, coeff, packet->values, packet->support_begin,
                              packet->support_end);
        }
    }
    return out;
}

}  // namespace

SampledFunction model_carleson(const WavePacketFactory& factory, const SampledFunction& f,
                               const FrequencyChoice& choice,
                               const std::vector<Tile>& tiles) {
    if (choice.values.size() != f.size())
        throw ResolutionMismatchError("frequency choice does not match the sample grid");
    return accumulate_tiles(factory, f, &choice, tiles);
}

SampledFunction model_carleson_grouped(const WavePacketFactory& factory,
                                       const SampledFunction& f,
                                       const FrequencyChoice& choice,
                                       const std::vector<std::vector<Tile>>& parts) {
    std::vector<Tile> flat;
    for (const auto& part : parts) flat.insert(flat.end(), part.begin(), part.end());
    return model_carleson(factory, f, choice, flat);
}

SampledFunction tree_operator(const WavePacketFactory& factory, const Tree& tree,
                              const SampledFunction& f) {
    return accumulate_tiles(factory, f, nullptr, tree.tiles());
}

SampledFunction signed_tree_operator(const WavePacketFactory& factory, const Tree& tree,
                                     const SampledFunction& f,
                                     const std::vector<Complex>& unimodular) {
    if (unimodular.size() != tree.size())
        throw Error("signed tree operator: one unimodular constant per member");
    // tree.tiles() is already canonical, so constants stay aligned.
    return accumulate_tiles(factory, f, nullptr, tree.tiles(), &unimodular);
}

namespace {

std::vector<double> maximal_from_norms(const std::vector<double>& norms, int refinement) {
    if (refinement < 1) throw Error("maximal refinement must be >= 1");
    const std::size_t n = norms.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + norms[i];
    std::vector<double> out(n, 0.0);
    for (std::size_t w = 1; w <= n; w <<= 1) {
        const std::size_t stride = std::max<std::size_t>(1, w / static_cast<std::size_t>(refinement));
        for (std::size_t s = 0; s + w <= n; s += stride) {
            const double avg = (prefix[s + w] - prefix[s]) / static_cast<double>(w);
            for (std::size_t i = s; i < s + w; ++i) out[i] = std::max(out[i], avg);
        }
    }
    return out;
}

}  // namespace

std::vector<double> hardy_littlewood(const SampledFunction& f, int refinement) {
    std::vector<double> norms(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) norms[i] = value_norm(f.space(), f.value(i));
    return maximal_from_norms(norms, refinement);
}

std::vector<double> hardy_littlewood_indicator(const MeasurableSet& s, int refinement) {
    std::vector<double> norms(s.cells());
    for (std::size_t i = 0; i < s.cells(); ++i) norms[i] = s.contains(i) ? 1.0 : 0.0;
    return maximal_from_norms(norms, refinement);
}

}  // namespace phaseplane
