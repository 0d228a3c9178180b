#include "phaseplane/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "phaseplane/weight.hpp"

namespace phaseplane {

double weight_v(const DyadicInterval& time_interval, double x) {
    const double len = time_interval.length();
    const double u = std::abs(x - time_interval.center()) / len;
    return std::pow(1.0 + u, -10.0) / len;
}

double weight_v_integral(const DyadicInterval& time_interval, double a, double b) {
    if (b <= a) return 0.0;
    const double c = time_interval.center();
    const double len = time_interval.length();
    // One-sided antiderivative for x >= c: F(x) = -(1/9)(1 + (x-c)/|I|)^{-9}.
    auto upper = [&](double lo, double hi) {
        const double ulo = (lo - c) / len, uhi = (hi - c) / len;
        return (std::pow(1.0 + ulo, -9.0) - std::pow(1.0 + uhi, -9.0)) / 9.0;
    };
    double total = 0.0;
    if (b > c) total += upper(std::max(a, c), b);
    if (a < c) total += upper(2.0 * c - std::min(b, c), 2.0 * c - a);   // mirror
    return total;
}

double wavelet_bump(double xi) {
    const double u = 20.0 * xi;
    const double s = 1.0 - u * u;
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s);
}

double wavelet_spectrum_profile(double xi) {
    const double b = wavelet_bump(xi);
    if (b == 0.0) return 0.0;
    const long long n0 = std::llround(-20.0 * xi);
    double s = 0.0;
    for (long long n = n0 - 1; n <= n0 + 1; ++n) {
        const double t = wavelet_bump(xi + static_cast<double>(n) * kSpectralStep);
        s += t * t;
    }
    return b / std::sqrt(s);
}

MotherWavelet build_mother_wavelet(std::size_t samples, double window) {
    if (window < 40.0)
        throw ConfigError("window", "wavelet window too small: need L >= 40 so the "
                                     "+-20 translates fit");
    const double lattice_bins = window / 10.0;   // 1/20 divided by the step 1/(2L)
    if (std::abs(lattice_bins - std::round(lattice_bins)) > 1e-9)
        throw ConfigError("window", "wavelet window must be a multiple of 10 so the "
                                     "1/20 frequency lattice lands on the grid");
    // Grid frequencies strictly inside [-1/20, 1/20]: about 2L/10 of them.
    const double across = 2.0 * window / 10.0;
    if (across < 64.0)
        throw ConfigError("window",
                          "spectral resolution too coarse: fewer than 64 grid "
                          "frequencies across [-1/20, 1/20] (need L >= 320)");

    SampledFunction phi = SampledFunction::scalar(window, samples);
    const std::size_t n = phi.size();
    const double nyquist = static_cast<double>(n) / (4.0 * window);
    SampledFunction phi_hat = SampledFunction::scalar(nyquist, samples);

    std::vector<Complex> spec(n);
    const std::int64_t half = static_cast<std::int64_t>(n / 2);
    for (std::int64_t j = -half; j < half; ++j) {
        const double xi = phi.frequency(j);
        spec[static_cast<std::size_t>(j + half)] = Complex(wavelet_spectrum_profile(xi), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) phi_hat.scalar_at(i) = spec[i];
    set_from_spectrum(phi, spec);

    MotherWavelet mw{std::move(phi), std::move(phi_hat), 0.0};
    mw.l2_norm = lp_norm(mw.phi, 2.0);
    return mw;
}

WavePacket synthesize_packet(const MotherWavelet& mw, const Tile& tile) {
    const double window = mw.window();
    const std::size_t n = mw.samples();
    const double len = tile.time.length();              // |I|
    const double time_center = tile.time.center();      // c(I)
    const double freq_center = tile.freq_down().center();   // c(omega_d)

    // Time support must sit in the middle half of the window so the
    // periodization tails stay negligible.
    if (tile.time.left() < -window / 2.0 || tile.time.right() > window / 2.0)
        throw CapacityError("packet synthesis: tile time interval outside the "
                            "middle half of the window");
    // The scaled spectrum bump has radius 1/(20 |I|); it must stay inside the
    // representable frequency band and cover at least 4 grid frequencies.
    const double radius = 1.0 / (20.0 * len);
    const double nyquist = static_cast<double>(n) / (4.0 * window);
    if (freq_center - radius <= -nyquist || freq_center + radius >= nyquist)
        throw CapacityError("packet synthesis: tile frequency support exceeds the "
                            "representable band");
    if (2.0 * radius < 4.0 / (2.0 * window))
        throw CapacityError("packet synthesis: tile scale too coarse for the "
                            "spectral resolution");

    SampledFunction values = SampledFunction::scalar(window, n);
    std::vector<Complex> spec(n);
    const std::int64_t half = static_cast<std::int64_t>(n / 2);
    const double amp = std::sqrt(len);
    for (std::int64_t j = -half; j < half; ++j) {
        const double xi = values.frequency(j);
        const double profile = wavelet_spectrum_profile(len * (xi - freq_center));
        if (profile == 0.0) continue;
        const double phase = -2.0 * std::numbers::pi * time_center * (xi - freq_center);
        spec[static_cast<std::size_t>(j + half)] =
            amp * profile * Complex(std::cos(phase), std::sin(phase));
    }
    set_from_spectrum(values, spec);

    WavePacket packet{tile, std::move(values), 0, n};

    // Effective support: smallest centered range holding all but 1e-15 of
    // the mass; accumulation loops may restrict to it.
    const std::size_t center_cell = packet.values.cell_index(time_center);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::norm(packet.values.scalar_at(i));
    const double keep = total * (1.0 - 1e-15);
    double acc = std::norm(packet.values.scalar_at(center_cell));
    std::size_t lo = center_cell, hi = center_cell;
    while (acc < keep && (lo > 0 || hi + 1 < n)) {
        if (lo > 0) acc += std::norm(packet.values.scalar_at(--lo));
        if (hi + 1 < n) acc += std::norm(packet.values.scalar_at(++hi));
    }
    packet.support_begin = lo;
    packet.support_end = hi + 1;
    return packet;
}

WavePacketFactory::WavePacketFactory(MotherWavelet mw, DyadicGrid grid)
    : wavelet_(std::move(mw)), grid_(grid), mutex_(std::make_unique<std::mutex>()) {}

std::shared_ptr<const WavePacket> WavePacketFactory::packet(const Tile& tile) const {
    require_same_grid(tile.grid(), grid_, "packet factory");
    const Key key{tile.time.scale, tile.time.index, tile.freq.index};
    {
        std::lock_guard<std::mutex> lock(*mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    auto made = std::make_shared<const WavePacket>(synthesize_packet(wavelet_, tile));
    std::lock_guard<std::mutex> lock(*mutex_);
    auto [it, inserted] = cache_.emplace(key, std::move(made));
    return it->second;
}

double spectral_mass_outside(const SampledFunction& f, const DyadicInterval& freq) {
    if (f.space().kind != ValueKind::Scalar)
        throw Error("spectral_mass_outside expects a scalar function");
    const std::vector<Complex> spec = spectrum(f);
    const std::int64_t half = static_cast<std::int64_t>(f.size() / 2);
    double inside = 0.0, outside = 0.0;
    for (std::int64_t j = -half; j < half; ++j) {
        const double xi = f.frequency(j);
        const double m = std::norm(spec[static_cast<std::size_t>(j + half)]);
        if (freq.contains_point(xi))
            inside += m;
        else
            outside += m;
    }
    const double total = inside + outside;
    return total == 0.0 ? 0.0 : outside / total;
}

WaveletVerification verify_wavelet(const MotherWavelet& mw) {
    WaveletVerification out;
    const std::size_t n = mw.phi_hat.size();
    const std::int64_t shift =
        static_cast<std::int64_t>(std::llround(mw.window() / 10.0));   // bins per 1/20

    // The stored spectrum holds every nonzero value of phi_hat, so the
    // periodization sum at xi depends only on xi mod 1/20: accumulate the
    // squared samples per residue class of the lattice shift.
    std::vector<double> class_sum(static_cast<std::size_t>(shift), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = mw.phi_hat.scalar_at(i).real();
        class_sum[i % static_cast<std::size_t>(shift)] += v * v;
    }
    for (double s : class_sum)
        out.max_identity_deviation = std::max(out.max_identity_deviation, std::abs(s - 1.0));

    for (int k = 1; k <= 10; ++k) {
        const SampledFunction shifted = translate(mw.phi, 20.0 * k);
        const double ip = std::abs(scalar_pair(shifted, mw.phi));
        out.orthogonality.push_back(ip);
        out.max_orthogonality = std::max(out.max_orthogonality, ip);
    }

    out.phi_l2 = lp_norm(mw.phi, 2.0);
    for (std::size_t i = 0; i < mw.phi.size(); ++i)
        out.max_imag_residue = std::max(out.max_imag_residue,
                                        std::abs(mw.phi.scalar_at(i).imag()));
    return out;
}

OverlapBound packet_overlap_bound(const WavePacketFactory& factory, const Tile& p,
                                  const Tile& pprime) {
    if (pprime.time.scale > p.time.scale)
        throw ScaleOrderError(
            "packet_overlap_bound: |I_P'| must be <= |I_P|; swap the arguments");
    const auto packet_p = factory.packet(p);
    const auto packet_pp = factory.packet(pprime);
    OverlapBound out;
    out.lhs = std::abs(scalar_pair(packet_p->values, packet_pp->values));

    // Quadrature of v_{I_P} over the cells of I_{P'}.
    const SampledFunction& grid_fn = packet_p->values;
    const double h = grid_fn.step();
    double mass = 0.0;
    for (std::size_t i = 0; i < grid_fn.size(); ++i) {
        const double x = grid_fn.position(i);
        if (pprime.time.contains_point(x)) mass += weight_v(p.time, x) * h;
    }
    out.rhs = std::sqrt(p.time.length() / pprime.time.length()) * mass;
    return out;
}

}  // namespace phaseplane
