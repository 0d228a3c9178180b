#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "phaseplane/dyadic.hpp"
#include "phaseplane/sampled.hpp"

namespace phaseplane {

// The fixed spectral step of the wavelet lattice; the spectrum profile is
// supported in [-kSpectralStep, kSpectralStep] and its squared translates by
// multiples of 1/20 sum to one.
inline constexpr double kSpectralStep = 1.0 / 20.0;

// Raw even bump supported in (-1/20, 1/20): exp(-1/(1-(20 xi)^2)).
double wavelet_bump(double xi);
// Normalized spectrum profile: bump / sqrt(sum of squared 1/20-translates).
// Real, even, nonnegative; the periodization identity holds exactly at every
// real xi by construction.
double wavelet_spectrum_profile(double xi);

// The mother wavelet and its spectrum, sampled on matching grids: phi on the
// time grid of [-L, L), phi_hat at frequencies j/(2L). The L^2 norm equals
// sqrt(1/20) under the C = 1 normalization.
struct MotherWavelet {
    SampledFunction phi;
    SampledFunction phi_hat;
    double l2_norm = 0.0;

    double window() const { return phi.window(); }
    std::size_t samples() const { return phi.size(); }
};

// Builds the mother wavelet. Errors: window too small (L < 40), spectral
// resolution too coarse (< 64 grid frequencies across [-1/20, 1/20]), and
// misaligned window (L must be a multiple of 10 so that the 1/20 lattice
// lands on grid frequencies).
MotherWavelet build_mother_wavelet(std::size_t samples, double window);

// Wave packet of a tile: the mother wavelet modulated to c(omega_d),
// translated to c(I), L^2-dilated to scale |I|; synthesized exactly in the
// frequency domain, so its discrete spectrum vanishes outside omega_d.
struct WavePacket {
    Tile tile;
    SampledFunction values;
    // Contiguous sample range holding all but <= 1e-15 of the packet mass.
    std::size_t support_begin = 0;
    std::size_t support_end = 0;
};

WavePacket synthesize_packet(const MotherWavelet& mw, const Tile& tile);

// Shared packet cache keyed on exact integer tile data; safe for concurrent
// lookups, synchronized on insert.
class WavePacketFactory {
public:
    WavePacketFactory(MotherWavelet mw, DyadicGrid grid);

    std::shared_ptr<const WavePacket> packet(const Tile& tile) const;
    const MotherWavelet& wavelet() const { return wavelet_; }
    const DyadicGrid& grid() const { return grid_; }
    double window() const { return wavelet_.window(); }
    std::size_t samples() const { return wavelet_.samples(); }

    SampledFunction zero_function(const ValueSpace& space) const {
        return SampledFunction(wavelet_.window(), wavelet_.samples(), space);
    }

private:
    MotherWavelet wavelet_;
    DyadicGrid grid_;
    // Heap-held so the factory stays movable.
    mutable std::unique_ptr<std::mutex> mutex_;
    using Key = std::tuple<std::int32_t, std::int64_t, std::int64_t>;
    mutable std::map<Key, std::shared_ptr<const WavePacket>> cache_;
};

// Fraction of spectral mass of `f` outside the frequency interval, measured
// against the total; used for the support invariants.
double spectral_mass_outside(const SampledFunction& f, const DyadicInterval& freq);

// Numerical-floor verification of a built wavelet: the periodization
// identity on the stored spectrum samples, orthogonality of the 20 n
// translates for n = 1..10, and the imaginary residue of phi.
struct WaveletVerification {
    double max_identity_deviation = 0.0;
    std::vector<double> orthogonality;   // |<T_{20n} phi, phi>|, n = 1..10
    double max_orthogonality = 0.0;
    double phi_l2 = 0.0;
    double max_imag_residue = 0.0;

    bool within_floors() const {
        return max_identity_deviation < 1e-9 && max_orthogonality < 1e-8 &&
               max_imag_residue < 1e-12;
    }
};
WaveletVerification verify_wavelet(const MotherWavelet& mw);

// Both sides of the packet-overlap estimate for |I_P'| <= |I_P|:
// lhs = |<phi_P, phi_P'>|, rhs = sqrt(|I_P|/|I_P'|) * ||v_{I_P} 1_{I_P'}||_1.
struct OverlapBound {
    double lhs = 0.0;
    double rhs = 0.0;
};
OverlapBound packet_overlap_bound(const WavePacketFactory& factory, const Tile& p,
                                  const Tile& pprime);

}  // namespace phaseplane
