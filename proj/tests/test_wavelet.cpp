#include <doctest.h>

#include <cmath>
#include <random>

#include "phaseplane/wavelet.hpp"
#include "phaseplane/weight.hpp"

using namespace phaseplane;

namespace {

const MotherWavelet& shared_wavelet() {
    static const MotherWavelet mw = build_mother_wavelet(4096, 320.0);
    return mw;
}

constexpr double kPhiL2 = 0.22360679774997896;   // sqrt(1/20)

}  // namespace

TEST_SUITE("wavelet") {

TEST_CASE("construction invariants") {
    const MotherWavelet& mw = shared_wavelet();
    const WaveletVerification v = verify_wavelet(mw);
    CHECK(v.max_identity_deviation < 1e-9);
    CHECK(v.max_orthogonality < 1e-8);
    CHECK(v.max_imag_residue < 1e-12);
    CHECK(v.phi_l2 == doctest::Approx(kPhiL2).epsilon(1e-12));
    CHECK(v.phi_l2 > 0.0);

    // Spectrum profile: nonnegative, supported in [-1/20, 1/20].
    for (std::size_t i = 0; i < mw.phi_hat.size(); ++i) {
        const double xi = mw.phi_hat.position(i);
        const double value = mw.phi_hat.scalar_at(i).real();
        CHECK(value >= 0.0);
        if (std::abs(xi) > 1.0 / 20.0) CHECK(value == 0.0);
    }
}

TEST_CASE("construction is deterministic in (N, L)") {
    const MotherWavelet a = build_mother_wavelet(2048, 320.0);
    const MotherWavelet b = build_mother_wavelet(2048, 320.0);
    CHECK(a.phi.raw() == b.phi.raw());
}

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(build_mother_wavelet(4096, 30.0), ConfigError);    // window too small
    CHECK_THROWS_AS(build_mother_wavelet(4096, 100.0), ConfigError);   // too coarse
    CHECK_THROWS_AS(build_mother_wavelet(4096, 325.0), ConfigError);   // misaligned lattice
}

TEST_CASE("packet of the centered unit tile is the mother wavelet") {
    // Grid chosen so that c(I) = 0 and c(omega_d) = 0 for the unit tile.
    const DyadicGrid grid(-0.5, 1.0, -0.25);
    const MotherWavelet mw = build_mother_wavelet(4096, 320.0);
    const WavePacket packet = synthesize_packet(mw, Tile(grid, 0, 0, 0));
    double sup_diff = 0.0;
    for (std::size_t i = 0; i < packet.values.size(); ++i)
        sup_diff = std::max(sup_diff,
                            std::abs(packet.values.scalar_at(i) - mw.phi.scalar_at(i)));
    CHECK(sup_diff < 1e-10);
}

TEST_CASE("pure translation for zero-frequency tiles") {
    const DyadicGrid grid(0.0, 1.0, -0.25);   // c(omega_d) = 0 at m = 0
    const MotherWavelet& mw = shared_wavelet();
    const Tile tile(grid, 0, 4, 0);           // I = [4, 5), c(I) = 4.5
    const WavePacket packet = synthesize_packet(mw, tile);
    const SampledFunction reference = translate(mw.phi, 4.5);
    double sup_diff = 0.0;
    for (std::size_t i = 0; i < packet.values.size(); ++i)
        sup_diff = std::max(sup_diff,
                            std::abs(packet.values.scalar_at(i) - reference.scalar_at(i)));
    CHECK(sup_diff < 1e-10);
}

TEST_CASE("packet norms equal the mother norm across scales and grids") {
    const MotherWavelet& mw = shared_wavelet();
    for (const DyadicGrid& grid :
         {DyadicGrid(0.0, 1.0, 0.0), DyadicGrid(0.3, 1.0, 0.7), DyadicGrid(-2.0, 0.5, 0.1)}) {
        WavePacketFactory factory(mw, grid);
        for (std::int32_t k : {-1, 0, 1, 2}) {
            const Tile tile(grid, k, 1, 1);
            // Stay inside the representable frequency band (Nyquist 3.2).
            if (std::abs(tile.freq.left()) > 2.5 || std::abs(tile.freq.right()) > 2.5)
                continue;
            const auto packet = factory.packet(tile);
            CHECK(lp_norm(packet->values, 2.0) == doctest::Approx(kPhiL2).epsilon(1e-10));
        }
    }
}

TEST_CASE("packet spectrum is supported in the lower frequency half") {
    const MotherWavelet& mw = shared_wavelet();
    const DyadicGrid grid{};
    WavePacketFactory factory(mw, grid);
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const std::int32_t k = static_cast<std::int32_t>(rng() % 4) - 1;
        const std::int64_t n = static_cast<std::int64_t>(rng() % 32) - 16;
        const std::int64_t m = static_cast<std::int64_t>(rng() % 3) - 1;
        const Tile tile(grid, k, n, m);
        const auto packet = factory.packet(tile);
        CHECK(spectral_mass_outside(packet->values, tile.freq_down()) < 1e-10);
    }
}

TEST_CASE("time dilation by 4 halves the sup norm") {
    const MotherWavelet& mw = shared_wavelet();
    const DyadicGrid grid{};
    const WavePacket small = synthesize_packet(mw, Tile(grid, 0, 0, 0));
    const WavePacket wide = synthesize_packet(mw, Tile(grid, 2, 0, 0));
    CHECK(sup_norm(wide.values) ==
          doctest::Approx(sup_norm(small.values) / 2.0).epsilon(1e-2));
}

TEST_CASE("pairing anchors") {
    const MotherWavelet& mw = shared_wavelet();
    SUBCASE("self pairing is the squared mother norm") {
        const DyadicGrid grid{};
        const WavePacket packet = synthesize_packet(mw, Tile(grid, 0, 0, 0));
        CHECK(std::abs(scalar_pair(packet.values, packet.values)) ==
              doctest::Approx(0.05).epsilon(1e-12));   // 1/20 exactly
    }
    SUBCASE("translation by 20 against the centered packet vanishes") {
        const DyadicGrid grid(-0.5, 1.0, -0.25);
        const WavePacket packet = synthesize_packet(mw, Tile(grid, 0, 0, 0));
        const SampledFunction shifted = translate(mw.phi, 20.0);
        CHECK(std::abs(scalar_pair(shifted, packet.values)) < 1e-8);
    }
    SUBCASE("sup bound |<f, phi_P>| <= C ||f||_inf sqrt(|I_P|) across scales") {
        const DyadicGrid grid{};
        const double phi_l1 = lp_norm(mw.phi, 1.0);
        SampledFunction ones = SampledFunction::scalar(mw.window(), mw.samples());
        for (std::size_t i = 0; i < ones.size(); ++i) ones.scalar_at(i) = Complex{1.0, 0.0};
        for (std::int32_t k : {-1, 0, 1, 2}) {
            const WavePacket packet = synthesize_packet(mw, Tile(grid, k, 0, 1));
            const double bound = std::abs(scalar_pair(ones, packet.values)) /
                                 std::sqrt(packet.tile.time.length());
            CHECK(bound <= phi_l1 * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("packet overlap bound") {
    const MotherWavelet& mw = shared_wavelet();
    const DyadicGrid grid{};
    WavePacketFactory factory(mw, grid);
    SUBCASE("equal tiles give a finite ratio") {
        const Tile p(grid, 0, 0, 0);
        const OverlapBound b = packet_overlap_bound(factory, p, p);
        CHECK(b.lhs == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(b.rhs > 0.0);
        CHECK(std::isfinite(b.lhs / b.rhs));
    }
    SUBCASE("disjoint lower halves give zero overlap") {
        const Tile p(grid, 0, 0, 0), q(grid, 0, 20, 2);
        const OverlapBound b = packet_overlap_bound(factory, p, q);
        CHECK(b.lhs < 1e-10);
    }
    SUBCASE("wrong scale order raises the swap hint") {
        const Tile coarse(grid, 1, 0, 0), fine(grid, 0, 0, 0);
        CHECK_THROWS_AS(packet_overlap_bound(factory, fine, coarse), ScaleOrderError);
    }
    SUBCASE("max ratio is stable when the resolution doubles") {
        auto max_ratio = [&](std::size_t samples) {
            const MotherWavelet local = build_mother_wavelet(samples, 320.0);
            WavePacketFactory f(local, grid);
            std::mt19937_64 pick(22);
            double best = 0.0;
            for (int trial = 0; trial < 1000; ++trial) {
                const std::int32_t kp = static_cast<std::int32_t>(pick() % 3);
                const std::int32_t kq = static_cast<std::int32_t>(pick() % (kp + 1));
                // Frequency endpoints within +-1 so both resolutions
                // (Nyquist 1.6 and 3.2) represent every packet.
                const std::int64_t mp_range = std::int64_t{1} << kp;
                const std::int64_t mq_range = std::int64_t{1} << kq;
                const Tile p(grid, kp, static_cast<std::int64_t>(pick() % 16) - 8,
                             static_cast<std::int64_t>(pick() % (2 * mp_range)) - mp_range);
                const Tile q(grid, kq, static_cast<std::int64_t>(pick() % 64) - 32,
                             static_cast<std::int64_t>(pick() % (2 * mq_range)) - mq_range);
                const OverlapBound b = packet_overlap_bound(f, p, q);
                if (b.rhs > 1e-12) best = std::max(best, b.lhs / b.rhs);
            }
            return best;
        };
        const double coarse = max_ratio(2048);
        const double fine = max_ratio(4096);
        CHECK(std::abs(fine - coarse) / coarse < 0.25);
    }
}

TEST_CASE("packet synthesis guards") {
    const MotherWavelet& mw = shared_wavelet();
    const DyadicGrid grid{};
    // Outside the middle half of the window.
    CHECK_THROWS_AS(synthesize_packet(mw, Tile(grid, 0, 300, 0)), CapacityError);
    // Frequency support beyond the representable band (Nyquist = 3.2).
    CHECK_THROWS_AS(synthesize_packet(mw, Tile(grid, 0, 0, 4)), CapacityError);
    // Scale too coarse for the spectral resolution (|I| > L/20 = 16).
    CHECK_THROWS_AS(synthesize_packet(mw, Tile(grid, 5, 0, 0)), CapacityError);
}

TEST_CASE("weight function anchors") {
    const DyadicGrid grid{};
    const DyadicInterval interval(grid, Axis::Time, 1, 0);   // [0, 2), center 1
    CHECK(weight_v(interval, 1.0) == doctest::Approx(0.5));
    CHECK(weight_v(interval, 3.0) == doctest::Approx(0.5 * std::pow(2.0, -10.0)));

    // Quadrature over the window against the closed form (full mass 2/9).
    const double h = 0.01;
    double quad = 0.0;
    for (double x = -300.0; x < 300.0; x += h) quad += weight_v(interval, x + h / 2) * h;
    CHECK(quad == doctest::Approx(kWeightTotalMass).epsilon(0.02));
    CHECK(weight_v_integral(interval, -300.0, 300.0) ==
          doctest::Approx(kWeightTotalMass).epsilon(1e-12));
}

}  // TEST_SUITE
