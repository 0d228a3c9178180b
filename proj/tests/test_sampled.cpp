#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "phaseplane/sampled.hpp"

using namespace phaseplane;

namespace {

// Smooth band-limited test function: compactly supported spectral bump at
// |xi - center| < band, superpolynomially decaying in time.
SampledFunction spectral_bump(double window, std::size_t samples, double band,
                              double center = 0.0) {
    SampledFunction f = SampledFunction::scalar(window, samples);
    std::vector<Complex> spec(samples, Complex{0.0, 0.0});
    const std::int64_t half = static_cast<std::int64_t>(samples / 2);
    for (std::int64_t j = -half; j < half; ++j) {
        const double u = (f.frequency(j) - center) / band;
        if (std::abs(u) < 1.0)
            spec[static_cast<std::size_t>(j + half)] =
                Complex(std::exp(-1.0 / (1.0 - u * u)), 0.0);
    }
    set_from_spectrum(f, spec);
    return f;
}

}  // namespace

TEST_SUITE("sampled") {

TEST_CASE("fft round trip is the identity") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Complex> data(1024), copy;
    for (Complex& z : data) z = Complex(gauss(rng), gauss(rng));
    copy = data;
    fft::transform(data, false);
    fft::transform(data, true);
    for (std::size_t i = 0; i < data.size(); ++i)
        CHECK(std::abs(data[i] - copy[i]) < 1e-12);
}

TEST_CASE("spectrum round trip is the identity") {
    SampledFunction f = spectral_bump(320.0, 2048, 0.3);
    SampledFunction g = SampledFunction::scalar(320.0, 2048);
    set_from_spectrum(g, spectrum(f));
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(f.scalar_at(i) - g.scalar_at(i)) < 1e-12);
}

TEST_CASE("modulation preserves every quadrature norm") {
    const SampledFunction f = spectral_bump(320.0, 2048, 0.2);
    const SampledFunction m = modulate(f, 0.37);
    for (double p : {1.0, 2.0, 4.0})
        CHECK(lp_norm(m, p) == doctest::Approx(lp_norm(f, p)).epsilon(1e-10));
}

TEST_CASE("translation preserves every quadrature norm") {
    const SampledFunction f = spectral_bump(320.0, 2048, 0.2);
    const SampledFunction t = translate(f, 11.25);
    for (double p : {1.0, 2.0, 4.0})
        CHECK(lp_norm(t, p) == doctest::Approx(lp_norm(f, p)).epsilon(1e-10));
}

TEST_CASE("p-dilation preserves the matching L^p norm") {
    // Positive smooth in-window support: |f| has no kinks, so the midpoint
    // quadrature reaches spectral accuracy for every p.
    SampledFunction f = SampledFunction::scalar(320.0, 1024);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = f.position(i);
        f.scalar_at(i) = Complex(std::exp(-(x * x) / 100.0), 0.0);
    }
    for (double p : {1.0, 2.0, 4.0}) {
        for (double delta : {2.0, 0.5}) {
            const SampledFunction d = dilate(f, delta, p);
            CHECK(lp_norm(d, p) == doctest::Approx(lp_norm(f, p)).epsilon(1e-9));
        }
    }
}

TEST_CASE("dilation carries the delta^(-1/p) amplitude") {
    SampledFunction f = SampledFunction::scalar(320.0, 1024);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = f.position(i);
        f.scalar_at(i) = Complex(std::exp(-(x * x) / 100.0), 0.0);
    }
    const SampledFunction d = dilate(f, 4.0, 2.0);
    CHECK(sup_norm(d) == doctest::Approx(sup_norm(f) / 2.0).epsilon(1e-6));
}

TEST_CASE("modulation shifts the spectrum on the discrete grid") {
    const SampledFunction f = spectral_bump(320.0, 2048, 0.2);
    const double lambda = 64.0 * f.frequency_step();
    const SampledFunction m = modulate(f, lambda);
    const std::vector<Complex> sf = spectrum(f), sm = spectrum(m);
    for (std::size_t i = 0; i + 64 < sf.size(); ++i)
        CHECK(std::abs(sm[i + 64] - sf[i]) < 1e-10);
}

TEST_CASE("pair is linear in f and conjugate-linear in the packet slot") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SampledFunction f = SampledFunction::scalar(40.0, 256);
    SampledFunction g = SampledFunction::scalar(40.0, 256);
    SampledFunction h = SampledFunction::scalar(40.0, 256);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.scalar_at(i) = Complex(gauss(rng), gauss(rng));
        g.scalar_at(i) = Complex(gauss(rng), gauss(rng));
        h.scalar_at(i) = Complex(gauss(rng), gauss(rng));
    }
    const Complex a(gauss(rng), gauss(rng)), b(gauss(rng), gauss(rng));
    SampledFunction combo = f;
    for (std::size_t i = 0; i < f.size(); ++i)
        combo.scalar_at(i) = a * f.scalar_at(i) + b * g.scalar_at(i);
    const Complex lhs = scalar_pair(combo, h);
    const Complex rhs = a * scalar_pair(f, h) + b * scalar_pair(g, h);
    CHECK(std::abs(lhs - rhs) < 1e-10);

    SampledFunction scaled_packet = h;
    for (std::size_t i = 0; i < h.size(); ++i) scaled_packet.scalar_at(i) = b * h.scalar_at(i);
    CHECK(std::abs(scalar_pair(f, scaled_packet) - std::conj(b) * scalar_pair(f, h)) < 1e-10);
}

TEST_CASE("binary layout round trips") {
    SampledFunction f(40.0, 128, ValueSpace::schatten(4.0, 2));
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Complex& z : f.raw()) z = Complex(gauss(rng), gauss(rng));

    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "phaseplane_roundtrip.bin";
    write_binary(f, path);
    const SampledFunction g = read_binary(path);
    CHECK(g.window() == f.window());
    CHECK(g.size() == f.size());
    CHECK(g.space() == f.space());
    CHECK(g.raw() == f.raw());
    std::filesystem::remove(path);
}

TEST_CASE("csv export carries index, position, and components") {
    SampledFunction f = SampledFunction::scalar(40.0, 64);
    f.scalar_at(3) = Complex(1.5, -2.5);
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "phaseplane_export.csv";
    write_csv(f, path);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "index,x,re,im");
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 64);
    std::filesystem::remove(path);
}

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(SampledFunction::scalar(320.0, 100), Error);   // not a power of two
    CHECK_THROWS_AS(SampledFunction::scalar(-1.0, 128), Error);
    SampledFunction f = SampledFunction::scalar(40.0, 128);
    SampledFunction g = SampledFunction::scalar(20.0, 128);
    CHECK_THROWS_AS(scalar_pair(f, g), ResolutionMismatchError);
}

}  // TEST_SUITE
