#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "phaseplane/values.hpp"

namespace phaseplane {

namespace fft {
// In-place radix-2 transform; size must be a power of two. The forward
// transform is unnormalized, the inverse carries the 1/N factor.
void transform(std::span<Complex> data, bool inverse);
bool is_power_of_two(std::size_t n);
}  // namespace fft

// A vector-valued function sampled on the uniform grid x_i = -L + i h,
// h = 2L/N, treated as one period of length 2L. Quadrature is the midpoint
// rule on the cells centered at the sample points.
class SampledFunction {
public:
    SampledFunction(double window_halflength, std::size_t samples, ValueSpace space);
    static SampledFunction scalar(double window_halflength, std::size_t samples);

    double window() const { return window_; }
    std::size_t size() const { return count_; }
    double step() const { return 2.0 * window_ / static_cast<double>(count_); }
    double position(std::size_t i) const {
        return -window_ + static_cast<double>(i) * step();
    }
    // Index of the cell containing x (positions wrap at the window edge).
    std::size_t cell_index(double x) const;

    const ValueSpace& space() const { return space_; }
    int components() const { return space_.components(); }

    MutableValueView value(std::size_t i) {
        return MutableValueView(data_.data() + i * components(), components());
    }
    ValueView value(std::size_t i) const {
        return ValueView(data_.data() + i * components(), components());
    }
    Complex& scalar_at(std::size_t i) { return data_[i]; }
    const Complex& scalar_at(std::size_t i) const { return data_[i]; }

    std::vector<Complex>& raw() { return data_; }
    const std::vector<Complex>& raw() const { return data_; }

    // Frequencies are xi_j = j / (2L) for j in [-N/2, N/2); the spectrum is
    // the quadrature Fourier transform evaluated there, natural (ascending j)
    // order, one block per component.
    double frequency(std::int64_t j) const {
        return static_cast<double>(j) / (2.0 * window_);
    }
    double frequency_step() const { return 1.0 / (2.0 * window_); }
    std::int64_t min_frequency_index() const {
        return -static_cast<std::int64_t>(count_ / 2);
    }

    bool compatible_with(const SampledFunction& o) const {
        return window_ == o.window_ && count_ == o.count_;
    }

private:
    double window_;
    std::size_t count_;
    ValueSpace space_;
    std::vector<Complex> data_;   // count_ * components(), sample-major
};

// Spectrum of one component (default 0) in natural frequency order.
std::vector<Complex> spectrum(const SampledFunction& f, int component = 0);
// Rebuild samples of one component from a natural-order spectrum.
void set_from_spectrum(SampledFunction& f, std::span<const Complex> spec, int component = 0);

// Mod_lambda f(x) = e^{2 pi i lambda x} f(x).
SampledFunction modulate(const SampledFunction& f, double lambda);
// T_t f(x) = f(x - t), computed spectrally (circular on the window).
SampledFunction translate(const SampledFunction& f, double t);
// Dil_delta^p f(x) = delta^{-1/p} f(x/delta), evaluated through the
// trigonometric interpolant of f. O(N^2); intended for tests and small N.
SampledFunction dilate(const SampledFunction& f, double delta, double p);

// Midpoint-rule L^p norm of the pointwise value norms; p = inf is the grid max.
double lp_norm(const SampledFunction& f, double p);
double sup_norm(const SampledFunction& f);

// <f, g> = h sum_i f_i conj(g_i) for a scalar g; the result lives in f's
// value space. Throws ResolutionMismatchError on grid mismatch.
BanachValue pair(const SampledFunction& f, const SampledFunction& g_scalar);
// Scalar inner product of two scalar functions.
Complex scalar_pair(const SampledFunction& f, const SampledFunction& g);

// Pointwise linear update: f += c * (scalar g broadcast against value a).
void accumulate_scaled(SampledFunction& f, ValueView coefficient,
                       const SampledFunction& packet, std::size_t begin, std::size_t end);

// Binary layout: header {L: float64, N: uint32, kind: uint8, dim: uint8,
// p: float64}, then samples in index order, components interleaved as
// (re, im) float64 pairs, little-endian.
void write_binary(const SampledFunction& f, const std::filesystem::path& path);
SampledFunction read_binary(const std::filesystem::path& path);

// CSV export (index, x, re, im) of one component, for plotting.
void write_csv(const SampledFunction& f, const std::filesystem::path& path,
               int component = 0);

}  // namespace phaseplane
