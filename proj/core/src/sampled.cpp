#include "phaseplane/sampled.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace phaseplane {

namespace fft {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void transform(std::span<Complex> data, bool inverse) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw Error("fft size must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    const double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sgn * 2.0 * std::numbers::pi / static_cast<double>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = data[i + k];
                const Complex v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (Complex& z : data) z *= inv;
    }
}

}  // namespace fft

SampledFunction::SampledFunction(double window_halflength, std::size_t samples,
                                 ValueSpace space)
    : window_(window_halflength), count_(samples), space_(space) {
    if (!(window_ > 0.0) || !std::isfinite(window_))
        throw Error("sampled function requires a positive finite window");
    if (!fft::is_power_of_two(count_))
        throw Error("sample count must be a power of two");
    space_.validate();
    data_.assign(count_ * static_cast<std::size_t>(components()), Complex{0.0, 0.0});
}

SampledFunction SampledFunction::scalar(double window_halflength, std::size_t samples) {
    return SampledFunction(window_halflength, samples, ValueSpace::scalar());
}

std::size_t SampledFunction::cell_index(double x) const {
    const double h = step();
    double u = (x + window_) / h;
    double idx = std::floor(u + 0.5);   // cells are centered at the samples
    std::int64_t i = static_cast<std::int64_t>(idx);
    const std::int64_t n = static_cast<std::int64_t>(count_);
    i = ((i % n) + n) % n;
    return static_cast<std::size_t>(i);
}

std::vector<Complex> spectrum(const SampledFunction& f, int component) {
    const std::size_t n = f.size();
    std::vector<Complex> buf(n);
    const int c = f.components();
    for (std::size_t i = 0; i < n; ++i) buf[i] = f.raw()[i * c + component];
    fft::transform(buf, false);
    // fhat(xi_j) = h (-1)^j DFT_j, natural order j = -N/2 .. N/2-1.
    const double h = f.step();
    std::vector<Complex> out(n);
    const std::int64_t half = static_cast<std::int64_t>(n / 2);
    for (std::int64_t j = -half; j < half; ++j) {
        const std::size_t bin = static_cast<std::size_t>((j + static_cast<std::int64_t>(n)) %
                                                         static_cast<std::int64_t>(n));
        const double sign = (j & 1) ? -1.0 : 1.0;
        out[static_cast<std::size_t>(j + half)] = h * sign * buf[bin];
    }
    return out;
}

void set_from_spectrum(SampledFunction& f, std::span<const Complex> spec, int component) {
    const std::size_t n = f.size();
    if (spec.size() != n) throw Error("spectrum size mismatch");
    std::vector<Complex> buf(n);
    const double h = f.step();
    const std::int64_t half = static_cast<std::int64_t>(n / 2);
    for (std::int64_t j = -half; j < half; ++j) {
        const std::size_t bin = static_cast<std::size_t>((j + static_cast<std::int64_t>(n)) %
                                                         static_cast<std::int64_t>(n));
        const double sign = (j & 1) ? -1.0 : 1.0;
        buf[bin] = spec[static_cast<std::size_t>(j + half)] * sign / h;
    }
    fft::transform(buf, true);
    const int c = f.components();
    for (std::size_t i = 0; i < n; ++i) f.raw()[i * c + component] = buf[i];
}

SampledFunction modulate(const SampledFunction& f, double lambda) {
    SampledFunction out = f;
    const int c = f.components();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double phase = 2.0 * std::numbers::pi * lambda * f.position(i);
        const Complex m(std::cos(phase), std::sin(phase));
        for (int k = 0; k < c; ++k) out.raw()[i * c + k] = f.raw()[i * c + k] * m;
    }
    return out;
}

SampledFunction translate(const SampledFunction& f, double t) {
    SampledFunction out = f;
    const std::size_t n = f.size();
    const int c = f.components();
    std::vector<Complex> buf(n);
    for (int k = 0; k < c; ++k) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = f.raw()[i * c + k];
        fft::transform(buf, false);
        // Multiply bin j by e^{-2 pi i xi_j t}; bins above N/2 are negative j.
        for (std::size_t b = 0; b < n; ++b) {
            std::int64_t j = static_cast<std::int64_t>(b);
            if (j >= static_cast<std::int64_t>(n / 2)) j -= static_cast<std::int64_t>(n);
            const double phase = -2.0 * std::numbers::pi * f.frequency(j) * t;
            buf[b] *= Complex(std::cos(phase), std::sin(phase));
        }
        fft::transform(buf, true);
        for (std::size_t i = 0; i < n; ++i) out.raw()[i * c + k] = buf[i];
    }
    return out;
}

SampledFunction dilate(const SampledFunction& f, double delta, double p) {
    if (!(delta > 0.0)) throw Error("dilation requires delta > 0");
    if (!(p > 0.0)) throw Error("dilation exponent must be positive");
    SampledFunction out = f;
    const std::size_t n = f.size();
    const int c = f.components();
    const double amp = std::pow(delta, -1.0 / p);
    const std::int64_t half = static_cast<std::int64_t>(n / 2);
    for (int k = 0; k < c; ++k) {
        const std::vector<Complex> sp = spectrum(f, k);
        // Evaluate the interpolant at x/delta; arguments that leave the
        // window read zero rather than the periodic extension.
        const double dxi = f.frequency_step();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = f.position(i) / delta;
            if (x < -f.window() || x >= f.window()) {
                out.raw()[i * c + k] = Complex{0.0, 0.0};
                continue;
            }
            Complex acc{0.0, 0.0};
            for (std::int64_t j = -half; j < half; ++j) {
                const double phase = 2.0 * std::numbers::pi * f.frequency(j) * x;
                acc += sp[static_cast<std::size_t>(j + half)] *
                       Complex(std::cos(phase), std::sin(phase));
            }
            out.raw()[i * c + k] = amp * acc * dxi;
        }
    }
    return out;
}

double lp_norm(const SampledFunction& f, double p) {
    if (!(p >= 1.0)) throw Error("lp_norm requires p in [1, inf]");
    if (std::isinf(p)) return sup_norm(f);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = value_norm(f.space(), f.value(i));
        acc += std::pow(static_cast<long double>(v), static_cast<long double>(p));
    }
    acc *= static_cast<long double>(f.step());
    return static_cast<double>(std::pow(acc, 1.0L / static_cast<long double>(p)));
}

double sup_norm(const SampledFunction& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        m = std::max(m, value_norm(f.space(), f.value(i)));
    return m;
}

BanachValue pair(const SampledFunction& f, const SampledFunction& g_scalar) {
    if (!f.compatible_with(g_scalar))
        throw ResolutionMismatchError("pair: window/resolution mismatch");
    if (g_scalar.space().kind != ValueKind::Scalar)
        throw Error("pair: second argument must be scalar-valued");
    const int c = f.components();
    BanachValue acc = BanachValue::zero(f.space());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Complex w = std::conj(g_scalar.scalar_at(i));
        for (int k = 0; k < c; ++k) acc.data[static_cast<std::size_t>(k)] += f.raw()[i * c + k] * w;
    }
    acc *= Complex(f.step(), 0.0);
    return acc;
}

Complex scalar_pair(const SampledFunction& f, const SampledFunction& g) {
    if (f.space().kind != ValueKind::Scalar || g.space().kind != ValueKind::Scalar)
        throw Error("scalar_pair requires scalar operands");
    if (!f.compatible_with(g))
        throw ResolutionMismatchError("scalar_pair: window/resolution mismatch");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < f.size(); ++i)
        acc += f.scalar_at(i) * std::conj(g.scalar_at(i));
    return acc * f.step();
}

void accumulate_scaled(SampledFunction& f, ValueView coefficient,
                       const SampledFunction& packet, std::size_t begin, std::size_t end) {
    if (!f.compatible_with(packet))
        throw ResolutionMismatchError("accumulate: window/resolution mismatch");
    const int c = f.components();
    if (static_cast<int>(coefficient.size()) != c) throw Error("accumulate: coefficient size");
    for (std::size_t i = begin; i < end; ++i) {
        const Complex w = packet.scalar_at(i);
        for (int k = 0; k < c; ++k) f.raw()[i * c + k] += coefficient[k] * w;
    }
}

namespace {

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error("truncated sampled-function file");
    return v;
}

}  // namespace

void write_binary(const SampledFunction& f, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    put(os, f.window());
    put(os, static_cast<std::uint32_t>(f.size()));
    put(os, static_cast<std::uint8_t>(f.space().kind));
    put(os, static_cast<std::uint8_t>(f.space().dim));
    put(os, f.space().p);
    for (const Complex& z : f.raw()) {
        put(os, z.real());
        put(os, z.imag());
    }
}

SampledFunction read_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    const double window = get<double>(is);
    const std::uint32_t n = get<std::uint32_t>(is);
    const std::uint8_t kind = get<std::uint8_t>(is);
    const std::uint8_t dim = get<std::uint8_t>(is);
    const double p = get<double>(is);
    ValueSpace space{static_cast<ValueKind>(kind), static_cast<int>(dim), p};
    SampledFunction f(window, n, space);
    for (Complex& z : f.raw()) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        z = Complex(re, im);
    }
    return f;
}

void write_csv(const SampledFunction& f, const std::filesystem::path& path, int component) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "index,x,re,im\n";
    os.precision(17);
    const int c = f.components();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Complex z = f.raw()[i * c + component];
        os << i << ',' << f.position(i) << ',' << z.real() << ',' << z.imag() << '\n';
    }
}

}  // namespace phaseplane
