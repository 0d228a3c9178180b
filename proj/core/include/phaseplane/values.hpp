#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phaseplane/errors.hpp"

namespace phaseplane {

using Complex = std::complex<double>;

// The pluggable value spaces: complex scalars, finite-dimensional Hilbert
// vectors, and Schatten-p matrices (d x d, p in (1, inf]).
enum class ValueKind : std::uint8_t { Scalar = 0, Hilbert = 1, Schatten = 2 };

struct ValueSpace {
    ValueKind kind = ValueKind::Scalar;
    int dim = 1;          // vector length / matrix side
    double p = 2.0;       // Schatten exponent; ignored for Scalar/Hilbert

    static ValueSpace scalar() { return {ValueKind::Scalar, 1, 2.0}; }
    static ValueSpace hilbert(int dim) { return {ValueKind::Hilbert, dim, 2.0}; }
    static ValueSpace schatten(double p, int dim) { return {ValueKind::Schatten, dim, p}; }

    // Number of complex components a single value occupies in flat storage.
    int components() const {
        switch (kind) {
            case ValueKind::Scalar: return 1;
            case ValueKind::Hilbert: return dim;
            case ValueKind::Schatten: return dim * dim;
        }
        return 1;
    }

    bool operator==(const ValueSpace& o) const {
        if (kind != o.kind || dim != o.dim) return false;
        return kind != ValueKind::Schatten || p == o.p;
    }

    void validate() const;
    std::string describe() const;
};

// Dual space: scalar and Hilbert are self-dual; Schatten p dualizes to
// p' = p/(p-1), with p = inf mapping to p' = 1. The conjugate exponent is
// evaluated in long double to keep Hoelder-slack noise down.
ValueSpace dual_space(const ValueSpace& space);
double conjugate_exponent(double p);

// Flat view of one value: 1 entry (scalar), dim entries (Hilbert), or
// d*d row-major entries (Schatten).
using ValueView = std::span<const Complex>;
using MutableValueView = std::span<Complex>;

// Norm of a single value in its space. Schatten norms go through singular
// values, except p = 2 which is the Frobenius norm computed directly.
double value_norm(const ValueSpace& space, ValueView v);

// Bilinear-in-the-first-slot dual pairing <x, x*> = sum_k x_k conj(x*_k).
// For Schatten values this is trace(x * (x*)^H).
Complex value_dual_pair(ValueView x, ValueView xstar);

// Singular values of a d x d complex matrix (row-major), descending.
// One-sided Jacobi; d is capped at 8.
std::vector<double> singular_values(int dim, ValueView matrix);

// Schatten norm of a d x d complex matrix: (sum sigma_i^p)^(1/p);
// p = inf gives the largest singular value. Requires p in (1, inf].
double schatten_norm(int dim, ValueView matrix, double p);

inline constexpr int kMaxMatrixDim = 8;

// One value together with its space; convenience wrapper for call sites
// that pass values around individually.
struct BanachValue {
    ValueSpace space;
    std::vector<Complex> data;

    BanachValue() : space(ValueSpace::scalar()), data(1, Complex{0.0, 0.0}) {}
    BanachValue(ValueSpace s, std::vector<Complex> d) : space(s), data(std::move(d)) {}

    static BanachValue zero(const ValueSpace& s) {
        return BanachValue(s, std::vector<Complex>(s.components(), Complex{0.0, 0.0}));
    }
    // Identity element: 1 (scalar), e_1 (Hilbert), identity matrix (Schatten).
    static BanachValue identity(const ValueSpace& s);

    double norm() const { return value_norm(space, data); }

    BanachValue& operator+=(const BanachValue& o);
    BanachValue& operator*=(Complex scale);
};

Complex dual_pair(const BanachValue& x, const BanachValue& xstar);

}  // namespace phaseplane
