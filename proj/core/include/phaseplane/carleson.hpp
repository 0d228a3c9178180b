#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "phaseplane/dyadic.hpp"
#include "phaseplane/sampled.hpp"
#include "phaseplane/wavelet.hpp"

namespace phaseplane {

// Piecewise-constant measurable frequency choice N(x), one value per cell.
struct FrequencyChoice {
    std::vector<double> values;

    static FrequencyChoice constant(std::size_t cells, double value) {
        return FrequencyChoice{std::vector<double>(cells, value)};
    }
};

// A measurable subset of the sample grid stored as a cell indicator.
class MeasurableSet {
public:
    MeasurableSet(double window_halflength, std::size_t cells);

    static MeasurableSet empty_like(const SampledFunction& f) {
        return MeasurableSet(f.window(), f.size());
    }

    double window() const { return window_; }
    std::size_t cells() const { return mask_.size(); }
    double cell_length() const { return 2.0 * window_ / static_cast<double>(mask_.size()); }

    bool contains(std::size_t i) const { return mask_[i] != 0; }
    void set(std::size_t i, bool on = true) { mask_[i] = on ? 1 : 0; }

    double measure() const;
    std::size_t cell_count() const;

    MeasurableSet intersect(const MeasurableSet& o) const;
    MeasurableSet unite(const MeasurableSet& o) const;
    MeasurableSet setminus(const MeasurableSet& o) const;
    bool subset_of(const MeasurableSet& o) const;

    bool operator==(const MeasurableSet& o) const = default;

private:
    double window_;
    std::vector<std::uint8_t> mask_;
};

// Frequency projection S_{m,n} f: spectral multiplication by the indicator of
// [m, n], endpoints included when a grid frequency lands exactly on them.
SampledFunction partial_sum(const SampledFunction& f, double m, double n);

// Pointwise max over a finite set of (m, n) pairs of |S_{m,n} f(x)|.
// Monotone nondecreasing in the pair set.
std::vector<double> maximal_partial_sum(const SampledFunction& f,
                                        const std::vector<std::pair<double, double>>& pairs);

// Reference implementation of S_{m,n} by direct quadrature convolution with
// the kernel e^{i pi x (m+n)} sin(pi x (n-m)) / (pi x). O(N^2); used for
// cross-checks against the spectral route.
SampledFunction partial_sum_via_kernel(const SampledFunction& f, double m, double n);

// A function sampled on the circle [0, 1) at `cells` points; Fourier
// coefficients by periodic quadrature of the samples.
class PeriodicFunction {
public:
    PeriodicFunction(std::size_t cells, ValueSpace space);

    std::size_t size() const { return count_; }
    const ValueSpace& space() const { return space_; }
    int components() const { return space_.components(); }
    double position(std::size_t i) const {
        return static_cast<double>(i) / static_cast<double>(count_);
    }
    MutableValueView value(std::size_t i) {
        return MutableValueView(data_.data() + i * components(), components());
    }
    ValueView value(std::size_t i) const {
        return ValueView(data_.data() + i * components(), components());
    }
    std::vector<Complex>& raw() { return data_; }
    const std::vector<Complex>& raw() const { return data_; }

private:
    std::size_t count_;
    ValueSpace space_;
    std::vector<Complex> data_;
};

// Fourier coefficient vector fhat(k) (one value) for |k| <= cells/2 - 1.
BanachValue periodic_coefficient(const PeriodicFunction& f, std::int64_t k);

// s_{m,n} f = sum_{k=m}^{n} fhat(k) e^{2 pi i k x}; m <= n integers within
// the resolvable band.
PeriodicFunction periodic_partial_sum(const PeriodicFunction& f, std::int64_t m,
                                      std::int64_t n);

// Pointwise max of value norms of s_{m,n} f over a finite set of (m, n).
std::vector<double> periodic_maximal(const PeriodicFunction& f,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs);

// Grid sup distance between two periodic functions in the value-space norm.
double periodic_sup_distance(const PeriodicFunction& a, const PeriodicFunction& b);

// The model Carleson operator over a tile collection:
//   C_N f = sum_P <f, phi_P> phi_P(x) 1_{omega_{P,u}}(N(x)).
// Tiles are accumulated in canonical order so that any regrouping of the
// same tiles reproduces the result exactly.
SampledFunction model_carleson(const WavePacketFactory& factory, const SampledFunction& f,
                               const FrequencyChoice& choice,
                               const std::vector<Tile>& tiles);

// Same operator with the tiles given in parts; the parts are flattened and
// accumulated in the identical canonical order (set-partition bookkeeping).
SampledFunction model_carleson_grouped(const WavePacketFactory& factory,
                                       const SampledFunction& f,
                                       const FrequencyChoice& choice,
                                       const std::vector<std::vector<Tile>>& parts);

// Tree operator A_T f = sum_{P in T} <f, phi_P> phi_P.
SampledFunction tree_operator(const WavePacketFactory& factory, const Tree& tree,
                              const SampledFunction& f);

// B_T f = sum_P eps_P <f, phi_P> phi_P for unimodular eps (|eps_P| = 1,
// validated; one constant per member in the tree's canonical tile order).
SampledFunction signed_tree_operator(const WavePacketFactory& factory, const Tree& tree,
                                     const SampledFunction& f,
                                     const std::vector<Complex>& unimodular);

// Hardy--Littlewood maximal function over grid-aligned intervals within the
// window: dyadic lengths, starts on a 1/refinement sublattice of each length.
// Single-cell intervals are always included.
std::vector<double> hardy_littlewood(const SampledFunction& f, int refinement = 4);

// Restriction of the maximal function to indicator data (used by the major
// subset construction): f = 1_S.
std::vector<double> hardy_littlewood_indicator(const MeasurableSet& s, int refinement = 4);

}  // namespace phaseplane
