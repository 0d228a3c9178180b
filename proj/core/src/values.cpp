#include "phaseplane/values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace phaseplane {

void ValueSpace::validate() const {
    if (dim < 1) throw ConfigError("value.dim", "value dimension must be >= 1");
    if (kind == ValueKind::Scalar && dim != 1)
        throw ConfigError("value.dim", "scalar values have dimension 1");
    if (kind == ValueKind::Schatten) {
        if (dim > kMaxMatrixDim)
            throw ConfigError("value.dim", "Schatten dimension capped at 8");
        if (!(p > 1.0))
            throw ConfigError("value.p", "Schatten exponent must lie in (1, inf]");
    }
    if (kind == ValueKind::Hilbert && dim > kMaxMatrixDim * kMaxMatrixDim)
        throw ConfigError("value.dim", "Hilbert dimension capped at 64");
}

std::string ValueSpace::describe() const {
    std::ostringstream os;
    switch (kind) {
        case ValueKind::Scalar: os << "scalar"; break;
        case ValueKind::Hilbert: os << "hilbert(d=" << dim << ")"; break;
        case ValueKind::Schatten: os << "schatten(p=" << p << ",d=" << dim << ")"; break;
    }
    return os.str();
}

double conjugate_exponent(double p) {
    if (std::isinf(p)) return 1.0;
    long double lp = static_cast<long double>(p);
    return static_cast<double>(lp / (lp - 1.0L));
}

ValueSpace dual_space(const ValueSpace& space) {
    if (space.kind != ValueKind::Schatten) return space;
    return ValueSpace::schatten(conjugate_exponent(space.p), space.dim);
}

namespace {

void require_finite(ValueView v) {
    for (const Complex& z : v) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw Error("value has non-finite entries");
    }
}

double frobenius(ValueView v) {
    double s = 0.0;
    for (const Complex& z : v) s += std::norm(z);
    return std::sqrt(s);
}

}  // namespace

std::vector<double> singular_values(int dim, ValueView matrix) {
    if (dim < 1 || dim > kMaxMatrixDim) throw Error("matrix dimension out of range [1,8]");
    if (static_cast<int>(matrix.size()) != dim * dim) throw Error("matrix view size mismatch");
    require_finite(matrix);

    // Work on columns; one-sided Jacobi orthogonalizes column pairs until
    // all off-diagonal Gram entries are negligible.
    std::vector<Complex> a(matrix.begin(), matrix.end());
    auto col = [&](int j, int i) -> Complex& { return a[static_cast<size_t>(i) * dim + j]; };

    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool converged = true;
        for (int q = 1; q < dim; ++q) {
            for (int pcol = 0; pcol < q; ++pcol) {
                double app = 0.0, aqq = 0.0;
                Complex apq{0.0, 0.0};
                for (int i = 0; i < dim; ++i) {
                    app += std::norm(col(pcol, i));
                    aqq += std::norm(col(q, i));
                    apq += std::conj(col(pcol, i)) * col(q, i);
                }
                const double off = std::abs(apq);
                if (off <= 1e2 * eps * std::sqrt(app * aqq) || off == 0.0) continue;
                converged = false;

                // 2x2 Hermitian eigenrotation for [[app, apq], [conj(apq), aqq]].
                const Complex phase = apq / off;
                const double tau = (aqq - app) / (2.0 * off);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < dim; ++i) {
                    const Complex vp = col(pcol, i);
                    const Complex vq = col(q, i);
                    col(pcol, i) = c * vp - s * std::conj(phase) * vq;
                    col(q, i) = s * phase * vp + c * vq;
                }
            }
        }
        if (converged) break;
    }

    std::vector<double> sigma(dim);
    for (int j = 0; j < dim; ++j) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += std::norm(col(j, i));
        sigma[j] = std::sqrt(s);
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<double>());
    return sigma;
}

double schatten_norm(int dim, ValueView matrix, double p) {
    if (!(p > 1.0)) throw Error("Schatten exponent must lie in (1, inf]");
    require_finite(matrix);
    if (p == 2.0) return frobenius(matrix);
    const std::vector<double> sigma = singular_values(dim, matrix);
    if (std::isinf(p)) return sigma.empty() ? 0.0 : sigma.front();
    long double acc = 0.0L;
    for (double s : sigma) acc += std::pow(static_cast<long double>(s), static_cast<long double>(p));
    return static_cast<double>(std::pow(acc, 1.0L / static_cast<long double>(p)));
}

double value_norm(const ValueSpace& space, ValueView v) {
    switch (space.kind) {
        case ValueKind::Scalar:
            require_finite(v);
            return std::abs(v[0]);
        case ValueKind::Hilbert:
            require_finite(v);
            return frobenius(v);
        case ValueKind::Schatten:
            return schatten_norm(space.dim, v, space.p);
    }
    return 0.0;
}

Complex value_dual_pair(ValueView x, ValueView xstar) {
    if (x.size() != xstar.size()) throw Error("dual pairing: kind/dimension mismatch");
    Complex acc{0.0, 0.0};
    for (size_t k = 0; k < x.size(); ++k) acc += x[k] * std::conj(xstar[k]);
    return acc;
}

BanachValue BanachValue::identity(const ValueSpace& s) {
    BanachValue v = zero(s);
    switch (s.kind) {
        case ValueKind::Scalar:
        case ValueKind::Hilbert:
            v.data[0] = Complex{1.0, 0.0};
            break;
        case ValueKind::Schatten:
            for (int i = 0; i < s.dim; ++i) v.data[static_cast<size_t>(i) * s.dim + i] = Complex{1.0, 0.0};
            break;
    }
    return v;
}

BanachValue& BanachValue::operator+=(const BanachValue& o) {
    if (!(space == o.space)) throw Error("value addition: kind mismatch");
    for (size_t k = 0; k < data.size(); ++k) data[k] += o.data[k];
    return *this;
}

BanachValue& BanachValue::operator*=(Complex scale) {
    for (Complex& z : data) z *= scale;
    return *this;
}

Complex dual_pair(const BanachValue& x, const BanachValue& xstar) {
    if (x.space.kind != xstar.space.kind || x.space.dim != xstar.space.dim)
        throw Error("dual pairing: kind mismatch (" + x.space.describe() + " vs " +
                    xstar.space.describe() + ")");
    return value_dual_pair(x.data, xstar.data);
}

}  // namespace phaseplane
