#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phaseplane/sampled.hpp"
#include "phaseplane/values.hpp"

using namespace phaseplane;

namespace {

std::vector<Complex> random_matrix(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Complex> m(static_cast<std::size_t>(dim) * dim);
    for (Complex& z : m) z = Complex(gauss(rng), gauss(rng));
    return m;
}

// Closed-form singular values of a 2x2 complex matrix: the eigenvalues of
// A^H A solve s^2 - T s + D = 0 with T the squared Frobenius norm and D the
// squared absolute determinant.
std::pair<double, double> svd2x2_oracle(const std::vector<Complex>& a) {
    const double T = std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]) + std::norm(a[3]);
    const Complex det = a[0] * a[3] - a[1] * a[2];
    const double D = std::norm(det);
    const double disc = std::sqrt(std::max(0.0, T * T - 4.0 * D));
    const double hi = std::sqrt((T + disc) / 2.0);
    const double lo = std::sqrt(std::max(0.0, (T - disc) / 2.0));
    return {hi, lo};
}

}  // namespace

TEST_SUITE("values") {

TEST_CASE("schatten norm of the 2x2 identity at p = 2 is sqrt(2)") {
    const std::vector<Complex> eye{{1, 0}, {0, 0}, {0, 0}, {1, 0}};
    CHECK(schatten_norm(2, eye, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("schatten norm of diag(3,4) at p = infinity is 4") {
    const std::vector<Complex> d{{3, 0}, {0, 0}, {0, 0}, {4, 0}};
    CHECK(schatten_norm(2, d, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("singular values of random 2x2 matrices match the closed form") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 500; ++trial) {
        const std::vector<Complex> a = random_matrix(rng, 2);
        const auto [hi, lo] = svd2x2_oracle(a);
        const std::vector<double> sigma = singular_values(2, a);
        REQUIRE(sigma.size() == 2);
        CHECK(sigma[0] == doctest::Approx(hi).epsilon(1e-10));
        CHECK(sigma[1] == doctest::Approx(lo).epsilon(1e-10));
    }
}

TEST_CASE("norm axioms hold on random triples") {
    std::mt19937_64 rng(42);
    const ValueSpace spaces[] = {ValueSpace::scalar(), ValueSpace::hilbert(4),
                                 ValueSpace::schatten(4.0 / 3.0, 3),
                                 ValueSpace::schatten(4.0, 2)};
    for (const ValueSpace& space : spaces) {
        CHECK(value_norm(space, BanachValue::zero(space).data) == 0.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            BanachValue x = BanachValue::zero(space), y = BanachValue::zero(space);
            for (std::size_t k = 0; k < x.data.size(); ++k) {
                x.data[k] = Complex(gauss(rng), gauss(rng));
                y.data[k] = Complex(gauss(rng), gauss(rng));
            }
            const Complex lambda(gauss(rng), gauss(rng));
            BanachValue sx = x;
            sx *= lambda;
            CHECK(sx.norm() == doctest::Approx(std::abs(lambda) * x.norm()).epsilon(1e-10));
            BanachValue sum = x;
            sum += y;
            CHECK(sum.norm() <= x.norm() + y.norm() + 1e-10);
        }
    }
}

TEST_CASE("dual pairing anchors") {
    const ValueSpace h = ValueSpace::hilbert(3);
    BanachValue e1 = BanachValue::identity(h);
    CHECK(dual_pair(e1, BanachValue::zero(h)) == Complex{0.0, 0.0});
    CHECK(dual_pair(e1, e1) == Complex{1.0, 0.0});
}

TEST_CASE("Hoelder bound for the Schatten trace pairing on random pairs") {
    std::mt19937_64 rng(43);
    for (double p : {4.0 / 3.0, 2.0, 3.0, 4.0}) {
        const double pp = conjugate_exponent(p);
        for (int trial = 0; trial < 250; ++trial) {
            const std::vector<Complex> a = random_matrix(rng, 3);
            const std::vector<Complex> b = random_matrix(rng, 3);
            const double lhs = std::abs(value_dual_pair(a, b));
            const double rhs = schatten_norm(3, a, p) * schatten_norm(3, b, pp);
            CHECK(lhs <= rhs + 1e-10);
        }
    }
}

TEST_CASE("1x1 Schatten degenerates to the scalar absolute value") {
    std::mt19937_64 rng(44);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double p : {1.5, 2.0, 4.0, std::numeric_limits<double>::infinity()}) {
        for (int trial = 0; trial < 50; ++trial) {
            const std::vector<Complex> a{Complex(gauss(rng), gauss(rng))};
            CHECK(schatten_norm(1, a, p) == doctest::Approx(std::abs(a[0])).epsilon(1e-14));
        }
    }
}

TEST_CASE("conjugate exponents") {
    CHECK(conjugate_exponent(2.0) == doctest::Approx(2.0));
    CHECK(conjugate_exponent(4.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(conjugate_exponent(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(dual_space(ValueSpace::schatten(4.0, 2)).p ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("quadrature L^p norms: zero, plateau, Gaussian") {
    SampledFunction zero = SampledFunction::scalar(320.0, 2048);
    CHECK(lp_norm(zero, 1.0) == 0.0);
    CHECK(lp_norm(zero, 2.0) == 0.0);

    // Indicator-like plateau of height 1 on [0, 1).
    SampledFunction plateau = SampledFunction::scalar(320.0, 4096);
    std::size_t cells = 0;
    for (std::size_t i = 0; i < plateau.size(); ++i) {
        const double x = plateau.position(i);
        if (x >= 0.0 && x < 1.0) {
            plateau.scalar_at(i) = Complex{1.0, 0.0};
            ++cells;
        }
    }
    const double width = static_cast<double>(cells) * plateau.step();
    for (double p : {1.0, 2.0, 4.0}) {
        CHECK(lp_norm(plateau, p) == doctest::Approx(std::pow(width, 1.0 / p)).epsilon(1e-12));
    }
    CHECK(lp_norm(plateau, std::numeric_limits<double>::infinity()) == 1.0);

    // Gaussian against the closed-form integral: ||e^{-pi x^2}||_p = p^{-1/(2p)}.
    SampledFunction gauss = SampledFunction::scalar(320.0, 8192);
    for (std::size_t i = 0; i < gauss.size(); ++i) {
        const double x = gauss.position(i);
        gauss.scalar_at(i) = Complex(std::exp(-std::numbers::pi * x * x), 0.0);
    }
    for (double p : {1.0, 2.0, 4.0}) {
        const double oracle = std::pow(p, -1.0 / (2.0 * p));
        CHECK(lp_norm(gauss, p) == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("invalid exponents and dimensions are rejected") {
    CHECK_THROWS_AS(ValueSpace::schatten(1.0, 2).validate(), ConfigError);
    CHECK_THROWS_AS(ValueSpace::schatten(2.0, 9).validate(), ConfigError);
    const std::vector<Complex> a{{1, 0}};
    CHECK_THROWS_AS(schatten_norm(1, a, 0.5), Error);
    const std::vector<Complex> bad{{std::numeric_limits<double>::quiet_NaN(), 0}};
    CHECK_THROWS_AS(value_norm(ValueSpace::scalar(), bad), Error);
}

}  // TEST_SUITE
