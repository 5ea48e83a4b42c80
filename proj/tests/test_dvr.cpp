#include <doctest.h>

#include <cmath>
#include <numbers>

#include "narg/dvr.hpp"

using namespace narg;

TEST_SUITE("dvr") {

TEST_CASE("three-point grid") {
    const DvrBasis b = build_uniform_dvr(3, 1.0);
    CHECK(b.points == Vector{{-1.0, 0.0, 1.0}});
    CHECK(b.spacing == doctest::Approx(1.0));
    for (Index i = 0; i < 3; ++i)
        CHECK(b.kinetic(i, i) == doctest::Approx(std::numbers::pi * std::numbers::pi / 3.0));
}

TEST_CASE("kinetic matrix entries and symmetry") {
    const DvrBasis b = build_uniform_dvr(11, 2.5);
    const double d2 = b.spacing * b.spacing;
    for (Index m = 0; m < 11; ++m) {
        if (m > 0)
            CHECK(std::abs(b.points(m) - b.points(m - 1) - b.spacing) < 1e-12);
        for (Index n = 0; n < 11; ++n) {
            CHECK(b.kinetic(m, n) == b.kinetic(n, m));
            const double expected =
                m == n ? std::numbers::pi * std::numbers::pi / (3.0 * d2)
                       : 2.0 * ((m - n) % 2 ? -1.0 : 1.0) / (d2 * double((m - n) * (m - n)));
            CHECK(std::abs(b.kinetic(m, n) - expected) < 1e-12);
        }
    }
    CHECK(std::abs(b.points(0) + 2.5) < 1e-12);
    CHECK(std::abs(b.points(10) - 2.5) < 1e-12);
}

TEST_CASE("kinetic matrix is positive semidefinite") {
    const DvrBasis b = build_uniform_dvr(25, 4.0);
    CHECK(eig_hermitian(b.kinetic).values(0) > -1e-10);
}

TEST_CASE("harmonic oscillator spectrum") {
    const DvrBasis b = build_uniform_dvr(40, 8.0);
    const Matrix h = 0.5 * b.kinetic + b.diagonal([](double x) { return 0.5 * x * x; });
    const Vector e = eig_hermitian(h).values;
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(e(k) - (k + 0.5)) < 1e-6);
}

TEST_CASE("grid convergence at fixed width") {
    auto spectrum = [](Index n) {
        const DvrBasis b = build_uniform_dvr(n, 8.0);
        return Vector(eig_hermitian(0.5 * b.kinetic + b.diagonal([](double x) { return 0.5 * x * x; })).values.head(5));
    };
    CHECK((spectrum(40) - spectrum(60)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("position operators are diagonal") {
    const DvrBasis b = build_uniform_dvr(7, 3.0);
    const Matrix x2 = b.diagonal([](double x) { return x * x; });
    for (Index m = 0; m < 7; ++m)
        for (Index n = 0; n < 7; ++n)
            CHECK(x2(m, n) == (m == n ? b.points(m) * b.points(m) : 0.0));
}

TEST_CASE("invalid grids") {
    CHECK_THROWS_AS(build_uniform_dvr(2, 1.0), Error);
    CHECK_THROWS_AS(build_uniform_dvr(5, 0.0), Error);
    CHECK_THROWS_AS(build_uniform_dvr(5, std::numeric_limits<double>::infinity()), Error);
}

}
