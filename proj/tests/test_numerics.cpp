#include <doctest.h>

#include <random>

#include "narg/numerics.hpp"

using namespace narg;

namespace {

Matrix random_symmetric(Index n, std::mt19937 &rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j)
            m(i, j) = m(j, i) = g(rng);
    return m;
}

} // namespace

TEST_SUITE("numerics") {

TEST_CASE("diagonal input keeps the identity basis") {
    Matrix m = Vector{{1.0, 3.0}}.asDiagonal();
    const EigenPairs p = eig_hermitian(m);
    CHECK(p.values(0) == doctest::Approx(1.0));
    CHECK(p.values(1) == doctest::Approx(3.0));
    CHECK((p.vectors - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Pauli x spectrum") {
    Matrix m{{0.0, 1.0}, {1.0, 0.0}};
    const EigenPairs p = eig_hermitian(m);
    CHECK(p.values(0) == doctest::Approx(-1.0));
    CHECK(p.values(1) == doctest::Approx(1.0));
}

TEST_CASE("reconstruction, orthonormality and residual over random draws") {
    std::mt19937 rng(7);
    for (int draw = 0; draw < 20; ++draw) {
        const Index n = 2 + draw % 9;
        const Matrix h = random_symmetric(n, rng, draw % 2 ? 1.0 : 300.0);
        const EigenPairs p = eig_hermitian(h);
        const double scale = std::max(1.0, p.values.cwiseAbs().maxCoeff());
        for (Index k = 1; k < n; ++k)
            CHECK(p.values(k) >= p.values(k - 1));
        CHECK((p.vectors.transpose() * p.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((h * p.vectors - p.vectors * p.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-8 * scale);
        const Matrix back = p.vectors * p.values.asDiagonal() * p.vectors.transpose();
        CHECK((back - h).cwiseAbs().maxCoeff() < 1e-10 * scale);
    }
}

TEST_CASE("identical input gives identical output") {
    std::mt19937 rng(11);
    const Matrix h = random_symmetric(12, rng);
    const EigenPairs a = eig_hermitian(h), b = eig_hermitian(h);
    CHECK(a.values == b.values);
    CHECK(a.vectors == b.vectors);
}

TEST_CASE("sign convention: largest component positive") {
    std::mt19937 rng(3);
    const EigenPairs p = eig_hermitian(random_symmetric(8, rng));
    for (Index c = 0; c < p.vectors.cols(); ++c) {
        Index best;
        p.vectors.col(c).cwiseAbs().maxCoeff(&best);
        CHECK(p.vectors(best, c) > 0.0);
    }
}

TEST_CASE("lowest eigenpairs agree with the full spectrum") {
    std::mt19937 rng(5);
    const Matrix h = random_symmetric(30, rng);
    const EigenPairs full = eig_hermitian(h);
    const EigenPairs low = eig_hermitian_lowest(h, 4);
    REQUIRE(low.size() == 4);
    CHECK((low.values - full.values.head(4)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(eig_hermitian_lowest(h, 31), Error);
}

TEST_CASE("complex Hermitian input") {
    ComplexMatrix h(2, 2);
    h << 1.0, std::complex<double>(0.0, -1.0), std::complex<double>(0.0, 1.0), 1.0;
    const ComplexEigenPairs p = eig_hermitian(h);
    CHECK(p.values(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.values(1) == doctest::Approx(2.0));
    const ComplexMatrix back = p.vectors * p.values.cast<std::complex<double>>().asDiagonal() * p.vectors.adjoint();
    CHECK((back - h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("error paths") {
    CHECK_THROWS_WITH_AS(eig_hermitian(Matrix{{0.0, 1.0}, {0.5, 0.0}}), doctest::Contains("NonHermitian"), Error);
    Matrix nan = Matrix::Zero(2, 2);
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        eig_hermitian(nan);
        FAIL("expected NonFinite");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::NonFinite);
    }
    try {
        eig_hermitian(Matrix(Matrix::Zero(2, 3)));
        FAIL("expected DimensionMismatch");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("truncate_low keeps the lowest pairs") {
    EigenPairs p{Vector{{0.0, 1.0, 2.0, 3.0}}, Matrix::Identity(4, 4)};
    const EigenPairs t = truncate_low(p, 2);
    CHECK(t.values == Vector{{0.0, 1.0}});
    CHECK(t.vectors == Matrix::Identity(4, 4).leftCols(2));
    const EigenPairs same = truncate_low(p, 4);
    CHECK(same.values == p.values);
    CHECK(same.vectors == p.vectors);
    CHECK_THROWS_AS(truncate_low(p, 0), Error);
    CHECK_THROWS_AS(truncate_low(p, 5), Error);
}

TEST_CASE("truncate_low tie-break and multiplet closing") {
    EigenPairs p{Vector{{0.0, 1.0, 1.0, 2.0}}, Matrix::Identity(4, 4)};
    const EigenPairs t = truncate_low(p, 2);
    CHECK(t.values == Vector{{0.0, 1.0}});
    CHECK(t.vectors.col(1) == Matrix::Identity(4, 4).col(1));
    const EigenPairs closed = truncate_low(p, 2, true);
    CHECK(closed.size() == 3);
}

TEST_CASE("degenerate clusters are rotated onto a commuting operator") {
    // H = diag(0, 1, 1), N distinguishes the two degenerate states after a
    // rotation that mixes them.
    const double c = std::cos(0.3), s = std::sin(0.3);
    Matrix r = Matrix::Identity(3, 3);
    r.block(1, 1, 2, 2) << c, -s, s, c;
    const Matrix h = r * Vector{{0.0, 1.0, 1.0}}.asDiagonal() * r.transpose();
    const Matrix n = r * Vector{{0.0, 2.0, 5.0}}.asDiagonal() * r.transpose();
    EigenPairs p = eig_hermitian(h);
    const std::vector<Matrix> ops{n};
    resolve_degeneracies(p, ops);
    const Matrix nn = p.vectors.transpose() * n * p.vectors;
    CHECK(std::abs(nn(1, 2)) < 1e-12);
    CHECK(nn(1, 1) == doctest::Approx(2.0));
    CHECK(nn(2, 2) == doctest::Approx(5.0));
    CHECK((h * p.vectors - p.vectors * p.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hermiticity defect") {
    CHECK(hermiticity_defect(Matrix(Matrix::Identity(3, 3))) == 0.0);
    CHECK(hermiticity_defect(Matrix{{0.0, 2.0}, {0.0, 0.0}}) == doctest::Approx(1.0));
}

}
