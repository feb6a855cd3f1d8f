#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "waveguide/matrix.hpp"

#include "oracles.hpp"

using namespace waveguide;

TEST_CASE("determinant of small known matrices") {
    CMatrix m(2, 2);
    m(0, 0) = {1, 0};
    m(0, 1) = {2, 0};
    m(1, 0) = {3, 0};
    m(1, 1) = {4, 0};
    CHECK(std::abs(det_lu(m) - cdouble(-2.0)) < 1e-14);

    CMatrix c(2, 2);
    c(0, 0) = {0, 1};
    c(0, 1) = {1, 0};
    c(1, 0) = {1, 0};
    c(1, 1) = {0, 1};
    // det = i*i - 1 = -2
    CHECK(std::abs(det_lu(c) - cdouble(-2.0)) < 1e-14);

    CHECK(std::abs(det_lu(CMatrix::identity(7)) - cdouble(1.0)) < 1e-14);
}

TEST_CASE("determinant is multiplicative") {
    oracles::Rng rng;
    const int n = 6;
    CMatrix a(n, n), b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            a(i, j) = {rng.centered(), rng.centered()};
            b(i, j) = {rng.centered(), rng.centered()};
        }
    const cdouble lhs = det_lu(matmul(a, b));
    const cdouble rhs = det_lu(a) * det_lu(b);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
}

TEST_CASE("lu solve reproduces the right-hand side") {
    oracles::Rng rng;
    const int n = 8, m = 3;
    CMatrix a(n, n), x(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = {rng.centered(), rng.centered()};
        a(i, i) += 4.0;
        for (int j = 0; j < m; ++j) x(i, j) = {rng.centered(), rng.centered()};
    }
    CMatrix rhs = matmul(a, x);
    CMatrix a_copy = a;
    solve_lu_inplace(a_copy, rhs);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) worst = std::max(worst, std::abs(rhs(i, j) - x(i, j)));
    CHECK(worst < 1e-12);
}

TEST_CASE("mgs orthonormalizes rows and preserves the row space") {
    oracles::Rng rng;
    const int n = 4, c = 8;
    CMatrix m(n, c);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = {rng.centered(), rng.centered()};
    CMatrix orig = m;
    REQUIRE(mgs_rows(m));
    CHECK(gram_defect(m) < 1e-14);

    // each original row must lie in the span of the orthonormal rows
    for (int i = 0; i < n; ++i) {
        std::vector<cdouble> residual(orig.row(i), orig.row(i) + c);
        for (int j = 0; j < n; ++j) {
            cdouble proj = 0.0;
            for (int l = 0; l < c; ++l) proj += std::conj(m(j, l)) * residual[l];
            for (int l = 0; l < c; ++l) residual[l] -= proj * m(j, l);
        }
        double nrm = 0.0;
        for (const cdouble& v : residual) nrm += std::norm(v);
        CHECK(std::sqrt(nrm) < 1e-12);
    }
}

TEST_CASE("mgs flags rank deficiency") {
    CMatrix m(2, 4);
    for (int j = 0; j < 4; ++j) {
        m(0, j) = {1.0 * j, 0.5};
        m(1, j) = cdouble(2.0, 0.0) * m(0, j);
    }
    CHECK_FALSE(mgs_rows(m));
}
