// Sparse matrix plumbing and the two linear solvers, checked against dense
// references small enough to verify by hand.

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "thermelt/linalg.hpp"

using namespace thermelt;
using Catch::Approx;

namespace {

// Dense mat-vec for cross-checking the CSR product.
std::vector<double> dense_multiply(const std::vector<std::vector<double>>& a,
                                   const std::vector<double>& x) {
    std::vector<double> y(a.size(), 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

// Stiffness-plus-mass tridiagonal system, symmetric positive definite.
CsrMatrix laplacian_system(int n, std::vector<double>& rhs) {
    std::vector<std::vector<int>> pattern(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        pattern[static_cast<size_t>(i)].push_back(i);
        if (i > 0) pattern[static_cast<size_t>(i)].push_back(i - 1);
        if (i + 1 < n) pattern[static_cast<size_t>(i)].push_back(i + 1);
    }
    CsrMatrix a = CsrMatrix::from_pattern(n, pattern);
    for (int i = 0; i < n; ++i) {
        a.add(i, i, 2.5);
        if (i > 0) a.add(i, i - 1, -1.0);
        if (i + 1 < n) a.add(i, i + 1, -1.0);
    }
    rhs.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) rhs[static_cast<size_t>(i)] = 1.0 + 0.1 * i;
    return a;
}

}  // namespace

TEST_CASE("CSR storage honours the sparsity pattern", "[linalg]") {
    CsrMatrix a = CsrMatrix::from_pattern(3, {{0, 1}, {0, 1, 2}, {2, 1}});

    SECTION("entries inside the pattern are addressable and accumulate") {
        a.at(0, 0) = 4.0;
        a.add(0, 0, 0.5);
        a.add(1, 2, -2.0);
        CHECK(a.get(0, 0) == 4.5);
        CHECK(a.get(1, 2) == -2.0);
        CHECK(a.get(2, 0) == 0.0);
        CHECK(a.rows() == 3);
    }

    SECTION("entries outside the pattern throw on write access") {
        CHECK_THROWS_AS(a.at(0, 2), std::out_of_range);
        CHECK_THROWS_AS(a.at(2, 0), std::out_of_range);
    }

    SECTION("set_zero keeps the pattern but clears values") {
        a.at(1, 1) = 7.0;
        a.set_zero();
        CHECK(a.get(1, 1) == 0.0);
        CHECK_NOTHROW(a.at(1, 1));
    }

    SECTION("duplicate columns in the pattern collapse to one slot") {
        CsrMatrix b = CsrMatrix::from_pattern(2, {{0, 0, 1}, {1}});
        b.add(0, 0, 1.0);
        b.add(0, 0, 1.0);
        CHECK(b.get(0, 0) == 2.0);
        CHECK(b.row_end(0) - b.row_begin(0) == 2);
    }
}

TEST_CASE("CSR product matches a dense reference", "[linalg]") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    const int n = 7;
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<int>> pattern(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((i + j) % 3 != 1) {
                pattern[static_cast<size_t>(i)].push_back(j);
                dense[static_cast<size_t>(i)][static_cast<size_t>(j)] = u(gen);
            }

    CsrMatrix a = CsrMatrix::from_pattern(n, pattern);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (dense[static_cast<size_t>(i)][static_cast<size_t>(j)] != 0.0)
                a.add(i, j, dense[static_cast<size_t>(i)][static_cast<size_t>(j)]);

    std::vector<double> x(n), y(n);
    for (auto& v : x) v = u(gen);
    a.multiply(x, y);

    const std::vector<double> ref = dense_multiply(dense, x);
    for (int i = 0; i < n; ++i)
        CHECK(y[static_cast<size_t>(i)] == Approx(ref[static_cast<size_t>(i)]).margin(1e-14));
}

TEST_CASE("bandwidth reports the widest off-diagonal reach", "[linalg]") {
    CsrMatrix tri = CsrMatrix::from_pattern(4, {{0, 1}, {0, 1, 2}, {1, 2, 3}, {2, 3}});
    CHECK(tri.bandwidth() == 1);

    CsrMatrix wide = CsrMatrix::from_pattern(4, {{0, 3}, {1}, {2}, {0, 3}});
    CHECK(wide.bandwidth() == 3);

    CsrMatrix diag = CsrMatrix::from_pattern(2, {{0}, {1}});
    CHECK(diag.bandwidth() == 0);
}

TEST_CASE("tridiagonal solve reproduces a known solution", "[linalg]") {
    // Solve A x = b where x is chosen first, so b carries no rounding beyond
    // one mat-vec.
    const int n = 40;
    std::vector<double> rhs;
    CsrMatrix a = laplacian_system(n, rhs);

    std::vector<double> x_ref(n);
    for (int i = 0; i < n; ++i) x_ref[static_cast<size_t>(i)] = std::sin(0.3 * i) + 0.5;
    std::vector<double> b(n);
    a.multiply(x_ref, b);

    const std::vector<double> x = solve_tridiagonal(a, b);
    for (int i = 0; i < n; ++i)
        CHECK(x[static_cast<size_t>(i)] == Approx(x_ref[static_cast<size_t>(i)]).margin(1e-12));
}

TEST_CASE("tridiagonal solve rejects wider patterns", "[linalg]") {
    CsrMatrix a = CsrMatrix::from_pattern(3, {{0, 2}, {1}, {0, 2}});
    a.add(0, 0, 1.0);
    a.add(1, 1, 1.0);
    a.add(2, 2, 1.0);
    a.add(0, 2, 0.5);
    a.add(2, 0, 0.5);
    CHECK_THROWS_AS(solve_tridiagonal(a, {1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("Jacobi-preconditioned CG agrees with the direct solve", "[linalg]") {
    const int n = 60;
    std::vector<double> b;
    CsrMatrix a = laplacian_system(n, b);

    const std::vector<double> direct = solve_tridiagonal(a, b);
    const CgResult cg = solve_cg_jacobi(a, b, 1e-12);

    REQUIRE(cg.converged);
    CHECK(cg.iterations > 0);
    CHECK(cg.iterations < n + 1);
    for (int i = 0; i < n; ++i)
        CHECK(cg.x[static_cast<size_t>(i)] ==
              Approx(direct[static_cast<size_t>(i)]).margin(1e-9));

    // Residual reported by the solver is consistent with the returned iterate.
    std::vector<double> ax(static_cast<size_t>(n));
    a.multiply(cg.x, ax);
    for (int i = 0; i < n; ++i) ax[static_cast<size_t>(i)] -= b[static_cast<size_t>(i)];
    CHECK(norm2(ax) <= 1e-12 * norm2(b) * 10.0);
}

TEST_CASE("CG rejects systems it cannot handle", "[linalg]") {
    SECTION("zero diagonal") {
        CsrMatrix a = CsrMatrix::from_pattern(2, {{0, 1}, {0, 1}});
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        CHECK_THROWS_AS(solve_cg_jacobi(a, {1.0, 1.0}), std::runtime_error);
    }

    SECTION("indefinite matrix") {
        CsrMatrix a = CsrMatrix::from_pattern(2, {{0, 1}, {0, 1}});
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(0, 1, 4.0);
        a.add(1, 0, 4.0);
        CHECK_THROWS_AS(solve_cg_jacobi(a, {1.0, -1.0}), std::runtime_error);
    }
}

TEST_CASE("dot and norm2 basics", "[linalg]") {
    const std::vector<double> a{3.0, -4.0};
    CHECK(dot(a, a) == Approx(25.0));
    CHECK(norm2(a) == Approx(5.0));
    CHECK(dot({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}) == Approx(32.0));
}
