/// Conjugate gradients against the dense LU oracle, failure reporting, and
/// the dense direct solver itself.

#include "catch2/catch_amalgamated.hpp"

#include "capfem/capfem.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace capfem;
using testsupport::max_abs_diff;
using testsupport::random_vector;
using Catch::Matchers::WithinAbs;

namespace {

// dense SPD test matrix M = R^T R / n + I with a full sparse pattern
SparseMatrix random_spd(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = dist(rng);

    std::vector<std::array<int, 2>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
    auto m = SparseMatrix::from_pairs(n, pairs);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += r(k, i) * r(k, j);
            m.at(i, j) = s / n + (i == j ? 1.0 : 0.0);
        }
    return m;
}

} // namespace

// ---- conjugate gradients ----------------------------------------------------

TEST_CASE("cg agrees with the dense LU oracle", "[solver]") {
    const int n = 50;
    auto a = random_spd(n, 20260822u);
    auto b = random_vector(n, 7u);

    auto result = cg_solve(a, b, {1e-12, 0, true});
    auto oracle = dense_solve(to_dense(a), b);

    REQUIRE(max_abs_diff(result.x, oracle) < 1e-9);
    REQUIRE(result.residual <= 1e-11);
    REQUIRE(result.iterations > 0);
    REQUIRE(result.iterations <= 10 * n);
}

TEST_CASE("cg solves the zero system without iterating", "[solver]") {
    auto a = random_spd(20, 3u);
    auto result = cg_solve(a, std::vector<double>(20, 0.0));
    REQUIRE(result.iterations == 0);
    for (double v : result.x) REQUIRE(v == 0.0);
}

TEST_CASE("preconditioned and plain cg agree", "[solver]") {
    auto a = random_spd(40, 11u);
    auto b = random_vector(40, 13u);
    auto with = cg_solve(a, b, {1e-13, 0, true});
    auto without = cg_solve(a, b, {1e-13, 0, false});
    REQUIRE(max_abs_diff(with.x, without.x) < 1e-9);
}

TEST_CASE("a warm start from the solution converges immediately", "[solver]") {
    auto a = random_spd(30, 5u);
    auto b = random_vector(30, 6u);
    auto cold = cg_solve(a, b, {1e-13, 0, true});
    auto warm = cg_solve(a, b, {1e-12, 0, true}, &cold.x);
    REQUIRE(warm.iterations <= 1);
    REQUIRE(max_abs_diff(warm.x, cold.x) < 1e-10);
}

TEST_CASE("cg reports failure with its best iterate", "[solver]") {
    auto a = random_spd(50, 17u);
    auto b = random_vector(50, 19u);
    try {
        cg_solve(a, b, {1e-14, 2, true});
        FAIL("two iterations cannot reach 1e-14");
    } catch (const SolveFailure& f) {
        REQUIRE(f.kind == ErrorKind::solver);
        REQUIRE(f.best_iterate.size() == 50);
        REQUIRE_FALSE(f.residual_history.empty());
        REQUIRE(f.residual_history.size() <= 3);
        // the best iterate is still a usable partial solve
        auto r = a.multiply(f.best_iterate);
        double rn = 0.0, bn = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            rn += (b[i] - r[i]) * (b[i] - r[i]);
            bn += b[i] * b[i];
        }
        REQUIRE(std::sqrt(rn / bn) < 1.0);
    }
}

TEST_CASE("cg validates its arguments", "[solver]") {
    auto a = random_spd(10, 23u);
    REQUIRE_THROWS_AS(cg_solve(a, std::vector<double>(9, 1.0)), Error);
    REQUIRE_THROWS_AS(cg_solve(a, std::vector<double>(10, 1.0), {0.0, 0, true}),
                      Error);
    std::vector<double> nan_rhs(10, 0.0);
    nan_rhs[3] = std::nan("");
    REQUIRE_THROWS_AS(cg_solve(a, nan_rhs), Error);
}

// ---- dense direct solver ----------------------------------------------------

TEST_CASE("dense lu solves a hand-checked system", "[solver]") {
    DenseMatrix a(3);
    a(0, 0) = 2;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 3;
    a(1, 2) = 1;
    a(2, 1) = 1;
    a(2, 2) = 4;
    // x = (1, -2, 3) gives b = A x
    auto x_true = std::vector<double>{1.0, -2.0, 3.0};
    std::vector<double> b{2 * 1 + 1 * -2, 1 * 1 + 3 * -2 + 1 * 3,
                          1 * -2 + 4 * 3};
    auto x = dense_solve(a, b);
    REQUIRE(max_abs_diff(x, x_true) < 1e-13);
}

TEST_CASE("dense lu rejects singular and oversized systems", "[solver]") {
    DenseMatrix s(2); // zero matrix is singular
    REQUIRE_THROWS_AS(dense_solve(s, std::vector<double>(2, 1.0)), Error);

    DenseMatrix big(2001);
    REQUIRE_THROWS_AS(dense_solve(big, std::vector<double>(2001, 0.0)), Error);

    DenseMatrix ok(2);
    ok(0, 0) = 1;
    ok(1, 1) = 1;
    REQUIRE_THROWS_AS(dense_solve(ok, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("sparse to dense preserves entries", "[solver]") {
    auto a = SparseMatrix::from_pairs(3, {{0, 2}});
    a.at(0, 0) = 5;
    a.at(0, 2) = -2;
    a.at(2, 0) = -2;
    auto d = to_dense(a);
    REQUIRE(d(0, 0) == 5.0);
    REQUIRE(d(0, 2) == -2.0);
    REQUIRE(d(0, 1) == 0.0);
    REQUIRE(d(2, 0) == -2.0);
}
