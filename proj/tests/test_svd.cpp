#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "podrom/rng.hpp"
#include "podrom/svd.hpp"

using namespace podrom;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    DenseMatrix A(rows, cols);
    for (double& v : A.data) v = rng.uniform(-1.0, 1.0);
    return A;
}

DenseMatrix rank_limited(std::size_t rows, std::size_t cols, std::size_t rank, std::uint64_t seed) {
    Rng rng(seed);
    DenseMatrix L(rows, rank), R(rank, cols);
    for (double& v : L.data) v = rng.normal();
    for (double& v : R.data) v = rng.normal();
    return matmul(L, R);
}

double max_reconstruction_defect(const DenseMatrix& U, const DenseMatrix& V) {
    // || U - V V^T U ||_max; equals the thin-SVD reconstruction defect when V
    // holds all min(rows, cols) left singular vectors.
    const DenseMatrix Q = project_columns(V, U, V.cols);
    double worst = 0.0;
    for (std::size_t i = 0; i < U.rows; ++i)
        for (std::size_t j = 0; j < U.cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < V.cols; ++k) acc += V(i, k) * Q(k, j);
            worst = std::max(worst, std::abs(U(i, j) - acc));
        }
    return worst;
}

} // namespace

TEST_CASE("thin_svd on a rank-1 stack of e1 columns") {
    DenseMatrix U(3, 3, 0.0);
    U(0, 0) = U(0, 1) = U(0, 2) = 1.0;
    const SvdResult r = thin_svd(U, 1);
    CHECK(r.s.size() == 3);
    CHECK(r.s[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(r.s[1] == 0.0);
    CHECK(r.s[2] == 0.0);
    CHECK(std::abs(r.V(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(r.V(1, 0)) < 1e-12);
    CHECK(std::abs(r.V(2, 0)) < 1e-12);
}

TEST_CASE("thin_svd of the identity") {
    const DenseMatrix I = DenseMatrix::identity(4);
    const SvdResult r = thin_svd(I, 4);
    for (double s : r.s) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(orthonormality_defect(r.V, 4) <= 1e-10);
}

TEST_CASE("thin_svd singular values match an independent dense eigensolver") {
    const DenseMatrix U = random_matrix(50, 200, 42);
    const SvdResult r = thin_svd(U, 50);
    const std::vector<double> lambda = oracle::sym_eigenvalues(gram_rows(U));
    REQUIRE(r.s.size() == 50);
    for (std::size_t k = 0; k < 50; ++k)
        CHECK(r.s[k] * r.s[k] == doctest::Approx(lambda[k]).epsilon(1e-10));
}

TEST_CASE("thin_svd full-rank reconstruction and orthonormality") {
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{12, 7}, {7, 12}, {9, 9}}) {
        const DenseMatrix U = random_matrix(rows, cols, 7 + rows + cols);
        const std::size_t full = std::min(rows, cols);
        const SvdResult r = thin_svd(U, full);
        CHECK(orthonormality_defect(r.V, full) <= 1e-10);
        CHECK(max_reconstruction_defect(U, r.V) <= 1e-9 * max_abs(U));
        for (std::size_t k = 1; k < r.s.size(); ++k) CHECK(r.s[k] <= r.s[k - 1]);
        for (double s : r.s) CHECK(s >= 0.0);
    }
}

TEST_CASE("thin_svd completes the basis on rank-deficient tall input") {
    const DenseMatrix U = rank_limited(10, 4, 2, 3);
    const SvdResult r = thin_svd(U, 4);
    CHECK(orthonormality_defect(r.V, 4) <= 1e-10);
    CHECK(r.s[2] <= 1e-7 * r.s[0]);
}

TEST_CASE("thin_svd input validation") {
    const DenseMatrix U = random_matrix(5, 8, 1);
    CHECK_THROWS_AS((void)thin_svd(U, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)thin_svd(U, 6), std::invalid_argument);
    DenseMatrix bad = U;
    bad(2, 2) = std::nan("");
    CHECK_THROWS_AS((void)thin_svd(bad, 2), std::invalid_argument);
}

TEST_CASE("randomized_svd matches thin_svd on exactly low-rank input") {
    const DenseMatrix U = rank_limited(80, 300, 5, 11);
    const SvdResult exact = thin_svd(U, 5);
    const SvdResult sketch = randomized_svd(U, 5, 10, 2, 123);
    REQUIRE(sketch.s.size() == 5);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(sketch.s[k] == doctest::Approx(exact.s[k]).epsilon(1e-8));
    CHECK(orthonormality_defect(sketch.V, 5) <= 1e-10);
}

TEST_CASE("randomized_svd rejects a degenerate rank request") {
    const DenseMatrix U = random_matrix(20, 30, 5);
    CHECK_THROWS_AS((void)randomized_svd(U, 0, 10, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)randomized_svd(U, 15, 10, 2, 1), std::invalid_argument);
}

TEST_CASE("randomized_svd is deterministic for a fixed seed") {
    const DenseMatrix U = random_matrix(40, 60, 9);
    const SvdResult a = randomized_svd(U, 8, 10, 2, 77);
    const SvdResult b = randomized_svd(U, 8, 10, 2, 77);
    CHECK(a.s == b.s);
    CHECK(a.V.data == b.V.data);
    const SvdResult c = randomized_svd(U, 8, 10, 2, 78);
    CHECK(a.V.data != c.V.data);
}

TEST_CASE("random_orthonormal produces orthonormal deterministic bases") {
    const DenseMatrix W = random_orthonormal(3, 3, 5);
    CHECK(orthonormality_defect(W, 3) <= 1e-10);

    const DenseMatrix A = random_orthonormal(5, 2, 17);
    const DenseMatrix B = random_orthonormal(5, 2, 17);
    CHECK(A.data == B.data);
    CHECK(orthonormality_defect(A, 2) <= 1e-10);

    CHECK_THROWS_AS((void)random_orthonormal(2, 5, 1), std::invalid_argument);
}

TEST_CASE("one_sided_jacobi flags non-convergence through the sweep cap") {
    // A well-behaved matrix converges in far fewer than 100 sweeps; starving
    // the budget must surface as an error rather than silent garbage.
    const DenseMatrix U = random_matrix(12, 12, 21);
    CHECK_THROWS_AS((void)detail::one_sided_jacobi(U, 0), std::runtime_error);
}

TEST_CASE("thin_svd resolves deep spectral tails to high relative accuracy") {
    // Columns drawn from a map with an exactly known two-scale spectrum:
    // a rank-3 part at O(1) plus a rank-2 part at O(1e-9). The Gram-matrix
    // route would lose the small block entirely.
    Rng rng(77);
    DenseMatrix L(40, 5), R(5, 120);
    for (double& v : L.data) v = rng.normal();
    for (double& v : R.data) v = rng.normal();
    orthonormalize_columns(L);
    DenseMatrix U(40, 120, 0.0);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 120; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 5; ++k) acc += L(i, k) * (k < 3 ? 1.0 : 1e-9) * R(k, j);
            U(i, j) = acc;
        }
    const SvdResult full = thin_svd(U, 5);
    // the tiny block is resolved, far below the Gram-method floor
    CHECK(full.s[3] > 1e-10);
    CHECK(full.s[3] < 1e-7);
    CHECK(full.s[4] > 1e-10);
    CHECK(full.s[5] <= 1e-12 * full.s[0]);
    CHECK(orthonormality_defect(full.V, 5) <= 1e-10);
}
