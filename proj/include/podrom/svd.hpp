#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "podrom/matrix.hpp"
#include "podrom/rng.hpp"

namespace podrom {

// Singular values below 1e-14 * s_max are round-off of exact zero modes and
// clamp to 0. The floor sits on the singular values, not their squares: the
// QR + one-sided-Jacobi path below resolves the spectrum to near machine
// relative precision, and fast-decaying snapshot sets carry genuine tail
// mass well under 1e-14 * s_max^2.
inline constexpr double kSingularValueClampRel = 1e-14;

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns that
/// collapse below `drop_tol` of their original norm are zeroed; returns the
/// number of surviving (orthonormal) columns, packed to the left.
inline std::size_t orthonormalize_columns(DenseMatrix& Y, double drop_tol = 1e-12) {
    const std::size_t m = Y.rows;
    std::size_t kept = 0;
    for (std::size_t j = 0; j < Y.cols; ++j) {
        std::vector<double> v = get_col(Y, j);
        const double initial = norm2(v);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < kept; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < m; ++i) proj += Y(i, k) * v[i];
                for (std::size_t i = 0; i < m; ++i) v[i] -= proj * Y(i, k);
            }
        }
        const double nrm = norm2(v);
        if (initial == 0.0 || nrm <= drop_tol * initial) continue;
        for (std::size_t i = 0; i < m; ++i) Y(i, kept) = v[i] / nrm;
        ++kept;
    }
    for (std::size_t j = kept; j < Y.cols; ++j)
        for (std::size_t i = 0; i < m; ++i) Y(i, j) = 0.0;
    return kept;
}

struct SvdResult {
    DenseMatrix V;         // left singular vectors, n_rows x N
    std::vector<double> s; // nonincreasing, nonnegative
};

namespace detail {

// Householder QR of a tall matrix A (m x n, m >= n), in place. The upper
// triangle becomes R; the reflector vectors live below the diagonal with
// their scaling factors in `beta`.
struct HouseholderQr {
    DenseMatrix A;
    std::vector<double> beta;

    explicit HouseholderQr(DenseMatrix input) : A(std::move(input)), beta(A.cols, 0.0) {
        const std::size_t m = A.rows, n = A.cols;
        if (m < n) throw std::invalid_argument("HouseholderQr: matrix must be tall");
        for (std::size_t k = 0; k < n; ++k) {
            double sigma = 0.0;
            for (std::size_t i = k + 1; i < m; ++i) sigma += A(i, k) * A(i, k);
            const double akk = A(k, k);
            const double alpha = std::sqrt(akk * akk + sigma);
            if (alpha == 0.0) continue; // column already zero
            const double rkk = akk >= 0.0 ? -alpha : alpha;
            const double v0 = akk - rkk;
            // v = (v0, A(k+1..m-1, k)); beta = 2 / ||v||^2
            const double vnorm2 = v0 * v0 + sigma;
            if (vnorm2 == 0.0) continue;
            beta[k] = 2.0 / vnorm2;
            A(k, k) = rkk;
            for (std::size_t j = k + 1; j < n; ++j) {
                double dot_vj = v0 * A(k, j);
                for (std::size_t i = k + 1; i < m; ++i) dot_vj += A(i, k) * A(i, j);
                const double f = beta[k] * dot_vj;
                A(k, j) -= f * v0;
                for (std::size_t i = k + 1; i < m; ++i) A(i, j) -= f * A(i, k);
            }
            // store v below the diagonal, scaled so the head is v0
            for (std::size_t i = k + 1; i < m; ++i) A(i, k) = A(i, k);
            A(k, k) = rkk;
            householder_heads.push_back(v0);
            householder_cols.push_back(k);
        }
    }

    DenseMatrix r_factor() const {
        DenseMatrix R(A.cols, A.cols, 0.0);
        for (std::size_t i = 0; i < A.cols; ++i)
            for (std::size_t j = i; j < A.cols; ++j) R(i, j) = A(i, j);
        return R;
    }

    // B (n x c) -> Q * [B; 0] (m x c), applying reflectors in reverse.
    DenseMatrix apply_q(const DenseMatrix& B) const {
        const std::size_t m = A.rows, n = A.cols;
        if (B.rows != n) throw std::invalid_argument("apply_q: shape mismatch");
        DenseMatrix M(m, B.cols, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < B.cols; ++j) M(i, j) = B(i, j);
        for (std::size_t idx = householder_cols.size(); idx > 0; --idx) {
            const std::size_t k = householder_cols[idx - 1];
            const double v0 = householder_heads[idx - 1];
            const double bk = beta[k];
            for (std::size_t j = 0; j < B.cols; ++j) {
                double dot_vj = v0 * M(k, j);
                for (std::size_t i = k + 1; i < m; ++i) dot_vj += A(i, k) * M(i, j);
                const double f = bk * dot_vj;
                M(k, j) -= f * v0;
                for (std::size_t i = k + 1; i < m; ++i) M(i, j) -= f * A(i, k);
            }
        }
        return M;
    }

private:
    std::vector<double> householder_heads;
    std::vector<std::size_t> householder_cols;
};

struct JacobiSvdSmall {
    DenseMatrix V;         // m x n, orthonormal columns where s > 0
    std::vector<double> s; // nonincreasing
};

// One-sided Jacobi on a small matrix: post-rotations orthogonalize the
// columns, which then are the left singular vectors scaled by s. Columns are
// re-sorted by norm before every sweep (de Rijk pivoting) and the pair Gram
// entries are computed fresh per rotation; cached norms drift at the
// eps * ||A||^2 level, which is fatal for deep spectral tails. Convergence
// once every pair satisfies |a_pq| <= tol sqrt(a_pp a_qq); the sweep budget
// is fixed and exceeding it signals an ill-conditioned input.
inline JacobiSvdSmall one_sided_jacobi(DenseMatrix A, std::size_t max_sweeps = 100,
                                       double tol = 1e-12) {
    const std::size_t m = A.rows, n = A.cols;
    std::vector<double> colsq(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) colsq[j] = col_sqnorm(A, j);

    // Columns whose mass sits below the singular-value clamp floor end up
    // reported as exact zeros, and rotations against them only churn
    // round-off noise without converging. Freeze them. The Frobenius mass
    // bounds s_max^2 from above, so this floor never freezes live columns.
    double total = 0.0;
    for (double c : colsq) total += c;
    const double negligible = (kSingularValueClampRel * kSingularValueClampRel) * total;

    bool converged = n <= 1;
    for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t j = 0; j < n; ++j) colsq[j] = col_sqnorm(A, j);
        for (std::size_t a = 0; a + 1 < n; ++a) {
            std::size_t best = a;
            for (std::size_t b = a + 1; b < n; ++b)
                if (colsq[b] > colsq[best]) best = b;
            if (best != a) {
                for (std::size_t i = 0; i < m; ++i) std::swap(A(i, a), A(i, best));
                std::swap(colsq[a], colsq[best]);
            }
        }

        converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double aip = A(i, p);
                    const double aiq = A(i, q);
                    app += aip * aip;
                    aqq += aiq * aiq;
                    apq += aip * aiq;
                }
                if (app <= negligible || aqq <= negligible) continue;
                if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                converged = false;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t i = 0; i < m; ++i) {
                    const double aip = A(i, p);
                    const double aiq = A(i, q);
                    A(i, p) = c * aip - sn * aiq;
                    A(i, q) = sn * aip + c * aiq;
                }
            }
        }
    }
    if (!converged) throw std::runtime_error("one_sided_jacobi: no convergence within sweep budget");

    // Recompute norms and order by decreasing singular value. Anything at or
    // below the frozen-column level is reported as an exact zero so that no
    // unconverged direction ever leaks into V.
    for (std::size_t j = 0; j < n; ++j) colsq[j] = col_sqnorm(A, j);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return colsq[a] > colsq[b]; });

    JacobiSvdSmall out;
    out.s.resize(n);
    out.V = DenseMatrix(m, n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double sq = colsq[order[k]];
        if (sq <= negligible) {
            out.s[k] = 0.0;
            continue;
        }
        const double nrm = std::sqrt(sq);
        out.s[k] = nrm;
        for (std::size_t i = 0; i < m; ++i) out.V(i, k) = A(i, order[k]) / nrm;
    }
    return out;
}

// Fill column k of V with a unit vector orthogonal to columns [0, k).
inline void complete_basis_column(DenseMatrix& V, std::size_t k) {
    const std::size_t m = V.rows;
    std::vector<double> v(m);
    for (std::size_t cand = 0; cand < m; ++cand) {
        std::fill(v.begin(), v.end(), 0.0);
        v[cand] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t c = 0; c < k; ++c) {
                double proj = 0.0;
                for (std::size_t i = 0; i < m; ++i) proj += V(i, c) * v[i];
                for (std::size_t i = 0; i < m; ++i) v[i] -= proj * V(i, c);
            }
        }
        const double nrm = norm2(v);
        if (nrm > 1e-6) {
            for (std::size_t i = 0; i < m; ++i) V(i, k) = v[i] / nrm;
            return;
        }
    }
    throw std::runtime_error("complete_basis_column: no orthogonal direction found");
}

inline void clamp_singular_values(std::vector<double>& s) {
    if (s.empty()) return;
    const double floor = kSingularValueClampRel * s.front();
    for (double& v : s)
        if (v <= floor) v = 0.0;
}

} // namespace detail

/// Thin SVD: Householder QR reduction to the compact square factor followed
/// by one-sided Jacobi, so even deep spectral tails keep high relative
/// accuracy. Returns the first N left singular vectors and the full spectrum
/// (length min(rows, cols)).
inline SvdResult thin_svd(const DenseMatrix& U, std::size_t N) {
    const std::size_t r = std::min(U.rows, U.cols);
    if (N == 0 || N > r) throw std::invalid_argument("thin_svd: dimension mismatch");
    if (!U.all_finite()) throw std::invalid_argument("thin_svd: non-finite input");

    SvdResult out;
    if (U.rows > U.cols) {
        // U = Q R; left vectors of U are Q times those of R.
        detail::HouseholderQr qr(U);
        detail::JacobiSvdSmall small = detail::one_sided_jacobi(qr.r_factor());
        out.s = std::move(small.s);
        detail::clamp_singular_values(out.s);
        DenseMatrix head(U.cols, N, 0.0);
        bool any_zero = false;
        for (std::size_t k = 0; k < N; ++k) {
            if (out.s[k] > 0.0)
                for (std::size_t i = 0; i < U.cols; ++i) head(i, k) = small.V(i, k);
            else
                any_zero = true;
        }
        out.V = qr.apply_q(head);
        if (any_zero)
            for (std::size_t k = 0; k < N; ++k)
                if (out.s[k] == 0.0) detail::complete_basis_column(out.V, k);
    } else {
        // U^T = Q R, so U = R^T Q^T and the left vectors of U are those of R^T.
        detail::HouseholderQr qr(transpose(U));
        detail::JacobiSvdSmall small = detail::one_sided_jacobi(transpose(qr.r_factor()));
        out.s = std::move(small.s);
        detail::clamp_singular_values(out.s);
        out.V = DenseMatrix(U.rows, N, 0.0);
        for (std::size_t k = 0; k < N; ++k) {
            if (out.s[k] > 0.0)
                for (std::size_t i = 0; i < U.rows; ++i) out.V(i, k) = small.V(i, k);
            else
                detail::complete_basis_column(out.V, k);
        }
    }
    return out;
}

/// Randomized range-finder SVD (Halko, Martinsson, Tropp 2011). Deterministic
/// for a fixed seed; `s` here has length N only, unlike thin_svd.
inline SvdResult randomized_svd(const DenseMatrix& U, std::size_t N, std::size_t oversampling,
                                std::size_t power_iters, std::uint64_t seed) {
    const std::size_t r = std::min(U.rows, U.cols);
    if (N == 0 || N + oversampling > r) throw std::invalid_argument("randomized_svd: dimension mismatch");
    if (!U.all_finite()) throw std::invalid_argument("randomized_svd: non-finite input");

    const std::size_t l = N + oversampling;
    Rng rng(seed);
    DenseMatrix omega(U.cols, l);
    for (double& v : omega.data) v = rng.normal();

    DenseMatrix Y = matmul(U, omega);
    if (orthonormalize_columns(Y) < N)
        throw std::runtime_error("randomized_svd: sketch collapsed below target rank");
    for (std::size_t it = 0; it < power_iters; ++it) {
        DenseMatrix Z = matmul(transpose(U), Y);
        orthonormalize_columns(Z);
        Y = matmul(U, Z);
        if (orthonormalize_columns(Y) < N)
            throw std::runtime_error("randomized_svd: sketch collapsed below target rank");
    }

    DenseMatrix B = matmul(transpose(Y), U); // l x cols
    SvdResult small = thin_svd(B, std::min(l, std::min(B.rows, B.cols)));

    SvdResult out;
    out.s.assign(small.s.begin(), small.s.begin() + N);
    out.V = DenseMatrix(U.rows, N);
    for (std::size_t i = 0; i < U.rows; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            double acc = 0.0;
            for (std::size_t c = 0; c < small.V.rows; ++c) acc += Y(i, c) * small.V(c, k);
            out.V(i, k) = acc;
        }
    return out;
}

/// Deterministic random matrix with orthonormal columns (n_cols <= n_rows).
inline DenseMatrix random_orthonormal(std::size_t n_rows, std::size_t n_cols, std::uint64_t seed) {
    if (n_cols > n_rows) throw std::invalid_argument("random_orthonormal: dimension mismatch");
    Rng rng(seed);
    DenseMatrix W(n_rows, n_cols);
    for (double& v : W.data) v = rng.normal();
    // A Gaussian matrix is full rank almost surely; redraw on the pathological case.
    while (orthonormalize_columns(W) < n_cols) {
        for (double& v : W.data) v = rng.normal();
    }
    return W;
}

} // namespace podrom
