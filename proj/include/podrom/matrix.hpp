#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace podrom {

/// Dense row-major matrix of doubles. Snapshot sets store one state vector
/// per column, so most kernels below are written to stream along rows (the
/// contiguous direction) and accumulate over columns.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, rows*cols entries

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline std::vector<double> get_col(const DenseMatrix& A, std::size_t j) {
    std::vector<double> c(A.rows);
    for (std::size_t i = 0; i < A.rows; ++i) c[i] = A(i, j);
    return c;
}

inline void set_col(DenseMatrix& A, std::size_t j, std::span<const double> c) {
    for (std::size_t i = 0; i < A.rows; ++i) A(i, j) = c[i];
}

inline double col_sqnorm(const DenseMatrix& A, std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < A.rows; ++i) s += A(i, j) * A(i, j);
    return s;
}

inline DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: dimension mismatch");
    DenseMatrix C(A.rows, B.cols, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double a = A(i, k);
            if (a == 0.0) continue;
            axpy(a, B.row(k), C.row(i));
        }
    return C;
}

inline DenseMatrix transpose(const DenseMatrix& A) {
    DenseMatrix T(A.cols, A.rows);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

/// U*U^T (rows x rows). Entry (a,b) is the dot product of two contiguous rows.
inline DenseMatrix gram_rows(const DenseMatrix& U) {
    DenseMatrix G(U.rows, U.rows, 0.0);
    for (std::size_t a = 0; a < U.rows; ++a) {
        for (std::size_t b = a; b < U.rows; ++b) {
            const double s = dot(U.row(a), U.row(b));
            G(a, b) = s;
            G(b, a) = s;
        }
    }
    return G;
}

/// U^T*U (cols x cols), accumulated as a sum of outer products of rows so the
/// inner loops stay contiguous.
inline DenseMatrix gram_cols(const DenseMatrix& U) {
    DenseMatrix G(U.cols, U.cols, 0.0);
    for (std::size_t i = 0; i < U.rows; ++i) {
        const auto r = U.row(i);
        for (std::size_t a = 0; a < U.cols; ++a) {
            const double ra = r[a];
            if (ra == 0.0) continue;
            double* g = &G(a, a);
            for (std::size_t b = a; b < U.cols; ++b) g[b - a] += ra * r[b];
        }
    }
    for (std::size_t a = 0; a < U.cols; ++a)
        for (std::size_t b = 0; b < a; ++b) G(a, b) = G(b, a);
    return G;
}

/// Q = V(:,0:n_basis)^T * U, i.e. the coefficients of every column of U in the
/// first n_basis columns of V. Accumulated row-by-row to stay contiguous.
inline DenseMatrix project_columns(const DenseMatrix& V, const DenseMatrix& U, std::size_t n_basis) {
    if (V.rows != U.rows) throw std::invalid_argument("project_columns: dimension mismatch");
    if (n_basis > V.cols) throw std::invalid_argument("project_columns: basis too small");
    DenseMatrix Q(n_basis, U.cols, 0.0);
    for (std::size_t i = 0; i < U.rows; ++i) {
        const auto vrow = V.row(i);
        const auto urow = U.row(i);
        for (std::size_t k = 0; k < n_basis; ++k) {
            const double vk = vrow[k];
            if (vk == 0.0) continue;
            axpy(vk, urow, Q.row(k));
        }
    }
    return Q;
}

inline double max_abs(const DenseMatrix& A) {
    double m = 0.0;
    for (double v : A.data) m = std::max(m, std::abs(v));
    return m;
}

/// max |V^T V - I| over the first n_basis columns; orthonormality residual.
inline double orthonormality_defect(const DenseMatrix& V, std::size_t n_basis) {
    double worst = 0.0;
    for (std::size_t a = 0; a < n_basis; ++a) {
        for (std::size_t b = a; b < n_basis; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < V.rows; ++i) s += V(i, a) * V(i, b);
            const double target = (a == b) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(s - target));
        }
    }
    return worst;
}

} // namespace podrom
