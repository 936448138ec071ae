#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "podrom/matrix.hpp"
#include "podrom/svd.hpp"

namespace podrom {

/// POD basis of a snapshot matrix: the retained orthonormal columns V, the
/// full correlation-matrix spectrum sigma_k^2, the retained dimension N and
/// the measure |P x T| of the parameter-time domain the snapshots sample.
struct PodBasis {
    DenseMatrix V;              // n_dofs x N, orthonormal columns
    std::vector<double> sigma2; // eigenvalues of (|P x T|/N_data) U U^T, nonincreasing
    std::size_t N = 0;
    double domain_volume = 1.0;
};

/// sigma_k^2 = (|P x T| / N_data) * s_k^2, from singular values of U.
inline std::vector<double> correlation_eigs(const std::vector<double>& s, double domain_volume,
                                            std::size_t n_data) {
    if (n_data == 0) throw std::invalid_argument("correlation_eigs: N_data must be positive");
    if (domain_volume <= 0.0) throw std::invalid_argument("correlation_eigs: domain volume must be positive");
    const double scale = domain_volume / static_cast<double>(n_data);
    std::vector<double> sigma2(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) sigma2[k] = scale * s[k] * s[k];
    return sigma2;
}

/// Tail energy sum_{k>N} sigma_k^2, accumulated smallest-first.
inline double tail_energy(const std::vector<double>& sigma2, std::size_t N) {
    if (N > sigma2.size()) throw std::invalid_argument("tail_energy: N out of range");
    double tail = 0.0;
    for (std::size_t k = sigma2.size(); k > N; --k) tail += sigma2[k - 1];
    return tail;
}

struct PodDimChoice {
    std::size_t N = 0;
    // The search ran off the end of the provided spectrum; if sigma2 was
    // truncated the true tail at this N may still exceed the threshold.
    bool used_full_spectrum = false;
};

/// Smallest j with sum_{k>j} sigma_k^2 <= (m^2/9) eps^2.
inline PodDimChoice select_pod_dim(const std::vector<double>& sigma2, double m, double eps) {
    if (m <= 0.0) throw std::invalid_argument("select_pod_dim: m must be positive");
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("select_pod_dim: eps must lie in (0,1)");
    const double threshold = m * m * eps * eps / 9.0;
    std::size_t j = 0;
    while (j < sigma2.size() && tail_energy(sigma2, j) > threshold) ++j;
    return {j, j == sigma2.size()};
}

inline std::vector<double> project(const DenseMatrix& V, std::span<const double> u) {
    if (u.size() != V.rows) throw std::invalid_argument("project: dimension mismatch");
    std::vector<double> q(V.cols, 0.0);
    for (std::size_t i = 0; i < V.rows; ++i) {
        const double ui = u[i];
        if (ui == 0.0) continue;
        axpy(ui, V.row(i), q);
    }
    return q;
}

inline std::vector<double> lift(const DenseMatrix& V, std::span<const double> q) {
    if (q.size() != V.cols) throw std::invalid_argument("lift: dimension mismatch");
    std::vector<double> u(V.rows, 0.0);
    for (std::size_t i = 0; i < V.rows; ++i) u[i] = dot(V.row(i), q);
    return u;
}

inline std::vector<double> project(const PodBasis& basis, std::span<const double> u) {
    if (u.size() != basis.V.rows) throw std::invalid_argument("project: dimension mismatch");
    std::vector<double> q(basis.N, 0.0);
    for (std::size_t i = 0; i < basis.V.rows; ++i) {
        const double ui = u[i];
        if (ui == 0.0) continue;
        const auto row = basis.V.row(i);
        for (std::size_t k = 0; k < basis.N; ++k) q[k] += ui * row[k];
    }
    return q;
}

inline std::vector<double> lift(const PodBasis& basis, std::span<const double> q) {
    if (q.size() != basis.N) throw std::invalid_argument("lift: dimension mismatch");
    std::vector<double> u(basis.V.rows, 0.0);
    for (std::size_t i = 0; i < basis.V.rows; ++i) {
        const auto row = basis.V.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < basis.N; ++k) acc += row[k] * q[k];
        u[i] = acc;
    }
    return u;
}

enum class SvdMethod { thin, randomized };

/// Assemble a PodBasis from a snapshot matrix. The spectrum is always the
/// exact one (the PodBasis invariant pins its length to min(N_h, N_data));
/// the method only selects how the retained columns V are computed.
inline PodBasis build_pod_basis(const DenseMatrix& U, double domain_volume, std::size_t N,
                                SvdMethod method = SvdMethod::thin, std::uint64_t seed = 0,
                                std::size_t oversampling = 10, std::size_t power_iters = 2) {
    PodBasis basis;
    basis.N = N;
    basis.domain_volume = domain_volume;
    SvdResult full = thin_svd(U, N);
    basis.sigma2 = correlation_eigs(full.s, domain_volume, U.cols);
    if (method == SvdMethod::thin) {
        basis.V = std::move(full.V);
    } else {
        const std::size_t r = std::min(U.rows, U.cols);
        const std::size_t pad = std::min(oversampling, r - N);
        basis.V = randomized_svd(U, N, pad, power_iters, seed).V;
    }
    return basis;
}

} // namespace podrom
