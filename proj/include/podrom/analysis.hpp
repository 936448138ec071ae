#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "podrom/matrix.hpp"
#include "podrom/pod.hpp"
#include "podrom/problems.hpp"
#include "podrom/rom.hpp"

namespace podrom {

/// Monte Carlo estimate of an integral over P x T: (|P x T| / N) * sum f_i.
inline double mc_integral(std::span<const double> values, double domain_volume) {
    if (values.empty()) throw std::invalid_argument("mc_integral: empty sample set");
    double s = 0.0;
    for (double v : values) s += v;
    return domain_volume * s / static_cast<double>(values.size());
}

/// min / max snapshot norm over the union of the given sets. m = 0 violates
/// the solution-map assumption and is rejected.
inline std::pair<double, double> estimate_m_M(const std::vector<const SnapshotSet*>& sets) {
    double m = std::numeric_limits<double>::infinity();
    double M = 0.0;
    std::size_t total = 0;
    for (const SnapshotSet* set : sets) {
        for (std::size_t j = 0; j < set->U.cols; ++j) {
            const double nrm = std::sqrt(col_sqnorm(set->U, j));
            m = std::min(m, nrm);
            M = std::max(M, nrm);
            ++total;
        }
    }
    if (total == 0) throw std::invalid_argument("estimate_m_M: no snapshots");
    if (m <= 0.0) throw std::runtime_error("estimate_m_M: zero-norm snapshot (m must be positive)");
    return {m, M};
}

/// Discrete weighted norm (|PxT|/N sum_j w_j ||F_j||^2)^(1/2) over the columns
/// of F; the weights play the role of ||u||^-2.
inline double weighted_norm(const DenseMatrix& F, std::span<const double> weights, double domain_volume) {
    if (weights.size() != F.cols) throw std::invalid_argument("weighted_norm: weight count mismatch");
    std::vector<double> vals(F.cols);
    for (std::size_t j = 0; j < F.cols; ++j) vals[j] = weights[j] * col_sqnorm(F, j);
    return std::sqrt(mc_integral(vals, domain_volume));
}

/// (1/N) sum_j ||u_j - V V^T u_j||^2 over the first n_basis columns of V,
/// computed from the explicit residual.
inline double mean_projection_residual_sq(const DenseMatrix& V, std::size_t n_basis, const DenseMatrix& U) {
    if (V.rows != U.rows) throw std::invalid_argument("mean_projection_residual_sq: dimension mismatch");
    const DenseMatrix Q = project_columns(V, U, n_basis); // n_basis x cols
    double total = 0.0;
    std::vector<double> recon(U.rows);
    for (std::size_t j = 0; j < U.cols; ++j) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < U.rows; ++i) {
            double acc = 0.0;
            const auto vrow = V.row(i);
            for (std::size_t k = 0; k < n_basis; ++k) acc += vrow[k] * Q(k, j);
            const double d = U(i, j) - acc;
            r2 += d * d;
        }
        total += r2;
    }
    return total / static_cast<double>(U.cols);
}

/// E_R: root mean squared relative prediction error over the test set.
template <class Model>
double relative_error(const Model& model, const SnapshotSet& test) {
    if (test.n_data() == 0) throw std::invalid_argument("relative_error: empty test set");
    double acc = 0.0;
    std::vector<double> diff(test.U.rows);
    for (std::size_t j = 0; j < test.U.cols; ++j) {
        const auto& pt = test.points[j];
        const std::vector<double> uhat = predict(model, pt.mu, pt.t);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < test.U.rows; ++i) {
            const double d = test.U(i, j) - uhat[i];
            num += d * d;
            den += test.U(i, j) * test.U(i, j);
        }
        if (den <= 0.0) throw std::runtime_error("relative_error: zero-norm test snapshot");
        acc += num / den;
    }
    return std::sqrt(acc / static_cast<double>(test.U.cols));
}

/// E_POD = m^-1 (sum_{k>N} sigma_k^2)^(1/2) from the training spectrum.
inline double pod_error(const std::vector<double>& sigma2, std::size_t N, double m) {
    if (m <= 0.0) throw std::invalid_argument("pod_error: m must be positive");
    return std::sqrt(tail_energy(sigma2, N)) / m;
}

/// E_S = m^-1 | integral of the test projection residual - training tail |^(1/2);
/// the integral term is the MC estimate on the test set.
inline double sampling_error(const DenseMatrix& V, std::size_t N, const SnapshotSet& test,
                             const std::vector<double>& sigma2, double m) {
    if (m <= 0.0) throw std::invalid_argument("sampling_error: m must be positive");
    const double integral = test.domain_volume * mean_projection_residual_sq(V, N, test.U);
    const double tail = tail_energy(sigma2, N);
    return std::sqrt(std::abs(integral - tail)) / m;
}

/// E_NN: the weighted error of the coefficient regression alone,
/// ((1/N) sum_j ||q_j - q_hat_j||^2 / ||u_j||^2)^(1/2).
template <class Model>
double nn_error(const Model& model, const SnapshotSet& test, double m) {
    if (m <= 0.0) throw std::invalid_argument("nn_error: m must be positive");
    if (test.n_data() == 0) throw std::invalid_argument("nn_error: empty test set");
    double acc = 0.0;
    for (std::size_t j = 0; j < test.U.cols; ++j) {
        const auto& pt = test.points[j];
        const std::vector<double> u = get_col(test.U, j);
        const std::vector<double> q = project(model.basis, u);
        const std::vector<double> qhat = predict_coeffs(model, pt.mu, pt.t);
        double num = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            const double d = q[k] - qhat[k];
            num += d * d;
        }
        const double den = dot(u, u);
        if (den <= 0.0) throw std::runtime_error("nn_error: zero-norm test snapshot");
        acc += num / den;
    }
    return std::sqrt(acc / static_cast<double>(test.U.cols));
}

struct ErrorReport {
    double e_r = 0.0;
    double e_s = 0.0;
    double e_pod = 0.0;
    double e_nn = 0.0;
    double tilde_e_pod = 0.0;
    double lower_bound = 0.0; // (m/M) * tilde_e_pod
    double upper_bound = 0.0; // e_s + e_pod + e_nn
    double m = 0.0;
    double M = 0.0;
    std::size_t N = 0;
    std::size_t n_data_train = 0;
    std::size_t n_data_test = 0;

    bool sandwich_holds() const { return lower_bound <= e_r && e_r <= upper_bound; }
};

/// Every estimator evaluated on the same test set, with m, M scanned over
/// train and test snapshots. The lower/upper inequalities then hold exactly,
/// sample by sample.
template <class Model>
ErrorReport bound_report(const Model& model, const TrainDataSummary& train_summary,
                         const SnapshotSet& test) {
    ErrorReport rep;
    auto [m, M] = estimate_m_M({&test});
    if (train_summary.n_data > 0) {
        if (train_summary.norm_min <= 0.0)
            throw std::runtime_error("bound_report: training data violates m > 0");
        m = std::min(m, train_summary.norm_min);
        M = std::max(M, train_summary.norm_max);
    }
    rep.m = m;
    rep.M = M;
    rep.N = model.basis.N;
    rep.n_data_train = train_summary.n_data;
    rep.n_data_test = test.n_data();

    rep.e_r = relative_error(model, test);
    rep.e_nn = nn_error(model, test, m);
    rep.e_pod = pod_error(model.basis.sigma2, model.basis.N, m);
    rep.e_s = sampling_error(model.basis.V, model.basis.N, test, model.basis.sigma2, m);

    const double integral = test.domain_volume * mean_projection_residual_sq(model.basis.V, model.basis.N, test.U);
    rep.tilde_e_pod = std::sqrt(integral) / m;
    rep.lower_bound = (m / M) * rep.tilde_e_pod;
    rep.upper_bound = rep.e_s + rep.e_pod + rep.e_nn;
    return rep;
}

template <class Model>
ErrorReport bound_report(const Model& model, const SnapshotSet& train, const SnapshotSet& test) {
    TrainDataSummary summary;
    summary.n_data = train.n_data();
    const auto [m, M] = estimate_m_M({&train});
    summary.norm_min = m;
    summary.norm_max = M;
    return bound_report(model, summary, test);
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares through (log x, log y).
inline SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw std::invalid_argument("fit_loglog_slope: need at least two points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        if (x <= 0.0 || y <= 0.0) throw std::invalid_argument("fit_loglog_slope: nonpositive data");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        const double dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_loglog_slope: need at least two distinct x");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = syy - fit.slope * sxy;
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

} // namespace podrom
