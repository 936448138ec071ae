#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "podrom/network.hpp"
#include "podrom/pod.hpp"
#include "podrom/problems.hpp"
#include "podrom/train.hpp"

namespace podrom {

/// Per-coordinate min-max map onto [0,1], fitted on training data. Constant
/// coordinates get a unit range so they normalize to exactly 0.
struct AffineScaler {
    std::vector<double> lo, range;

    static AffineScaler fit(const DenseMatrix& rows_are_samples) {
        const std::size_t d = rows_are_samples.cols;
        AffineScaler s;
        s.lo.assign(d, 0.0);
        s.range.assign(d, 1.0);
        std::vector<double> hi(d);
        for (std::size_t c = 0; c < d; ++c) {
            s.lo[c] = rows_are_samples(0, c);
            hi[c] = rows_are_samples(0, c);
        }
        for (std::size_t r = 1; r < rows_are_samples.rows; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                s.lo[c] = std::min(s.lo[c], rows_are_samples(r, c));
                hi[c] = std::max(hi[c], rows_are_samples(r, c));
            }
        for (std::size_t c = 0; c < d; ++c) {
            const double span = hi[c] - s.lo[c];
            s.range[c] = span > 0.0 ? span : 1.0;
        }
        return s;
    }

    void normalize(std::span<double> x) const {
        for (std::size_t c = 0; c < x.size(); ++c) x[c] = (x[c] - lo[c]) / range[c];
    }
    void denormalize(std::span<double> x) const {
        for (std::size_t c = 0; c < x.size(); ++c) x[c] = lo[c] + range[c] * x[c];
    }
    void normalize_rows(DenseMatrix& A) const {
        for (std::size_t r = 0; r < A.rows; ++r) normalize(A.row(r));
    }
};

/// Guaranteed-sufficient latent dimension for Lipschitz parameter-to-solution
/// maps; callers may pick a smaller n explicitly.
inline std::size_t latent_dim_rule(std::size_t p) {
    if (p == 0) throw std::invalid_argument("latent_dim_rule: p must be at least 1");
    return 2 * p + 3;
}

struct ArchSpec {
    std::size_t latent_n = 0; // 0 -> latent_dim_rule(p)
    std::vector<std::size_t> phi_hidden{10, 10, 10};
    std::vector<std::size_t> decoder_hidden{25, 25, 25, 25, 25};
    // The encoder shapes the latent space during training only and never
    // counts toward inference weights, so it keeps its own widths.
    std::vector<std::size_t> encoder_hidden{25, 25, 25, 25, 25};
};

struct ModelDomain {
    Box param_box;
    double t_final = 0.0;
};

/// Norm extrema and size of the training set, kept with the model so
/// reports can scan train-union-test without reloading the training data.
struct TrainDataSummary {
    double norm_min = 0.0;
    double norm_max = 0.0;
    std::size_t n_data = 0;
};

struct PodDlRomModel {
    PodBasis basis;
    Network phi;     // (p+1) -> n
    Network decoder; // n -> N
    Network encoder; // N -> n, training-time only
    std::size_t latent_n = 0;
    AffineScaler input_scaler, coeff_scaler;
    TrainConfig trained_with;
    ModelDomain domain;
    TrainDataSummary train_summary;
    mutable bool warned_extrapolation = false;
};

struct PodDnnModel {
    PodBasis basis;
    Network net; // (p+1) -> N
    AffineScaler input_scaler, coeff_scaler;
    TrainConfig trained_with;
    ModelDomain domain;
    TrainDataSummary train_summary;
    mutable bool warned_extrapolation = false;
};

struct LinResNetModel {
    PodBasis basis;
    Network net; // linear lift + residual stack, (p+1) -> N
    std::size_t residual_k = 0;
    AffineScaler input_scaler, coeff_scaler;
    TrainConfig trained_with;
    ModelDomain domain;
    TrainDataSummary train_summary;
    mutable bool warned_extrapolation = false;
};

// Inference-time parameter count; the encoder never runs online.
inline std::size_t active_weights(const PodDlRomModel& m) {
    return count_active_weights(m.phi) + count_active_weights(m.decoder);
}
inline std::size_t active_weights(const PodDnnModel& m) { return count_active_weights(m.net); }
inline std::size_t active_weights(const LinResNetModel& m) { return count_active_weights(m.net); }

namespace detail {

struct RegressionData {
    DenseMatrix X; // N_data x (p+1), normalized inputs
    DenseMatrix Q; // N_data x N, normalized POD coefficients
    AffineScaler input_scaler, coeff_scaler;
    ModelDomain domain;
    TrainDataSummary summary;
    std::size_t p = 0;
};

inline RegressionData prepare_regression_data(const SnapshotSet& data, const PodBasis& basis) {
    if (data.n_data() == 0 || data.U.cols == 0)
        throw std::invalid_argument("prepare_regression_data: empty snapshot set");
    if (basis.V.rows != data.U.rows)
        throw std::invalid_argument("prepare_regression_data: basis/data shape mismatch");

    RegressionData out;
    out.p = data.points.front().mu.size();
    const std::size_t n = data.n_data();

    out.X = DenseMatrix(n, out.p + 1);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t d = 0; d < out.p; ++d) out.X(j, d) = data.points[j].mu[d];
        out.X(j, out.p) = data.points[j].t;
    }

    const DenseMatrix coeffs = project_columns(basis.V, data.U, basis.N); // N x n
    out.Q = DenseMatrix(n, basis.N);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < basis.N; ++k) out.Q(j, k) = coeffs(k, j);

    out.input_scaler = AffineScaler::fit(out.X);
    out.coeff_scaler = AffineScaler::fit(out.Q);
    out.input_scaler.normalize_rows(out.X);
    out.coeff_scaler.normalize_rows(out.Q);

    out.domain.param_box.lo.assign(out.p, 0.0);
    out.domain.param_box.hi.assign(out.p, 0.0);
    for (std::size_t d = 0; d < out.p; ++d) {
        out.domain.param_box.lo[d] = out.input_scaler.lo[d];
        out.domain.param_box.hi[d] = out.input_scaler.lo[d] + out.input_scaler.range[d];
    }
    out.domain.t_final = 0.0;
    for (const auto& pt : data.points) out.domain.t_final = std::max(out.domain.t_final, pt.t);

    out.summary.n_data = n;
    out.summary.norm_min = std::numeric_limits<double>::infinity();
    out.summary.norm_max = 0.0;
    for (std::size_t j = 0; j < data.U.cols; ++j) {
        const double nrm = std::sqrt(col_sqnorm(data.U, j));
        out.summary.norm_min = std::min(out.summary.norm_min, nrm);
        out.summary.norm_max = std::max(out.summary.norm_max, nrm);
    }
    return out;
}

template <class Model>
void check_domain(const Model& m, std::span<const double> mu, double t) {
    if (m.warned_extrapolation) return;
    const double slack = 0.02;
    bool outside = !m.domain.param_box.contains(mu, slack) || t < -slack || t > m.domain.t_final + slack;
    if (outside) {
        std::cerr << "warning: predict called outside the training domain (extrapolating)\n";
        m.warned_extrapolation = true;
    }
}

inline std::vector<double> scaled_input(const AffineScaler& scaler, std::span<const double> mu, double t) {
    std::vector<double> x(mu.size() + 1);
    std::copy(mu.begin(), mu.end(), x.begin());
    x.back() = t;
    scaler.normalize(x);
    return x;
}

} // namespace detail

struct PodDlRomTraining {
    PodDlRomModel model;
    TrainStats stats;
};

/// Joint training of the reduced map, decoder and encoder with the loss
/// omega_N ||q_hat - q||^2 + omega_n ||z_enc - z_dyn||^2 (minibatch mean).
inline PodDlRomTraining train_pod_dl_rom(const SnapshotSet& data, const PodBasis& basis,
                                         const ArchSpec& arch, const TrainConfig& cfg) {
    if (cfg.omega_n <= 0.0)
        throw std::invalid_argument(
            "train_pod_dl_rom: omega_n must be positive; use train_pod_dnn for the encoder-free variant");
    cfg.validate();

    auto reg = detail::prepare_regression_data(data, basis);
    const std::size_t n_latent = arch.latent_n > 0 ? arch.latent_n : latent_dim_rule(reg.p);
    const std::size_t N = basis.N;

    Rng init_rng(derive_seed(cfg.seed, 0));
    std::vector<std::size_t> phi_dims{reg.p + 1};
    phi_dims.insert(phi_dims.end(), arch.phi_hidden.begin(), arch.phi_hidden.end());
    phi_dims.push_back(n_latent);
    std::vector<std::size_t> dec_dims{n_latent};
    dec_dims.insert(dec_dims.end(), arch.decoder_hidden.begin(), arch.decoder_hidden.end());
    dec_dims.push_back(N);
    std::vector<std::size_t> enc_dims{N};
    enc_dims.insert(enc_dims.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
    enc_dims.push_back(n_latent);

    PodDlRomTraining out;
    out.model.phi = make_mlp(phi_dims, init_rng);
    out.model.decoder = make_mlp(dec_dims, init_rng);
    out.model.encoder = make_mlp(enc_dims, init_rng);
    out.model.latent_n = n_latent;

    Network& phi = out.model.phi;
    Network& dec = out.model.decoder;
    Network& enc = out.model.encoder;
    ForwardCache c_phi(phi), c_dec(dec), c_enc(enc);
    std::vector<double> dqhat(N), dzenc(n_latent), dz(n_latent);

    const double wN = cfg.omega_N, wn = cfg.omega_n;
    auto batch_fn = [&](std::span<const std::size_t> idx, std::vector<NetworkGrads>* grads) {
        double loss_sum = 0.0;
        for (std::size_t j : idx) {
            const auto x = reg.X.row(j);
            const auto q = reg.Q.row(j);
            const auto z = forward(phi, x, c_phi);
            const auto qhat = forward(dec, z, c_dec);
            const auto zenc = forward(enc, q, c_enc);

            double lN = 0.0, ln = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                const double d = qhat[k] - q[k];
                lN += d * d;
                dqhat[k] = 2.0 * wN * d;
            }
            for (std::size_t k = 0; k < n_latent; ++k) {
                const double d = zenc[k] - z[k];
                ln += d * d;
                dzenc[k] = 2.0 * wn * d;
            }
            loss_sum += wN * lN + wn * ln;

            if (grads) {
                backward(dec, c_dec, dqhat, (*grads)[1]);
                backward(enc, c_enc, dzenc, (*grads)[2]);
                for (std::size_t k = 0; k < n_latent; ++k)
                    dz[k] = c_dec.dx[k] + 2.0 * wn * (z[k] - zenc[k]);
                backward(phi, c_phi, dz, (*grads)[0]);
            }
        }
        return loss_sum;
    };

    out.stats = train_networks({&phi, &dec, &enc}, data.n_data(), batch_fn, cfg);
    out.model.basis = basis;
    out.model.input_scaler = reg.input_scaler;
    out.model.coeff_scaler = reg.coeff_scaler;
    out.model.trained_with = cfg;
    out.model.domain = reg.domain;
    out.model.train_summary = reg.summary;
    return out;
}

struct PodDnnTraining {
    PodDnnModel model;
    TrainStats stats;
};

/// Encoder-free baseline: one dense network regressing the POD coefficients.
inline PodDnnTraining train_pod_dnn(const SnapshotSet& data, const PodBasis& basis,
                                    const std::vector<std::size_t>& hidden, const TrainConfig& cfg) {
    cfg.validate();
    auto reg = detail::prepare_regression_data(data, basis);
    const std::size_t N = basis.N;

    Rng init_rng(derive_seed(cfg.seed, 0));
    std::vector<std::size_t> dims{reg.p + 1};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(N);

    PodDnnTraining out;
    out.model.net = make_mlp(dims, init_rng);
    Network& net = out.model.net;
    ForwardCache cache(net);
    std::vector<double> dqhat(N);

    auto batch_fn = [&](std::span<const std::size_t> idx, std::vector<NetworkGrads>* grads) {
        double loss_sum = 0.0;
        for (std::size_t j : idx) {
            const auto qhat = forward(net, reg.X.row(j), cache);
            const auto q = reg.Q.row(j);
            for (std::size_t k = 0; k < N; ++k) {
                const double d = qhat[k] - q[k];
                loss_sum += d * d;
                dqhat[k] = 2.0 * d;
            }
            if (grads) backward(net, cache, dqhat, (*grads)[0]);
        }
        return loss_sum;
    };

    out.stats = train_networks({&net}, data.n_data(), batch_fn, cfg);
    out.model.basis = basis;
    out.model.input_scaler = reg.input_scaler;
    out.model.coeff_scaler = reg.coeff_scaler;
    out.model.trained_with = cfg;
    out.model.domain = reg.domain;
    out.model.train_summary = reg.summary;
    return out;
}

struct LinResNetTraining {
    LinResNetModel model;
    TrainStats stats;
};

/// Linear lift plus a stack of width-N residual layers with branch width k.
inline LinResNetTraining train_lin_resnet(const SnapshotSet& data, const PodBasis& basis, std::size_t k,
                                          std::size_t depth, const TrainConfig& cfg) {
    cfg.validate();
    if (depth == 0) throw std::invalid_argument("train_lin_resnet: depth must be at least 1");
    if (k == 0) throw std::invalid_argument("train_lin_resnet: k must be at least 1");
    auto reg = detail::prepare_regression_data(data, basis);
    const std::size_t N = basis.N;

    Rng init_rng(derive_seed(cfg.seed, 0));
    LinResNetTraining out;
    out.model.net = make_resnet(reg.p + 1, N, k, depth, init_rng);
    out.model.residual_k = k;
    Network& net = out.model.net;
    ForwardCache cache(net);
    std::vector<double> dqhat(N);

    auto batch_fn = [&](std::span<const std::size_t> idx, std::vector<NetworkGrads>* grads) {
        double loss_sum = 0.0;
        for (std::size_t j : idx) {
            const auto qhat = forward(net, reg.X.row(j), cache);
            const auto q = reg.Q.row(j);
            for (std::size_t kk = 0; kk < N; ++kk) {
                const double d = qhat[kk] - q[kk];
                loss_sum += d * d;
                dqhat[kk] = 2.0 * d;
            }
            if (grads) backward(net, cache, dqhat, (*grads)[0]);
        }
        return loss_sum;
    };

    out.stats = train_networks({&net}, data.n_data(), batch_fn, cfg);
    out.model.basis = basis;
    out.model.input_scaler = reg.input_scaler;
    out.model.coeff_scaler = reg.coeff_scaler;
    out.model.trained_with = cfg;
    out.model.domain = reg.domain;
    out.model.train_summary = reg.summary;
    return out;
}

/// Predicted POD coefficients q_hat(mu, t), de-normalized; the encoder is
/// never evaluated on this path.
inline std::vector<double> predict_coeffs(const PodDlRomModel& m, std::span<const double> mu, double t) {
    detail::check_domain(m, mu, t);
    const auto x = detail::scaled_input(m.input_scaler, mu, t);
    ForwardCache c_phi(m.phi), c_dec(m.decoder);
    const auto z = forward(m.phi, x, c_phi);
    const auto qn = forward(m.decoder, z, c_dec);
    std::vector<double> q(qn.begin(), qn.end());
    m.coeff_scaler.denormalize(q);
    return q;
}

inline std::vector<double> predict_coeffs(const PodDnnModel& m, std::span<const double> mu, double t) {
    detail::check_domain(m, mu, t);
    const auto x = detail::scaled_input(m.input_scaler, mu, t);
    ForwardCache cache(m.net);
    const auto qn = forward(m.net, x, cache);
    std::vector<double> q(qn.begin(), qn.end());
    m.coeff_scaler.denormalize(q);
    return q;
}

inline std::vector<double> predict_coeffs(const LinResNetModel& m, std::span<const double> mu, double t) {
    detail::check_domain(m, mu, t);
    const auto x = detail::scaled_input(m.input_scaler, mu, t);
    ForwardCache cache(m.net);
    const auto qn = forward(m.net, x, cache);
    std::vector<double> q(qn.begin(), qn.end());
    m.coeff_scaler.denormalize(q);
    return q;
}

template <class Model>
std::vector<double> predict(const Model& m, std::span<const double> mu, double t) {
    return lift(m.basis, predict_coeffs(m, mu, t));
}

} // namespace podrom
