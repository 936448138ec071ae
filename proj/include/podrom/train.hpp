#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "podrom/network.hpp"
#include "podrom/rng.hpp"

namespace podrom {

struct TrainConfig {
    double omega_N = 0.5; // reconstruction weight
    double omega_n = 0.5; // latent-consistency weight
    double lr = 1e-3;
    double lr_decay = 0.999; // multiplicative, per epoch
    std::size_t batch = 20;
    std::size_t max_epochs = 20000;
    std::size_t patience = 200; // epochs without validation improvement
    double val_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (omega_N < 0.0 || omega_n < 0.0 || omega_N + omega_n <= 0.0)
            throw std::invalid_argument("TrainConfig: loss weights must be nonnegative with positive sum");
        if (batch == 0) throw std::invalid_argument("TrainConfig: batch must be at least 1");
        if (val_fraction <= 0.0 || val_fraction >= 1.0)
            throw std::invalid_argument("TrainConfig: val_fraction must lie in (0,1)");
    }
};

/// Adam with bias correction over a fixed parameter enumeration.
struct AdamState {
    std::vector<double> m, v;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n_params) : m(n_params, 0.0), v(n_params, 0.0) {}
};

inline void adam_step(AdamState& state, const std::vector<std::span<double>>& params,
                      const std::vector<std::span<double>>& grads, double lr) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam_step: shape mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    std::size_t idx = 0;
    for (std::size_t s = 0; s < params.size(); ++s) {
        if (params[s].size() != grads[s].size()) throw std::invalid_argument("adam_step: shape mismatch");
        for (std::size_t i = 0; i < params[s].size(); ++i, ++idx) {
            const double g = grads[s][i];
            state.m[idx] = state.beta1 * state.m[idx] + (1.0 - state.beta1) * g;
            state.v[idx] = state.beta2 * state.v[idx] + (1.0 - state.beta2) * g * g;
            const double mhat = state.m[idx] / bc1;
            const double vhat = state.v[idx] / bc2;
            params[s][i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
};

struct TrainStats {
    std::vector<EpochLog> log;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
};

/// Minibatch Adam with per-epoch learning-rate decay and early stopping on a
/// held-out split (the last val_fraction of the seed-shuffled index set).
/// `batch_fn(indices, grads_or_null)` returns the summed per-sample loss over
/// `indices` and, when grads are requested, accumulates raw per-sample
/// gradients into them (one NetworkGrads per trained network). The best
/// validation parameters are restored into `nets` before returning.
template <class BatchFn>
TrainStats train_networks(std::vector<Network*> nets, std::size_t n_samples, BatchFn&& batch_fn,
                          const TrainConfig& cfg) {
    cfg.validate();
    if (nets.empty()) throw std::invalid_argument("train_networks: no networks");
    if (n_samples == 0) throw std::invalid_argument("train_networks: empty data");

    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.seed, 1));
    shuffle_rng.shuffle(order);

    std::size_t val_count =
        n_samples >= 2
            ? std::clamp<std::size_t>(static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(n_samples)),
                                      1, n_samples - 1)
            : 1;
    const std::size_t train_count = n_samples >= 2 ? n_samples - val_count : 1;
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + train_count);
    std::vector<std::size_t> val_idx(order.begin() + train_count, order.end());
    if (val_idx.empty()) val_idx = train_idx;

    std::vector<NetworkGrads> grads;
    grads.reserve(nets.size());
    std::vector<AdamState> adam;
    std::vector<std::vector<std::span<double>>> param_views, grad_views;
    for (Network* net : nets) {
        grads.emplace_back(*net);
        param_views.push_back(parameter_spans(*net));
        grad_views.push_back(parameter_spans(grads.back()));
        adam.emplace_back(count_active_weights(*net));
    }

    TrainStats stats;
    std::vector<Network> best;
    for (Network* net : nets) best.push_back(*net);
    std::size_t since_improve = 0;

    const std::size_t batch_size = std::min(cfg.batch, train_count);
    std::vector<std::size_t> batch(batch_size);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr_epoch = cfg.lr * std::pow(cfg.lr_decay, static_cast<double>(epoch));
        shuffle_rng.shuffle(train_idx);

        double train_loss_sum = 0.0;
        for (std::size_t start = 0; start < train_count; start += batch_size) {
            const std::size_t count = std::min(batch_size, train_count - start);
            batch.assign(train_idx.begin() + start, train_idx.begin() + start + count);
            for (auto& g : grads) g.zero();
            train_loss_sum += batch_fn(std::span<const std::size_t>(batch), &grads);
            const double inv = 1.0 / static_cast<double>(count);
            for (auto& g : grads) g.scale(inv);
            for (std::size_t k = 0; k < nets.size(); ++k)
                adam_step(adam[k], param_views[k], grad_views[k], lr_epoch);
        }
        const double train_loss = train_loss_sum / static_cast<double>(train_count);
        const double val_loss =
            batch_fn(std::span<const std::size_t>(val_idx), nullptr) / static_cast<double>(val_idx.size());

        stats.log.push_back({epoch, train_loss, val_loss, lr_epoch});
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw std::runtime_error("train_networks: loss diverged");

        if (val_loss < stats.best_val) {
            stats.best_val = val_loss;
            stats.best_epoch = epoch;
            for (std::size_t k = 0; k < nets.size(); ++k) best[k] = *nets[k];
            since_improve = 0;
        } else {
            ++since_improve;
            if (since_improve > cfg.patience) break;
        }
    }

    for (std::size_t k = 0; k < nets.size(); ++k) *nets[k] = std::move(best[k]);
    return stats;
}

} // namespace podrom
