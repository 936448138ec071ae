#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "podrom/matrix.hpp"
#include "podrom/rng.hpp"

namespace podrom {

inline double leaky_relu(double x, double alpha) { return x >= 0.0 ? x : alpha * x; }

// Derivative at 0 is defined as 1.
inline double leaky_relu_grad(double x, double alpha) { return x >= 0.0 ? 1.0 : alpha; }

/// Affine layer y = W x + b; `activated` marks whether LeakyReLU follows
/// (the final layer of a network stays linear).
struct DenseLayer {
    DenseMatrix W; // out x in
    std::vector<double> b;
    bool activated = true;

    std::size_t in_dim() const { return W.cols; }
    std::size_t out_dim() const { return W.rows; }
};

/// Residual layer z -> z + W1 * act(W0 z + b); the nonlinearity lives in the
/// width-k branch and the stream width is preserved.
struct ResidualLayer {
    DenseMatrix W0; // k x N
    DenseMatrix W1; // N x k
    std::vector<double> b; // k

    std::size_t in_dim() const { return W0.cols; }
    std::size_t out_dim() const { return W1.rows; }
    std::size_t latent_dim() const { return W0.rows; }
};

using Layer = std::variant<DenseLayer, ResidualLayer>;

struct Network {
    std::vector<Layer> layers;
    double leaky_alpha = 0.1;

    std::size_t input_dim() const {
        return std::visit([](const auto& l) { return l.in_dim(); }, layers.front());
    }
    std::size_t output_dim() const {
        return std::visit([](const auto& l) { return l.out_dim(); }, layers.back());
    }
};

inline std::size_t count_active_weights(const DenseLayer& l) { return l.W.data.size() + l.b.size(); }
inline std::size_t count_active_weights(const ResidualLayer& l) {
    return l.W0.data.size() + l.W1.data.size() + l.b.size();
}
inline std::size_t count_active_weights(const Network& net) {
    std::size_t total = 0;
    for (const auto& layer : net.layers)
        total += std::visit([](const auto& l) { return count_active_weights(l); }, layer);
    return total;
}

namespace detail {

inline void glorot_fill(DenseMatrix& W, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : W.data) v = rng.uniform(-limit, limit);
}

} // namespace detail

/// Plain MLP over the given widths; hidden layers activated, output linear.
inline Network make_mlp(const std::vector<std::size_t>& dims, Rng& rng, double alpha = 0.1) {
    if (dims.size() < 2) throw std::invalid_argument("make_mlp: need input and output dims");
    Network net;
    net.leaky_alpha = alpha;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.W = DenseMatrix(dims[l + 1], dims[l]);
        detail::glorot_fill(layer.W, dims[l], dims[l + 1], rng);
        layer.b.assign(dims[l + 1], 0.0);
        layer.activated = (l + 2 < dims.size());
        net.layers.emplace_back(std::move(layer));
    }
    return net;
}

/// Linear input lift followed by `depth` residual layers of stream width N
/// and branch width k. Branch output weights start at zero, so the initial
/// map is the input layer alone.
inline Network make_resnet(std::size_t in_dim, std::size_t stream_width, std::size_t k,
                           std::size_t depth, Rng& rng, double alpha = 0.1) {
    if (depth == 0) throw std::invalid_argument("make_resnet: depth must be at least 1");
    if (k == 0) throw std::invalid_argument("make_resnet: latent width must be at least 1");
    Network net;
    net.leaky_alpha = alpha;
    DenseLayer lift;
    lift.W = DenseMatrix(stream_width, in_dim);
    detail::glorot_fill(lift.W, in_dim, stream_width, rng);
    lift.b.assign(stream_width, 0.0);
    lift.activated = false;
    net.layers.emplace_back(std::move(lift));
    for (std::size_t l = 0; l < depth; ++l) {
        ResidualLayer res;
        res.W0 = DenseMatrix(k, stream_width);
        detail::glorot_fill(res.W0, stream_width, k, rng);
        res.W1 = DenseMatrix(stream_width, k, 0.0);
        res.b.assign(k, 0.0);
        net.layers.emplace_back(std::move(res));
    }
    return net;
}

/// Per-layer records of a forward pass, reused across calls.
struct ForwardCache {
    std::vector<std::vector<double>> input; // x entering each layer
    std::vector<std::vector<double>> pre;   // dense pre-activation / residual branch pre-activation
    std::vector<double> output;
    std::vector<double> dx; // gradient wrt the network input after backward()

    explicit ForwardCache(const Network& net) {
        input.resize(net.layers.size());
        pre.resize(net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            std::visit(
                [&](const auto& layer) {
                    input[l].assign(layer.in_dim(), 0.0);
                    using L = std::decay_t<decltype(layer)>;
                    if constexpr (std::is_same_v<L, DenseLayer>)
                        pre[l].assign(layer.out_dim(), 0.0);
                    else
                        pre[l].assign(layer.latent_dim(), 0.0);
                },
                net.layers[l]);
        }
        output.assign(net.output_dim(), 0.0);
        dx.assign(net.input_dim(), 0.0);
    }
};

/// Gradient buffers shaped like the network parameters.
struct NetworkGrads {
    std::vector<Layer> layers; // same variants, data reused as gradient storage

    explicit NetworkGrads(const Network& net) : layers(net.layers) { zero(); }

    void zero() {
        for (auto& layer : layers)
            std::visit(
                [](auto& l) {
                    using L = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<L, DenseLayer>) {
                        std::fill(l.W.data.begin(), l.W.data.end(), 0.0);
                        std::fill(l.b.begin(), l.b.end(), 0.0);
                    } else {
                        std::fill(l.W0.data.begin(), l.W0.data.end(), 0.0);
                        std::fill(l.W1.data.begin(), l.W1.data.end(), 0.0);
                        std::fill(l.b.begin(), l.b.end(), 0.0);
                    }
                },
                layer);
    }

    void scale(double factor) {
        for (auto& layer : layers)
            std::visit(
                [factor](auto& l) {
                    using L = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<L, DenseLayer>) {
                        for (double& v : l.W.data) v *= factor;
                        for (double& v : l.b) v *= factor;
                    } else {
                        for (double& v : l.W0.data) v *= factor;
                        for (double& v : l.W1.data) v *= factor;
                        for (double& v : l.b) v *= factor;
                    }
                },
                layer);
    }
};

/// Evaluate the network, recording per-layer inputs and pre-activations.
inline std::span<const double> forward(const Network& net, std::span<const double> x,
                                       ForwardCache& cache) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("forward: input shape mismatch");
    const double alpha = net.leaky_alpha;
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        std::copy(cur.begin(), cur.end(), cache.input[l].begin());
        if (const auto* dense = std::get_if<DenseLayer>(&net.layers[l])) {
            auto& pre = cache.pre[l];
            for (std::size_t o = 0; o < dense->out_dim(); ++o)
                pre[o] = dense->b[o] + dot(dense->W.row(o), cur);
            cur.assign(pre.begin(), pre.end());
            if (dense->activated)
                for (double& v : cur) v = leaky_relu(v, alpha);
        } else {
            const auto& res = std::get<ResidualLayer>(net.layers[l]);
            auto& h = cache.pre[l];
            for (std::size_t o = 0; o < res.latent_dim(); ++o)
                h[o] = res.b[o] + dot(res.W0.row(o), cur);
            for (std::size_t o = 0; o < res.out_dim(); ++o) {
                double acc = 0.0;
                const auto w1row = res.W1.row(o);
                for (std::size_t j = 0; j < res.latent_dim(); ++j)
                    acc += w1row[j] * leaky_relu(h[j], alpha);
                cur[o] += acc;
            }
        }
    }
    std::copy(cur.begin(), cur.end(), cache.output.begin());
    return cache.output;
}

/// Reverse-mode pass for the sample recorded in `cache`. Accumulates
/// parameter gradients into `grads` and leaves dL/dx in cache.dx.
inline void backward(const Network& net, ForwardCache& cache, std::span<const double> dLdy,
                     NetworkGrads& grads) {
    if (dLdy.size() != net.output_dim()) throw std::invalid_argument("backward: gradient shape mismatch");
    const double alpha = net.leaky_alpha;
    std::vector<double> dcur(dLdy.begin(), dLdy.end());
    for (std::size_t li = net.layers.size(); li > 0; --li) {
        const std::size_t l = li - 1;
        if (const auto* dense = std::get_if<DenseLayer>(&net.layers[l])) {
            auto& g = std::get<DenseLayer>(grads.layers[l]);
            const auto& pre = cache.pre[l];
            if (dense->activated)
                for (std::size_t o = 0; o < dcur.size(); ++o)
                    dcur[o] *= leaky_relu_grad(pre[o], alpha);
            const auto& x = cache.input[l];
            for (std::size_t o = 0; o < dense->out_dim(); ++o) {
                const double d = dcur[o];
                g.b[o] += d;
                if (d != 0.0) axpy(d, x, g.W.row(o));
            }
            std::vector<double> dx(dense->in_dim(), 0.0);
            for (std::size_t o = 0; o < dense->out_dim(); ++o)
                axpy(dcur[o], dense->W.row(o), dx);
            dcur = std::move(dx);
        } else {
            const auto& res = std::get<ResidualLayer>(net.layers[l]);
            auto& g = std::get<ResidualLayer>(grads.layers[l]);
            const auto& h = cache.pre[l];
            const auto& x = cache.input[l];
            const std::size_t k = res.latent_dim();
            std::vector<double> da(k, 0.0);
            for (std::size_t o = 0; o < res.out_dim(); ++o) {
                const double d = dcur[o];
                if (d == 0.0) continue;
                const auto w1row = res.W1.row(o);
                auto g1row = g.W1.row(o);
                for (std::size_t j = 0; j < k; ++j) {
                    g1row[j] += d * leaky_relu(h[j], alpha);
                    da[j] += d * w1row[j];
                }
            }
            for (std::size_t j = 0; j < k; ++j) {
                const double dh = da[j] * leaky_relu_grad(h[j], alpha);
                g.b[j] += dh;
                if (dh != 0.0) axpy(dh, x, g.W0.row(j));
                da[j] = dh;
            }
            // dx = dy (skip path) + W0^T dh
            for (std::size_t j = 0; j < k; ++j)
                if (da[j] != 0.0) axpy(da[j], res.W0.row(j), dcur);
        }
    }
    cache.dx.assign(dcur.begin(), dcur.end());
}

/// Enumerate every parameter array of a network (or gradient mirror) in a
/// fixed order, for the optimizer.
inline std::vector<std::span<double>> parameter_spans(std::vector<Layer>& layers) {
    std::vector<std::span<double>> spans;
    for (auto& layer : layers)
        std::visit(
            [&](auto& l) {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, DenseLayer>) {
                    spans.emplace_back(l.W.data);
                    spans.emplace_back(l.b);
                } else {
                    spans.emplace_back(l.W0.data);
                    spans.emplace_back(l.W1.data);
                    spans.emplace_back(l.b);
                }
            },
            layer);
    return spans;
}

inline std::vector<std::span<double>> parameter_spans(Network& net) { return parameter_spans(net.layers); }
inline std::vector<std::span<double>> parameter_spans(NetworkGrads& g) { return parameter_spans(g.layers); }

} // namespace podrom
