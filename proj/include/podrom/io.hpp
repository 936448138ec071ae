#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "podrom/problems.hpp"
#include "podrom/rom.hpp"

namespace podrom {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace io_detail {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
inline void put_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, &v, 4); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_bytes(os, &v, 8); }
inline void put_f64(std::ostream& os, double v) { put_bytes(os, &v, 8); }
inline void put_f64s(std::ostream& os, const std::vector<double>& v) {
    put_bytes(os, v.data(), 8 * v.size());
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("file truncated");
}
inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v;
    get_bytes(is, &v, 4);
    return v;
}
inline std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v;
    get_bytes(is, &v, 8);
    return v;
}
inline double get_f64(std::istream& is) {
    double v;
    get_bytes(is, &v, 8);
    return v;
}
inline std::vector<double> get_f64s(std::istream& is, std::size_t n) {
    std::vector<double> v(n);
    get_bytes(is, v.data(), 8 * n);
    return v;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace io_detail

inline constexpr char kDatasetMagic[9] = "PODROM01";
inline constexpr char kModelMagic[9] = "PODROMM1";

/// Persist a snapshot set: magic, (N_h, N_s, N_t, p) as u32, domain volume,
/// per-sample parameters, the time grid, then the snapshot columns.
inline void save_dataset(const std::filesystem::path& path, const SnapshotSet& set) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    const std::size_t p = set.points.empty() ? 0 : set.points.front().mu.size();
    io_detail::put_bytes(os, kDatasetMagic, 8);
    io_detail::put_u32(os, static_cast<std::uint32_t>(set.U.rows));
    io_detail::put_u32(os, static_cast<std::uint32_t>(set.n_samples));
    io_detail::put_u32(os, static_cast<std::uint32_t>(set.n_times));
    io_detail::put_u32(os, static_cast<std::uint32_t>(p));
    io_detail::put_f64(os, set.domain_volume);
    for (std::size_t j = 0; j < set.n_samples; ++j)
        io_detail::put_bytes(os, set.points[j * set.n_times].mu.data(), 8 * p);
    for (std::size_t k = 0; k < set.n_times; ++k) io_detail::put_f64(os, set.points[k].t);
    std::vector<double> col(set.U.rows);
    for (std::size_t j = 0; j < set.U.cols; ++j) {
        for (std::size_t i = 0; i < set.U.rows; ++i) col[i] = set.U(i, j);
        io_detail::put_f64s(os, col);
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline SnapshotSet load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    char magic[8];
    io_detail::get_bytes(is, magic, 8);
    if (std::memcmp(magic, kDatasetMagic, 8) != 0)
        throw std::runtime_error("not a dataset file: " + path.string());
    const std::uint32_t n_h = io_detail::get_u32(is);
    const std::uint32_t n_s = io_detail::get_u32(is);
    const std::uint32_t n_t = io_detail::get_u32(is);
    const std::uint32_t p = io_detail::get_u32(is);

    SnapshotSet set;
    set.n_samples = n_s;
    set.n_times = n_t;
    set.domain_volume = io_detail::get_f64(is);
    std::vector<std::vector<double>> mus(n_s);
    for (auto& mu : mus) mu = io_detail::get_f64s(is, p);
    const std::vector<double> times = io_detail::get_f64s(is, n_t);

    set.U = DenseMatrix(n_h, static_cast<std::size_t>(n_s) * n_t);
    set.points.resize(set.U.cols);
    for (std::size_t j = 0; j < n_s; ++j)
        for (std::size_t k = 0; k < n_t; ++k) {
            const auto col = io_detail::get_f64s(is, n_h);
            set_col(set.U, j * n_t + k, col);
            set.points[j * n_t + k] = {mus[j], times[k]};
        }
    return set;
}

using ModelAny = std::variant<PodDlRomModel, PodDnnModel, LinResNetModel>;

namespace io_detail {

inline void put_scaler(std::ostream& os, const AffineScaler& s) {
    put_u32(os, static_cast<std::uint32_t>(s.lo.size()));
    put_f64s(os, s.lo);
    put_f64s(os, s.range);
}
inline AffineScaler get_scaler(std::istream& is) {
    AffineScaler s;
    const std::uint32_t d = get_u32(is);
    s.lo = get_f64s(is, d);
    s.range = get_f64s(is, d);
    return s;
}

inline void put_network(std::ostream& os, const Network& net) {
    put_f64(os, net.leaky_alpha);
    put_u32(os, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            put_u32(os, 0);
            put_u32(os, static_cast<std::uint32_t>(d->W.rows));
            put_u32(os, static_cast<std::uint32_t>(d->W.cols));
            put_u32(os, d->activated ? 1 : 0);
            put_f64s(os, d->W.data);
            put_f64s(os, d->b);
        } else {
            const auto& r = std::get<ResidualLayer>(layer);
            put_u32(os, 1);
            put_u32(os, static_cast<std::uint32_t>(r.W0.rows));
            put_u32(os, static_cast<std::uint32_t>(r.W0.cols));
            put_f64s(os, r.W0.data);
            put_f64s(os, r.W1.data);
            put_f64s(os, r.b);
        }
    }
}

inline Network get_network(std::istream& is) {
    Network net;
    net.leaky_alpha = get_f64(is);
    const std::uint32_t n_layers = get_u32(is);
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::uint32_t type = get_u32(is);
        if (type == 0) {
            DenseLayer d;
            const std::uint32_t rows = get_u32(is);
            const std::uint32_t cols = get_u32(is);
            d.activated = get_u32(is) != 0;
            d.W = DenseMatrix(rows, cols);
            d.W.data = get_f64s(is, static_cast<std::size_t>(rows) * cols);
            d.b = get_f64s(is, rows);
            net.layers.emplace_back(std::move(d));
        } else if (type == 1) {
            ResidualLayer r;
            const std::uint32_t k = get_u32(is);
            const std::uint32_t width = get_u32(is);
            r.W0 = DenseMatrix(k, width);
            r.W0.data = get_f64s(is, static_cast<std::size_t>(k) * width);
            r.W1 = DenseMatrix(width, k);
            r.W1.data = get_f64s(is, static_cast<std::size_t>(k) * width);
            r.b = get_f64s(is, k);
            net.layers.emplace_back(std::move(r));
        } else {
            throw std::runtime_error("unknown layer tag in model file");
        }
    }
    return net;
}

inline void put_basis(std::ostream& os, const PodBasis& b) {
    put_u32(os, static_cast<std::uint32_t>(b.V.rows));
    put_u32(os, static_cast<std::uint32_t>(b.N));
    put_f64(os, b.domain_volume);
    put_u32(os, static_cast<std::uint32_t>(b.sigma2.size()));
    put_f64s(os, b.sigma2);
    put_f64s(os, b.V.data);
}

inline PodBasis get_basis(std::istream& is) {
    PodBasis b;
    const std::uint32_t rows = get_u32(is);
    b.N = get_u32(is);
    b.domain_volume = get_f64(is);
    const std::uint32_t slen = get_u32(is);
    b.sigma2 = get_f64s(is, slen);
    b.V = DenseMatrix(rows, b.N);
    b.V.data = get_f64s(is, static_cast<std::size_t>(rows) * b.N);
    return b;
}

inline void put_train_config(std::ostream& os, const TrainConfig& c) {
    put_f64(os, c.omega_N);
    put_f64(os, c.omega_n);
    put_f64(os, c.lr);
    put_f64(os, c.lr_decay);
    put_u64(os, c.batch);
    put_u64(os, c.max_epochs);
    put_u64(os, c.patience);
    put_f64(os, c.val_fraction);
    put_u64(os, c.seed);
}

inline TrainConfig get_train_config(std::istream& is) {
    TrainConfig c;
    c.omega_N = get_f64(is);
    c.omega_n = get_f64(is);
    c.lr = get_f64(is);
    c.lr_decay = get_f64(is);
    c.batch = get_u64(is);
    c.max_epochs = get_u64(is);
    c.patience = get_u64(is);
    c.val_fraction = get_f64(is);
    c.seed = get_u64(is);
    return c;
}

inline void put_domain(std::ostream& os, const ModelDomain& d) {
    put_u32(os, static_cast<std::uint32_t>(d.param_box.lo.size()));
    put_f64s(os, d.param_box.lo);
    put_f64s(os, d.param_box.hi);
    put_f64(os, d.t_final);
}

inline void put_summary(std::ostream& os, const TrainDataSummary& t) {
    put_f64(os, t.norm_min);
    put_f64(os, t.norm_max);
    put_u64(os, t.n_data);
}

inline TrainDataSummary get_summary(std::istream& is) {
    TrainDataSummary t;
    t.norm_min = get_f64(is);
    t.norm_max = get_f64(is);
    t.n_data = get_u64(is);
    return t;
}

inline ModelDomain get_domain(std::istream& is) {
    ModelDomain d;
    const std::uint32_t p = get_u32(is);
    d.param_box.lo = get_f64s(is, p);
    d.param_box.hi = get_f64s(is, p);
    d.t_final = get_f64(is);
    return d;
}

} // namespace io_detail

inline void save_model(const std::filesystem::path& path, const ModelAny& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    io_detail::put_bytes(os, kModelMagic, 8);
    io_detail::put_u32(os, 1); // version

    if (const auto* m = std::get_if<PodDlRomModel>(&model)) {
        io_detail::put_u32(os, 0);
        io_detail::put_basis(os, m->basis);
        io_detail::put_u32(os, static_cast<std::uint32_t>(m->latent_n));
        io_detail::put_scaler(os, m->input_scaler);
        io_detail::put_scaler(os, m->coeff_scaler);
        io_detail::put_domain(os, m->domain);
        io_detail::put_summary(os, m->train_summary);
        io_detail::put_train_config(os, m->trained_with);
        io_detail::put_network(os, m->phi);
        io_detail::put_network(os, m->decoder);
        io_detail::put_network(os, m->encoder);
    } else if (const auto* m2 = std::get_if<PodDnnModel>(&model)) {
        io_detail::put_u32(os, 1);
        io_detail::put_basis(os, m2->basis);
        io_detail::put_u32(os, 0);
        io_detail::put_scaler(os, m2->input_scaler);
        io_detail::put_scaler(os, m2->coeff_scaler);
        io_detail::put_domain(os, m2->domain);
        io_detail::put_summary(os, m2->train_summary);
        io_detail::put_train_config(os, m2->trained_with);
        io_detail::put_network(os, m2->net);
    } else {
        const auto& m3 = std::get<LinResNetModel>(model);
        io_detail::put_u32(os, 2);
        io_detail::put_basis(os, m3.basis);
        io_detail::put_u32(os, static_cast<std::uint32_t>(m3.residual_k));
        io_detail::put_scaler(os, m3.input_scaler);
        io_detail::put_scaler(os, m3.coeff_scaler);
        io_detail::put_domain(os, m3.domain);
        io_detail::put_summary(os, m3.train_summary);
        io_detail::put_train_config(os, m3.trained_with);
        io_detail::put_network(os, m3.net);
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline ModelAny load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    char magic[8];
    io_detail::get_bytes(is, magic, 8);
    if (std::memcmp(magic, kModelMagic, 8) != 0)
        throw std::runtime_error("not a model file: " + path.string());
    const std::uint32_t version = io_detail::get_u32(is);
    if (version != 1) throw std::runtime_error("unsupported model file version");
    const std::uint32_t family = io_detail::get_u32(is);

    if (family == 0) {
        PodDlRomModel m;
        m.basis = io_detail::get_basis(is);
        m.latent_n = io_detail::get_u32(is);
        m.input_scaler = io_detail::get_scaler(is);
        m.coeff_scaler = io_detail::get_scaler(is);
        m.domain = io_detail::get_domain(is);
        m.train_summary = io_detail::get_summary(is);
        m.trained_with = io_detail::get_train_config(is);
        m.phi = io_detail::get_network(is);
        m.decoder = io_detail::get_network(is);
        m.encoder = io_detail::get_network(is);
        return m;
    }
    if (family == 1) {
        PodDnnModel m;
        m.basis = io_detail::get_basis(is);
        (void)io_detail::get_u32(is);
        m.input_scaler = io_detail::get_scaler(is);
        m.coeff_scaler = io_detail::get_scaler(is);
        m.domain = io_detail::get_domain(is);
        m.train_summary = io_detail::get_summary(is);
        m.trained_with = io_detail::get_train_config(is);
        m.net = io_detail::get_network(is);
        return m;
    }
    if (family == 2) {
        LinResNetModel m;
        m.basis = io_detail::get_basis(is);
        m.residual_k = io_detail::get_u32(is);
        m.input_scaler = io_detail::get_scaler(is);
        m.coeff_scaler = io_detail::get_scaler(is);
        m.domain = io_detail::get_domain(is);
        m.train_summary = io_detail::get_summary(is);
        m.trained_with = io_detail::get_train_config(is);
        m.net = io_detail::get_network(is);
        return m;
    }
    throw std::runtime_error("unknown model family tag");
}

/// Minimal CSV writer; doubles are serialized with %.17g so files round-trip
/// and re-runs diff clean.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header, bool append = false)
        : os_(path, append ? std::ios::app : std::ios::trunc) {
        if (!os_) throw std::runtime_error("cannot open for writing: " + path.string());
        if (!append || os_.tellp() == 0) os_ << header << '\n';
    }

    void begin_row() { first_ = true; }
    CsvWriter& field(const std::string& v) {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& field(double v) { return field(io_detail::fmt_double(v)); }
    CsvWriter& field(std::size_t v) { return field(std::to_string(v)); }
    void end_row() {
        os_ << '\n';
        os_.flush(); // partial sweeps stay resumable
    }

private:
    void sep() {
        if (!first_) os_ << ',';
        first_ = false;
    }
    std::ofstream os_;
    bool first_ = true;
};

} // namespace podrom
