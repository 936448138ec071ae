#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "podrom/analysis.hpp"
#include "podrom/config.hpp"
#include "podrom/io.hpp"
#include "podrom/parallel.hpp"
#include "podrom/pod.hpp"
#include "podrom/problems.hpp"
#include "podrom/rom.hpp"

namespace podrom {

/// Second-moment summary of a snapshot stream: the correlation matrix
/// C = mean_j u_j u_j^T together with the mean squared norm and the norm
/// minimum. Lets a sweep probe arbitrarily many snapshots without storing
/// them: mean_j ||u_j - V V^T u_j||^2 = mean||u||^2 - tr(V^T C V).
struct SnapshotMoments {
    DenseMatrix C;
    double mean_sqnorm = 0.0;
    double min_norm = 0.0;
    std::size_t n_cols = 0;
    double domain_volume = 1.0;

    static SnapshotMoments accumulate(const ProblemSpec& spec, std::size_t n_samples,
                                      std::size_t n_times, std::uint64_t seed,
                                      std::size_t granularity = 2000) {
        SnapshotMoments mom;
        mom.C = DenseMatrix(spec.n_dofs, spec.n_dofs, 0.0);
        mom.min_norm = std::numeric_limits<double>::infinity();
        mom.domain_volume = spec.domain_volume();
        const bool timeless = spec.t_final <= 0.0;
        const std::vector<double> times =
            timeless ? std::vector<double>{0.0} : time_grid(n_times, spec.t_final);
        const auto mus = sample_parameters(n_samples, spec.param_box, seed);
        const auto grid = spec.grid();
        for (std::size_t j = 0; j < n_samples; ++j) {
            std::vector<std::vector<double>> snaps;
            if (spec.kind == ProblemKind::benchmark)
                snaps.push_back(eval_benchmark(mus[j], spec.beta, grid));
            else
                snaps = solve_heat_1d(mus[j][0], spec, times, granularity);
            for (const auto& u : snaps) {
                double sq = 0.0;
                for (std::size_t a = 0; a < u.size(); ++a) {
                    const double ua = u[a];
                    sq += ua * ua;
                    if (ua == 0.0) continue;
                    double* row = &mom.C(a, 0);
                    for (std::size_t b = 0; b < u.size(); ++b) row[b] += ua * u[b];
                }
                mom.mean_sqnorm += sq;
                mom.min_norm = std::min(mom.min_norm, std::sqrt(sq));
                ++mom.n_cols;
            }
        }
        const double inv = 1.0 / static_cast<double>(mom.n_cols);
        for (double& v : mom.C.data) v *= inv;
        mom.mean_sqnorm *= inv;
        return mom;
    }

    // (|PxT|/N) sum_j ||u_j - V V^T u_j||^2 against the first n_basis columns.
    double projection_residual_integral(const DenseMatrix& V, std::size_t n_basis) const {
        double retained = 0.0;
        std::vector<double> cv(C.rows, 0.0);
        for (std::size_t k = 0; k < n_basis; ++k) {
            for (std::size_t a = 0; a < C.rows; ++a) {
                double acc = 0.0;
                const auto row = C.row(a);
                for (std::size_t b = 0; b < C.rows; ++b) acc += row[b] * V(b, k);
                cv[a] = acc;
            }
            double vkcv = 0.0;
            for (std::size_t a = 0; a < C.rows; ++a) vkcv += V(a, k) * cv[a];
            retained += vkcv;
        }
        return domain_volume * std::max(0.0, mean_sqnorm - retained);
    }
};

namespace sweep_detail {

// Data rows already present in a CSV (resumed sweeps skip them).
inline std::size_t existing_data_rows(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) return 0;
    std::size_t rows = 0;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (!line.empty()) ++rows;
    }
    return rows;
}

inline std::vector<std::vector<std::string>> read_data_rows(const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream is(path);
    if (!is) return rows;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) fields.push_back(token);
        rows.push_back(std::move(fields));
    }
    return rows;
}

// Compute points [first, n) in grid order, `threads` at a time, handing each
// finished chunk to the writer so interrupted sweeps keep a clean row prefix.
template <class Compute, class Write>
void run_points(std::size_t n, std::size_t first, std::size_t threads, Compute&& compute,
                Write&& write) {
    for (std::size_t start = first; start < n; start += std::max<std::size_t>(1, threads)) {
        const std::size_t count = std::min(std::max<std::size_t>(1, threads), n - start);
        auto results = parallel_map(count, threads, [&](std::size_t i) { return compute(start + i); });
        for (auto& r : results) write(std::move(r));
    }
}

inline std::size_t count_mlp_weights(const std::vector<std::size_t>& dims) {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) total += dims[l + 1] * dims[l] + dims[l + 1];
    return total;
}

} // namespace sweep_detail

enum class SamplingAxis { n_samples, n_times };

struct SamplingSweepConfig {
    std::vector<std::size_t> axis_values;      // N_s or N_t grid
    std::size_t fixed_other = 0;               // the frozen N_t (resp. N_s)
    std::vector<std::size_t> pod_dims{5, 20};  // N values reported per point
    std::size_t n_seeds = 5;
    std::uint64_t base_seed = 100;
    // N_s axis: one large parameter-independent probe (reduced to moments),
    // sharing the frozen time grid so its discretization bias cancels.
    std::size_t probe_ns = 1024;
    std::uint64_t probe_seed = 9001;
    // N_t axis: per-seed probes share the training parameter draws and use a
    // dense time grid, so parameter noise cancels and the time-sampling
    // error is what remains.
    std::size_t dense_nt = 4096;
    std::size_t n_dofs = 100;
    std::size_t granularity = 2000;

    static SamplingSweepConfig for_axis(SamplingAxis axis) {
        SamplingSweepConfig c;
        if (axis == SamplingAxis::n_samples) {
            c.axis_values = {2, 4, 8, 16, 32, 64, 128};
            c.fixed_other = 1000; // N_t
        } else {
            c.axis_values = {8, 16, 32, 64, 128, 256, 512};
            c.fixed_other = 100; // N_s
        }
        return c;
    }
};

struct SamplingSweepRow {
    std::size_t run_id = 0;
    std::size_t axis_value = 0;
    std::uint64_t seed = 0;
    std::size_t pod_dim = 0;
    double e_s = 0.0;
};

struct SamplingSweepResult {
    std::vector<SamplingSweepRow> rows;
    std::map<std::size_t, SlopeFit> slope_by_dim; // seed-averaged fit per N
};

/// Decay of the sampling error along one data axis: per (axis value, seed),
/// rebuild the training set and its POD basis, then measure E_S against the
/// axis-appropriate probe. Points are seed-averaged before slope fitting.
inline SamplingSweepResult run_sampling_sweep(SamplingAxis axis, const SamplingSweepConfig& cfg,
                                              const std::filesystem::path& out_csv,
                                              std::size_t threads = 1) {
    const ProblemSpec spec = ProblemSpec::make_heat1d(cfg.n_dofs);

    std::size_t n_max = 0;
    for (std::size_t n : cfg.pod_dims) n_max = std::max(n_max, n);

    const std::size_t n_points = cfg.axis_values.size() * cfg.n_seeds;
    SamplingSweepResult result;

    // resume: fold already-written rows back in
    for (const auto& f : sweep_detail::read_data_rows(out_csv)) {
        if (f.size() != 6) continue;
        result.rows.push_back({std::stoul(f[0]), std::stoul(f[2]), std::stoull(f[3]), std::stoul(f[4]),
                               std::stod(f[5])});
    }
    const std::size_t done_points = result.rows.size() / cfg.pod_dims.size();

    CsvWriter csv(out_csv, "run_id,axis,axis_value,seed,N,e_s", true);
    const std::string axis_label = axis == SamplingAxis::n_samples ? "Ns" : "Nt";

    // Probes. The N_s axis shares one; the N_t axis gets one per seed,
    // built lazily and cached (points are seed-major, so at most one is live
    // per chunk).
    std::shared_ptr<const SnapshotMoments> shared_probe;
    if (axis == SamplingAxis::n_samples)
        shared_probe = std::make_shared<SnapshotMoments>(SnapshotMoments::accumulate(
            spec, cfg.probe_ns, cfg.fixed_other, cfg.probe_seed, cfg.granularity));
    std::map<std::uint64_t, std::shared_ptr<const SnapshotMoments>> crn_probes;
    std::mutex probe_mutex;

    auto probe_for = [&](std::uint64_t seed) -> std::shared_ptr<const SnapshotMoments> {
        if (axis == SamplingAxis::n_samples) return shared_probe;
        std::lock_guard<std::mutex> lock(probe_mutex);
        auto it = crn_probes.find(seed);
        if (it != crn_probes.end()) return it->second;
        auto probe = std::make_shared<SnapshotMoments>(SnapshotMoments::accumulate(
            spec, cfg.fixed_other, cfg.dense_nt, seed, cfg.granularity));
        if (crn_probes.size() > 2) crn_probes.clear(); // points run seed-major
        crn_probes[seed] = probe;
        return probe;
    };

    auto compute = [&](std::size_t point) {
        // seed-major order keeps one CRN probe live at a time
        const std::size_t seed_idx = point / cfg.axis_values.size();
        const std::size_t axis_idx = point % cfg.axis_values.size();
        const std::size_t axis_value = cfg.axis_values[axis_idx];
        const std::uint64_t seed = derive_seed(cfg.base_seed, seed_idx);

        const std::size_t ns = axis == SamplingAxis::n_samples ? axis_value : cfg.fixed_other;
        const std::size_t nt = axis == SamplingAxis::n_samples ? cfg.fixed_other : axis_value;
        const SnapshotSet train = build_dataset(spec, ns, nt, seed, cfg.granularity);
        const PodBasis basis = build_pod_basis(train.U, train.domain_volume, n_max);
        const auto probe = probe_for(seed);
        const double m = probe->min_norm;

        std::vector<SamplingSweepRow> rows;
        for (std::size_t d = 0; d < cfg.pod_dims.size(); ++d) {
            const double integral = probe->projection_residual_integral(basis.V, cfg.pod_dims[d]);
            const double tail = tail_energy(basis.sigma2, cfg.pod_dims[d]);
            rows.push_back({point, axis_value, seed, cfg.pod_dims[d],
                            std::sqrt(std::abs(integral - tail)) / m});
        }
        return rows;
    };

    sweep_detail::run_points(n_points, done_points, threads, compute,
                             [&](std::vector<SamplingSweepRow>&& rows) {
                                 for (const auto& r : rows) {
                                     csv.begin_row();
                                     csv.field(r.run_id)
                                         .field(axis_label)
                                         .field(r.axis_value)
                                         .field(static_cast<std::size_t>(r.seed))
                                         .field(r.pod_dim)
                                         .field(r.e_s);
                                     csv.end_row();
                                     result.rows.push_back(r);
                                 }
                             });

    // seed-averaged slope per POD dimension
    for (std::size_t n : cfg.pod_dims) {
        std::map<std::size_t, std::pair<double, std::size_t>> acc;
        for (const auto& r : result.rows)
            if (r.pod_dim == n) {
                acc[r.axis_value].first += r.e_s;
                acc[r.axis_value].second += 1;
            }
        std::vector<std::pair<double, double>> pts;
        for (const auto& [x, sum_count] : acc)
            pts.push_back({static_cast<double>(x), sum_count.first / static_cast<double>(sum_count.second)});
        if (pts.size() >= 2) result.slope_by_dim[n] = fit_loglog_slope(pts);
    }
    return result;
}

inline void write_sampling_summary(const SamplingSweepResult& result,
                                   const std::filesystem::path& out_csv) {
    CsvWriter csv(out_csv, "N,slope,intercept,r_squared");
    for (const auto& [n, fit] : result.slope_by_dim) {
        csv.begin_row();
        csv.field(n).field(fit.slope).field(fit.intercept).field(fit.r_squared);
        csv.end_row();
    }
}

struct PodDecayConfig {
    std::size_t train_ns = 50, train_nt = 20;
    std::uint64_t train_seed = 1;
    std::size_t test_ns = 100, test_nt = 200;
    std::uint64_t test_seed = 9001;
    std::vector<std::size_t> pod_dims{1, 2, 4, 8, 16, 32};
    std::size_t n_dofs = 100;
    std::size_t granularity = 2000;
};

struct PodDecayRow {
    std::size_t pod_dim = 0;
    double e_pod = 0.0;
    double tail = 0.0;
};

struct PodDecayResult {
    std::vector<PodDecayRow> rows;
    double m = 0.0, M = 0.0;
};

/// Projection-error decay over the retained dimension, on the reference data.
inline PodDecayResult run_pod_decay(const PodDecayConfig& cfg, const std::filesystem::path& out_csv) {
    const ProblemSpec spec = ProblemSpec::make_heat1d(cfg.n_dofs);
    const SnapshotSet train = build_dataset(spec, cfg.train_ns, cfg.train_nt, cfg.train_seed, cfg.granularity);
    const SnapshotSet test = build_dataset(spec, cfg.test_ns, cfg.test_nt, cfg.test_seed, cfg.granularity);

    PodDecayResult result;
    const auto [m, M] = estimate_m_M({&train, &test});
    result.m = m;
    result.M = M;

    std::size_t n_max = 0;
    for (std::size_t n : cfg.pod_dims) n_max = std::max(n_max, n);
    const PodBasis basis = build_pod_basis(train.U, train.domain_volume, n_max);

    CsvWriter csv(out_csv, "N,e_pod,tail");
    for (std::size_t n : cfg.pod_dims) {
        PodDecayRow row{n, pod_error(basis.sigma2, n, m), tail_energy(basis.sigma2, n)};
        result.rows.push_back(row);
        csv.begin_row();
        csv.field(row.pod_dim).field(row.e_pod).field(row.tail);
        csv.end_row();
    }
    return result;
}

struct BoundsSweepConfig {
    std::vector<std::size_t> pod_dims{1, 2, 4, 8, 16, 32};
    std::size_t train_ns = 50, train_nt = 20;
    std::uint64_t train_seed = 1;
    std::size_t test_ns = 100, test_nt = 200;
    std::uint64_t test_seed = 9001;
    std::size_t n_dofs = 100;
    std::size_t granularity = 2000;
    ArchSpec arch;         // reference architecture, n = 5
    TrainConfig train_cfg; // epochs/patience tuned by the caller
};

struct BoundsSweepResult {
    std::vector<ErrorReport> reports;
};

/// The bound-sandwich study: one POD-DL-ROM per retained dimension, each
/// evaluated through the full estimator battery on the same test set.
inline BoundsSweepResult run_bounds_sweep(const BoundsSweepConfig& cfg,
                                          const std::filesystem::path& out_csv,
                                          std::size_t threads = 1) {
    const ProblemSpec spec = ProblemSpec::make_heat1d(cfg.n_dofs);
    const SnapshotSet train = build_dataset(spec, cfg.train_ns, cfg.train_nt, cfg.train_seed, cfg.granularity);
    const SnapshotSet test = build_dataset(spec, cfg.test_ns, cfg.test_nt, cfg.test_seed, cfg.granularity);

    BoundsSweepResult result;
    for (const auto& f : sweep_detail::read_data_rows(out_csv)) {
        if (f.size() != 12) continue;
        ErrorReport rep;
        rep.N = std::stoul(f[0]);
        rep.e_r = std::stod(f[1]);
        rep.e_s = std::stod(f[2]);
        rep.e_pod = std::stod(f[3]);
        rep.e_nn = std::stod(f[4]);
        rep.tilde_e_pod = std::stod(f[5]);
        rep.lower_bound = std::stod(f[6]);
        rep.upper_bound = std::stod(f[7]);
        rep.m = std::stod(f[8]);
        rep.M = std::stod(f[9]);
        rep.n_data_train = train.n_data();
        rep.n_data_test = test.n_data();
        result.reports.push_back(rep);
    }

    CsvWriter csv(out_csv, "N,e_r,e_s,e_pod,e_nn,tilde_e_pod,lower,upper,m,M,train_seed,sandwich_ok",
                  true);
    auto compute = [&](std::size_t i) {
        const std::size_t N = cfg.pod_dims[i];
        const PodBasis basis = build_pod_basis(train.U, train.domain_volume, N);
        TrainConfig tc = cfg.train_cfg;
        tc.seed = derive_seed(cfg.train_cfg.seed, i);
        const auto trained = train_pod_dl_rom(train, basis, cfg.arch, tc);
        return bound_report(trained.model, train, test);
    };
    sweep_detail::run_points(cfg.pod_dims.size(), result.reports.size(), threads, compute,
                             [&](ErrorReport&& rep) {
                                 csv.begin_row();
                                 csv.field(rep.N)
                                     .field(rep.e_r)
                                     .field(rep.e_s)
                                     .field(rep.e_pod)
                                     .field(rep.e_nn)
                                     .field(rep.tilde_e_pod)
                                     .field(rep.lower_bound)
                                     .field(rep.upper_bound)
                                     .field(rep.m)
                                     .field(rep.M)
                                     .field(static_cast<std::size_t>(cfg.train_cfg.seed))
                                     .field(std::string(rep.sandwich_holds() ? "1" : "0"));
                                 csv.end_row();
                                 result.reports.push_back(rep);
                             });
    return result;
}

enum class ModelFamily { pod_dl_rom, pod_dnn, lin_resnet };

inline std::string family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::pod_dl_rom: return "pod-dl-rom";
        case ModelFamily::pod_dnn: return "pod-dnn";
        case ModelFamily::lin_resnet: return "lin-resnet";
    }
    return "?";
}

/// Decoder width whose inference cost (phi + decoder) lands nearest the
/// target active-weight budget.
inline std::size_t decoder_width_for_budget(std::size_t target, std::size_t p, std::size_t n_latent,
                                            std::size_t N, const std::vector<std::size_t>& phi_hidden,
                                            std::size_t dec_layers) {
    std::vector<std::size_t> phi_dims{p + 1};
    phi_dims.insert(phi_dims.end(), phi_hidden.begin(), phi_hidden.end());
    phi_dims.push_back(n_latent);
    const std::size_t phi_count = sweep_detail::count_mlp_weights(phi_dims);

    std::size_t best_w = 1;
    std::size_t best_err = static_cast<std::size_t>(-1);
    for (std::size_t w = 1; w <= 512; ++w) {
        std::vector<std::size_t> dec_dims{n_latent};
        dec_dims.insert(dec_dims.end(), dec_layers, w);
        dec_dims.push_back(N);
        const std::size_t total = phi_count + sweep_detail::count_mlp_weights(dec_dims);
        const std::size_t err = total > target ? total - target : target - total;
        if (err < best_err) {
            best_err = err;
            best_w = w;
        }
    }
    return best_w;
}

inline std::size_t dnn_width_for_budget(std::size_t target, std::size_t p, std::size_t N,
                                        std::size_t layers) {
    std::size_t best_w = 1;
    std::size_t best_err = static_cast<std::size_t>(-1);
    for (std::size_t w = 1; w <= 512; ++w) {
        std::vector<std::size_t> dims{p + 1};
        dims.insert(dims.end(), layers, w);
        dims.push_back(N);
        const std::size_t total = sweep_detail::count_mlp_weights(dims);
        const std::size_t err = total > target ? total - target : target - total;
        if (err < best_err) {
            best_err = err;
            best_w = w;
        }
    }
    return best_w;
}

struct ComplexitySweepConfig {
    double beta = 1.5;
    std::size_t pod_dim = 20;
    std::size_t n_latent = 5;
    std::size_t resnet_k = 5;
    std::vector<std::size_t> resnet_depths{2, 6, 14}; // budget levels
    std::vector<ModelFamily> families{ModelFamily::pod_dl_rom, ModelFamily::lin_resnet};
    std::size_t n_seeds = 3;
    std::uint64_t base_seed = 500;
    std::size_t train_ns = 500;
    std::uint64_t train_seed = 42;
    std::size_t test_ns = 10000;
    std::uint64_t test_seed = 4242;
    std::size_t n_dofs = 1000;
    std::size_t dec_layers = 1; // complexity budgets vary width at minimal depth
    std::size_t dnn_layers = 2;
    TrainConfig train_cfg;
};

struct ComplexityRow {
    std::size_t run_id = 0;
    ModelFamily family = ModelFamily::pod_dl_rom;
    std::size_t budget_index = 0;
    std::size_t target_weights = 0;
    std::size_t active_weights = 0;
    std::uint64_t seed = 0;
    double e_r = 0.0;
    double best_val = 0.0;
    std::size_t epochs = 0;
};

struct ComplexitySweepResult {
    std::vector<ComplexityRow> rows;
    // family -> budget index -> median E_R across seeds
    std::map<std::string, std::map<std::size_t, double>> median_e_r;
    std::map<std::string, SlopeFit> fit_by_family; // E_R vs active weights
};

/// Accuracy-versus-active-weights comparison between model families on the
/// analytic benchmark, at matched budgets set by the lin+ResNet depth grid.
inline ComplexitySweepResult run_complexity_sweep(const ComplexitySweepConfig& cfg,
                                                  const std::filesystem::path& out_csv,
                                                  std::size_t threads = 1) {
    const ProblemSpec spec = ProblemSpec::make_benchmark(cfg.beta, cfg.n_dofs);
    const SnapshotSet train = build_dataset(spec, cfg.train_ns, 1, cfg.train_seed);
    const SnapshotSet test = build_dataset(spec, cfg.test_ns, 1, cfg.test_seed);
    const PodBasis basis = build_pod_basis(train.U, train.domain_volume, cfg.pod_dim);

    const std::size_t p = spec.param_box.dim();
    std::vector<std::size_t> budgets;
    for (std::size_t depth : cfg.resnet_depths)
        budgets.push_back((p + 1 + 1) * cfg.pod_dim +
                          depth * (2 * cfg.resnet_k * cfg.pod_dim + cfg.resnet_k));

    ComplexitySweepResult result;
    for (const auto& f : sweep_detail::read_data_rows(out_csv)) {
        if (f.size() != 9) continue;
        ComplexityRow row;
        row.run_id = std::stoul(f[0]);
        for (ModelFamily fam : {ModelFamily::pod_dl_rom, ModelFamily::pod_dnn, ModelFamily::lin_resnet})
            if (family_name(fam) == f[1]) row.family = fam;
        row.budget_index = std::stoul(f[2]);
        row.target_weights = std::stoul(f[3]);
        row.active_weights = std::stoul(f[4]);
        row.seed = std::stoull(f[5]);
        row.e_r = std::stod(f[6]);
        row.best_val = std::stod(f[7]);
        row.epochs = std::stoul(f[8]);
        result.rows.push_back(row);
    }

    CsvWriter csv(out_csv, "run_id,family,budget,target_weights,active_weights,seed,e_r,val_loss,epochs",
                  true);
    const std::size_t n_points = cfg.families.size() * cfg.resnet_depths.size() * cfg.n_seeds;

    auto compute = [&](std::size_t point) {
        const std::size_t fam_idx = point / (cfg.resnet_depths.size() * cfg.n_seeds);
        const std::size_t budget_idx = (point / cfg.n_seeds) % cfg.resnet_depths.size();
        const std::size_t rep = point % cfg.n_seeds;
        const ModelFamily family = cfg.families[fam_idx];
        const std::size_t target = budgets[budget_idx];

        TrainConfig tc = cfg.train_cfg;
        tc.seed = derive_seed(cfg.base_seed, point);

        ComplexityRow row;
        row.run_id = point;
        row.family = family;
        row.budget_index = budget_idx;
        row.target_weights = target;
        row.seed = tc.seed;
        (void)rep;

        if (family == ModelFamily::pod_dl_rom) {
            ArchSpec arch;
            arch.latent_n = cfg.n_latent;
            const std::size_t w = decoder_width_for_budget(target, p, cfg.n_latent, cfg.pod_dim,
                                                           arch.phi_hidden, cfg.dec_layers);
            arch.decoder_hidden.assign(cfg.dec_layers, w);
            const auto trained = train_pod_dl_rom(train, basis, arch, tc);
            row.active_weights = active_weights(trained.model);
            row.e_r = relative_error(trained.model, test);
            row.best_val = trained.stats.best_val;
            row.epochs = trained.stats.log.size();
        } else if (family == ModelFamily::pod_dnn) {
            const std::size_t w = dnn_width_for_budget(target, p, cfg.pod_dim, cfg.dnn_layers);
            const std::vector<std::size_t> hidden(cfg.dnn_layers, w);
            const auto trained = train_pod_dnn(train, basis, hidden, tc);
            row.active_weights = active_weights(trained.model);
            row.e_r = relative_error(trained.model, test);
            row.best_val = trained.stats.best_val;
            row.epochs = trained.stats.log.size();
        } else {
            const auto trained =
                train_lin_resnet(train, basis, cfg.resnet_k, cfg.resnet_depths[budget_idx], tc);
            row.active_weights = active_weights(trained.model);
            row.e_r = relative_error(trained.model, test);
            row.best_val = trained.stats.best_val;
            row.epochs = trained.stats.log.size();
        }
        return row;
    };

    sweep_detail::run_points(n_points, result.rows.size(), threads, compute, [&](ComplexityRow&& row) {
        csv.begin_row();
        csv.field(row.run_id)
            .field(family_name(row.family))
            .field(row.budget_index)
            .field(row.target_weights)
            .field(row.active_weights)
            .field(static_cast<std::size_t>(row.seed))
            .field(row.e_r)
            .field(row.best_val)
            .field(row.epochs);
        csv.end_row();
        result.rows.push_back(row);
    });

    for (ModelFamily family : cfg.families) {
        const std::string name = family_name(family);
        std::vector<std::pair<double, double>> fit_points;
        for (std::size_t b = 0; b < cfg.resnet_depths.size(); ++b) {
            std::vector<double> errs;
            std::size_t weights = 0;
            for (const auto& row : result.rows)
                if (row.family == family && row.budget_index == b) {
                    errs.push_back(row.e_r);
                    weights = row.active_weights;
                }
            if (errs.empty()) continue;
            std::sort(errs.begin(), errs.end());
            const double median = errs[errs.size() / 2];
            result.median_e_r[name][b] = median;
            fit_points.push_back({static_cast<double>(weights), median});
        }
        if (fit_points.size() >= 2) result.fit_by_family[name] = fit_loglog_slope(fit_points);
    }
    return result;
}

inline void write_complexity_summary(const ComplexitySweepResult& result,
                                     const std::filesystem::path& out_csv) {
    CsvWriter csv(out_csv, "family,budget,median_e_r,slope,r_squared");
    for (const auto& [family, medians] : result.median_e_r) {
        const auto fit = result.fit_by_family.count(family) ? result.fit_by_family.at(family) : SlopeFit{};
        for (const auto& [budget, median] : medians) {
            csv.begin_row();
            csv.field(family).field(budget).field(median).field(fit.slope).field(fit.r_squared);
            csv.end_row();
        }
    }
}

} // namespace podrom
