#pragma once

#include <filesystem>
#include <iostream>
#include <string>

#include "podrom/analysis.hpp"
#include "podrom/config.hpp"
#include "podrom/io.hpp"
#include "podrom/sweep.hpp"

namespace podrom::cli {

inline ProblemSpec problem_from_config(const Config& cfg) {
    const std::string kind = cfg.get_string("problem", "heat1d");
    if (kind == "heat1d") return ProblemSpec::make_heat1d(cfg.get_size("nh", 100));
    if (kind == "benchmark")
        return ProblemSpec::make_benchmark(cfg.get_double("beta", 3.0), cfg.get_size("nh", 1000));
    throw std::runtime_error("unknown problem kind: " + kind);
}

inline TrainConfig train_config_from(const Config& cfg) {
    TrainConfig tc;
    tc.omega_N = cfg.get_double("omega_N", tc.omega_N);
    tc.omega_n = cfg.get_double("omega_n", tc.omega_n);
    tc.lr = cfg.get_double("lr", tc.lr);
    tc.lr_decay = cfg.get_double("lr_decay", tc.lr_decay);
    tc.batch = cfg.get_size("batch", tc.batch);
    tc.max_epochs = cfg.get_size("max_epochs", tc.max_epochs);
    tc.patience = cfg.get_size("patience", tc.patience);
    tc.val_fraction = cfg.get_double("val_fraction", tc.val_fraction);
    tc.seed = cfg.get_u64("seed", tc.seed);
    return tc;
}

/// generate: build a snapshot dataset and persist it.
inline void cmd_generate(const Config& cfg, const std::filesystem::path& out_path) {
    const ProblemSpec spec = problem_from_config(cfg);
    const std::size_t ns = cfg.get_size("ns", spec.kind == ProblemKind::benchmark ? 500 : 50);
    const std::size_t nt = cfg.get_size("nt", spec.kind == ProblemKind::benchmark ? 1 : 20);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const std::size_t granularity = cfg.get_size("granularity", 2000);

    const SnapshotSet set = build_dataset(spec, ns, nt, seed, granularity);
    save_dataset(out_path, set);

    const auto [m, M] = estimate_m_M({&set});
    std::cout << "dataset " << out_path.string() << ": N_h=" << set.U.rows
              << " N_data=" << set.n_data() << " min_norm=" << m << " max_norm=" << M << "\n";
}

/// pod: compute a basis (fixed N or the eps selection rule) plus spectrum CSV.
inline void cmd_pod(const std::filesystem::path& dataset_path, const Config& cfg,
                    const std::filesystem::path& basis_path, const std::filesystem::path& spectrum_csv,
                    const std::string& svd_method, std::uint64_t seed) {
    const SnapshotSet set = load_dataset(dataset_path);
    const SvdMethod method = svd_method == "randomized" ? SvdMethod::randomized : SvdMethod::thin;

    // Exact full spectrum first; the retained dimension may depend on it.
    PodBasis probe = build_pod_basis(set.U, set.domain_volume, 1, SvdMethod::thin);
    std::size_t rank = 0;
    for (double s2 : probe.sigma2)
        if (s2 > 0.0) ++rank;

    std::size_t N = 0;
    if (cfg.has("pod_eps")) {
        double m = cfg.get_double("pod_m", 0.0);
        if (m <= 0.0) m = estimate_m_M({&set}).first;
        const auto choice = select_pod_dim(probe.sigma2, m, cfg.get_double("pod_eps", 0.1));
        N = choice.N;
        if (choice.used_full_spectrum)
            std::cerr << "warning: eps target needs the full spectrum; N set to " << N << "\n";
        if (N == 0) N = 1;
    } else {
        N = cfg.get_size("pod_n", 20);
    }
    if (N > rank) {
        std::cerr << "warning: requested N=" << N << " exceeds numerical rank " << rank
                  << "; clamping\n";
        N = std::max<std::size_t>(rank, 1);
    }

    const PodBasis basis = build_pod_basis(set.U, set.domain_volume, N, method, seed);

    std::ofstream os(basis_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + basis_path.string());
    io_detail::put_bytes(os, "PODROMB1", 8);
    io_detail::put_basis(os, basis);
    if (!os) throw std::runtime_error("write failed: " + basis_path.string());

    CsvWriter csv(spectrum_csv, "k,sigma2,cumulative_tail");
    for (std::size_t k = 1; k <= basis.sigma2.size(); ++k) {
        csv.begin_row();
        csv.field(k).field(basis.sigma2[k - 1]).field(tail_energy(basis.sigma2, k));
        csv.end_row();
    }
    std::cout << "basis " << basis_path.string() << ": N=" << basis.N
              << " tail=" << tail_energy(basis.sigma2, basis.N) << "\n";
}

inline PodBasis load_basis(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    char magic[8];
    io_detail::get_bytes(is, magic, 8);
    if (std::memcmp(magic, "PODROMB1", 8) != 0)
        throw std::runtime_error("not a basis file: " + path.string());
    return io_detail::get_basis(is);
}

/// train: fit one model family on a dataset + basis; writes the model file
/// and the per-epoch training log.
inline void cmd_train(const std::filesystem::path& dataset_path, const std::filesystem::path& basis_path,
                      const std::string& family, const Config& cfg,
                      const std::filesystem::path& model_path, const std::filesystem::path& log_csv) {
    const SnapshotSet data = load_dataset(dataset_path);
    const PodBasis basis = load_basis(basis_path);
    const TrainConfig tc = train_config_from(cfg);

    TrainStats stats;
    ModelAny model;
    if (family == "pod-dl-rom") {
        ArchSpec arch;
        arch.latent_n = cfg.get_size("latent_n", 0);
        arch.phi_hidden = cfg.get_size_list("phi_hidden", arch.phi_hidden);
        arch.decoder_hidden = cfg.get_size_list("coder_hidden", arch.decoder_hidden);
        arch.encoder_hidden = cfg.get_size_list("coder_hidden", arch.encoder_hidden);
        arch.decoder_hidden = cfg.get_size_list("decoder_hidden", arch.decoder_hidden);
        arch.encoder_hidden = cfg.get_size_list("encoder_hidden", arch.encoder_hidden);
        auto trained = train_pod_dl_rom(data, basis, arch, tc);
        stats = std::move(trained.stats);
        model = std::move(trained.model);
    } else if (family == "pod-dnn") {
        const auto hidden = cfg.get_size_list("dnn_hidden", {50, 50, 50, 50});
        auto trained = train_pod_dnn(data, basis, hidden, tc);
        stats = std::move(trained.stats);
        model = std::move(trained.model);
    } else if (family == "lin-resnet") {
        auto trained = train_lin_resnet(data, basis, cfg.get_size("resnet_k", 5),
                                        cfg.get_size("resnet_depth", 4), tc);
        stats = std::move(trained.stats);
        model = std::move(trained.model);
    } else {
        throw std::runtime_error("unknown model family: " + family);
    }

    save_model(model_path, model);
    CsvWriter csv(log_csv, "epoch,train_loss,val_loss,lr");
    for (const auto& e : stats.log) {
        csv.begin_row();
        csv.field(e.epoch).field(e.train_loss).field(e.val_loss).field(e.lr);
        csv.end_row();
    }
    std::cout << "model " << model_path.string() << ": best_val=" << stats.best_val << " epochs="
              << stats.log.size() << "\n";
}

/// eval: full error report of a model on a test dataset, one CSV row.
inline ErrorReport cmd_eval(const std::filesystem::path& model_path,
                            const std::filesystem::path& test_path,
                            const std::filesystem::path& report_csv) {
    const ModelAny model = load_model(model_path);
    const SnapshotSet test = load_dataset(test_path);

    const ErrorReport rep = std::visit(
        [&](const auto& m) {
            if (m.basis.V.rows != test.U.rows)
                throw std::runtime_error("model/test N_h mismatch: " + std::to_string(m.basis.V.rows) +
                                         " vs " + std::to_string(test.U.rows));
            return bound_report(m, m.train_summary, test);
        },
        model);

    std::size_t n_latent = 0;
    std::size_t weights = 0;
    std::uint64_t seed = 0;
    std::visit(
        [&](const auto& m) {
            weights = active_weights(m);
            seed = m.trained_with.seed;
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PodDlRomModel>)
                n_latent = m.latent_n;
            else if constexpr (std::is_same_v<T, LinResNetModel>)
                n_latent = m.residual_k;
        },
        model);

    CsvWriter csv(report_csv, "N,n,active_weights,e_r,e_s,e_pod,e_nn,tilde_e_pod,lower,upper,m,M,train_seed");
    csv.begin_row();
    csv.field(rep.N)
        .field(n_latent)
        .field(weights)
        .field(rep.e_r)
        .field(rep.e_s)
        .field(rep.e_pod)
        .field(rep.e_nn)
        .field(rep.tilde_e_pod)
        .field(rep.lower_bound)
        .field(rep.upper_bound)
        .field(rep.m)
        .field(rep.M)
        .field(static_cast<std::size_t>(seed));
    csv.end_row();

    std::cout << "eval " << model_path.string() << ": E_R=" << rep.e_r << " lower=" << rep.lower_bound
              << " upper=" << rep.upper_bound << (rep.sandwich_holds() ? " (sandwich ok)" : " (SANDWICH VIOLATED)")
              << "\n";
    return rep;
}

/// sweep: the five experiment drivers; emits long-form CSV plus summaries.
inline void cmd_sweep(const std::string& kind, const Config& cfg, const std::filesystem::path& out_dir,
                      std::size_t threads) {
    std::filesystem::create_directories(out_dir);
    if (kind == "sampling-Ns" || kind == "sampling-Nt") {
        const SamplingAxis axis =
            kind == "sampling-Ns" ? SamplingAxis::n_samples : SamplingAxis::n_times;
        SamplingSweepConfig sc = SamplingSweepConfig::for_axis(axis);
        sc.axis_values = cfg.get_size_list("axis_values", sc.axis_values);
        sc.fixed_other = cfg.get_size("fixed_other", sc.fixed_other);
        sc.pod_dims = cfg.get_size_list("pod_dims", sc.pod_dims);
        sc.n_seeds = cfg.get_size("seeds", sc.n_seeds);
        sc.base_seed = cfg.get_u64("base_seed", sc.base_seed);
        sc.probe_ns = cfg.get_size("probe_ns", sc.probe_ns);
        sc.probe_seed = cfg.get_u64("probe_seed", sc.probe_seed);
        sc.dense_nt = cfg.get_size("dense_nt", sc.dense_nt);
        sc.n_dofs = cfg.get_size("nh", sc.n_dofs);
        const auto result = run_sampling_sweep(axis, sc, out_dir / (kind + ".csv"), threads);
        write_sampling_summary(result, out_dir / (kind + "_summary.csv"));
        for (const auto& [n, fit] : result.slope_by_dim)
            std::cout << kind << " N=" << n << ": slope=" << fit.slope << " r2=" << fit.r_squared << "\n";
    } else if (kind == "pod-decay") {
        PodDecayConfig dc;
        dc.pod_dims = cfg.get_size_list("pod_dims", dc.pod_dims);
        dc.train_ns = cfg.get_size("ns", dc.train_ns);
        dc.train_nt = cfg.get_size("nt", dc.train_nt);
        dc.train_seed = cfg.get_u64("seed", dc.train_seed);
        const auto result = run_pod_decay(dc, out_dir / "pod_decay.csv");
        std::cout << "pod-decay: E_POD(" << result.rows.front().pod_dim << ")=" << result.rows.front().e_pod
                  << " E_POD(" << result.rows.back().pod_dim << ")=" << result.rows.back().e_pod << "\n";
    } else if (kind == "bounds") {
        BoundsSweepConfig bc;
        bc.pod_dims = cfg.get_size_list("pod_dims", bc.pod_dims);
        bc.train_ns = cfg.get_size("ns", bc.train_ns);
        bc.train_nt = cfg.get_size("nt", bc.train_nt);
        bc.train_seed = cfg.get_u64("dataset_seed", bc.train_seed);
        bc.arch.latent_n = cfg.get_size("latent_n", 5);
        bc.train_cfg = train_config_from(cfg);
        if (!cfg.has("max_epochs")) bc.train_cfg.max_epochs = 2000;
        const auto result = run_bounds_sweep(bc, out_dir / "bounds.csv", threads);
        for (const auto& rep : result.reports)
            std::cout << "bounds N=" << rep.N << ": lower=" << rep.lower_bound << " E_R=" << rep.e_r
                      << " upper=" << rep.upper_bound << (rep.sandwich_holds() ? " ok" : " VIOLATED")
                      << "\n";
    } else if (kind == "complexity") {
        ComplexitySweepConfig cc;
        cc.beta = cfg.get_double("beta", cc.beta);
        cc.pod_dim = cfg.get_size("pod_n", cc.pod_dim);
        cc.resnet_depths = cfg.get_size_list("resnet_depths", cc.resnet_depths);
        cc.n_seeds = cfg.get_size("seeds", cc.n_seeds);
        cc.train_ns = cfg.get_size("ns", cc.train_ns);
        cc.test_ns = cfg.get_size("test_ns", cc.test_ns);
        cc.train_cfg = train_config_from(cfg);
        if (!cfg.has("max_epochs")) cc.train_cfg.max_epochs = 1500;
        std::vector<ModelFamily> fams;
        for (const std::string name : {"pod-dl-rom", "pod-dnn", "lin-resnet"})
            if (cfg.get_string("families", "pod-dl-rom,lin-resnet").find(name) != std::string::npos)
                fams.push_back(name == "pod-dl-rom"  ? ModelFamily::pod_dl_rom
                               : name == "pod-dnn"   ? ModelFamily::pod_dnn
                                                     : ModelFamily::lin_resnet);
        cc.families = fams;
        const auto result = run_complexity_sweep(cc, out_dir / "complexity.csv", threads);
        write_complexity_summary(result, out_dir / "complexity_summary.csv");
        for (const auto& [family, fit] : result.fit_by_family)
            std::cout << "complexity " << family << ": slope=" << fit.slope << "\n";
    } else {
        throw std::runtime_error("unknown sweep kind: " + kind);
    }
}

} // namespace podrom::cli
