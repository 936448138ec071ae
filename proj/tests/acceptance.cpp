// Acceptance suite: one test case per pipeline-level criterion, each printing
// a PASS/FAIL line with the measured values. Heavy cases reuse the sweep
// drivers with their default protocols and pinned seeds, so every number
// below is bit-reproducible.
#include <doctest.h>

#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "podrom/analysis.hpp"
#include "podrom/cli.hpp"
#include "podrom/sweep.hpp"

using namespace podrom;
namespace fs = std::filesystem;

namespace {

void report(int criterion, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %02d %s: %s\n", ok ? "PASS" : "FAIL", criterion, name, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    DenseMatrix A(rows, cols);
    for (double& v : A.data) v = rng.uniform(-1.0, 1.0);
    return A;
}

double projection_residual_sum(const DenseMatrix& U, const DenseMatrix& V, std::size_t N) {
    double total = 0.0;
    for (std::size_t j = 0; j < U.cols; ++j) {
        std::vector<double> q(N, 0.0);
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t i = 0; i < U.rows; ++i) q[k] += V(i, k) * U(i, j);
        for (std::size_t i = 0; i < U.rows; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < N; ++k) acc += V(i, k) * q[k];
            const double d = U(i, j) - acc;
            total += d * d;
        }
    }
    return total;
}

fs::path scratch_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("podrom_acceptance_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("criterion 01: discrete tail identity") {
    const DenseMatrix U = random_matrix(50, 200, 2024);
    const double volume = 1.0;
    bool ok = true;
    double worst = 0.0;
    for (std::size_t N : {1, 5, 10, 25, 50}) {
        const PodBasis basis = build_pod_basis(U, volume, N);
        const double resid = volume * projection_residual_sum(U, basis.V, N) / double(U.cols);
        const double tail = tail_energy(basis.sigma2, N);
        const double rel = tail > 0.0 ? std::abs(resid - tail) / tail : std::abs(resid - tail);
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-8;
    }
    report(1, "tail identity", ok, fmt("max relative mismatch %.3e (<= 1e-8)", worst));
    CHECK(ok);
}

TEST_CASE("criterion 02: quasi-optimality of the POD basis") {
    const DenseMatrix U = random_matrix(50, 200, 77);
    const std::size_t N = 10;
    const PodBasis basis = build_pod_basis(U, 1.0, N);
    const double pod_resid = projection_residual_sum(U, basis.V, N);
    bool ok = true;
    double closest = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DenseMatrix W = random_orthonormal(50, N, seed);
        const double w_resid = projection_residual_sum(U, W, N);
        closest = std::min(closest, w_resid - pod_resid);
        ok = ok && pod_resid <= w_resid + 1e-10;
    }
    report(2, "quasi-optimality", ok, fmt("min margin over 100 trials %.3e (>= -1e-10)", closest));
    CHECK(ok);
}

TEST_CASE("criterion 03: gradients match central finite differences") {
    Rng rng(2718);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in_dim = 2 + trial % 3;
        const std::size_t out_dim = 1 + trial % 4;
        const std::size_t width = 3 + static_cast<std::size_t>(rng.next_u64() % 5);
        Network net = make_mlp({in_dim, width, out_dim}, rng);
        if (trial % 2 == 0) {
            ResidualLayer res;
            const std::size_t k = 1 + static_cast<std::size_t>(rng.next_u64() % 3);
            res.W0 = DenseMatrix(k, width);
            res.W1 = DenseMatrix(width, k);
            for (double& v : res.W0.data) v = rng.uniform(-0.8, 0.8);
            for (double& v : res.W1.data) v = rng.uniform(-0.8, 0.8);
            res.b.assign(k, 0.1);
            net.layers.insert(net.layers.begin() + 1, std::move(res));
        }
        std::vector<double> x(in_dim), target(out_dim);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        for (double& v : target) v = rng.uniform(-1.0, 1.0);

        ForwardCache cache(net);
        NetworkGrads grads(net);
        const auto y = forward(net, x, cache);
        std::vector<double> dLdy(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) dLdy[k] = 2.0 * (y[k] - target[k]);
        backward(net, cache, dLdy, grads);

        auto loss = [&]() {
            ForwardCache c2(net);
            const auto yy = forward(net, x, c2);
            double l = 0.0;
            for (std::size_t k = 0; k < yy.size(); ++k) l += (yy[k] - target[k]) * (yy[k] - target[k]);
            return l;
        };
        const auto params = parameter_spans(net);
        const auto gview = parameter_spans(grads);
        for (std::size_t s = 0; s < params.size(); ++s)
            for (std::size_t i = 0; i < params[s].size(); ++i) {
                const double fd = oracle::central_difference(loss, params[s][i]);
                const double an = gview[s][i];
                const double scale = std::max({std::abs(fd), std::abs(an), 1e-4});
                worst = std::max(worst, std::abs(fd - an) / scale);
            }
    }
    const bool ok = worst <= 1e-5;
    report(3, "gradient correctness", ok, fmt("max relative error %.3e (<= 1e-5)", worst));
    CHECK(ok);
}

TEST_CASE("criterion 04: manufactured-solution spatial order") {
    auto error_at = [](std::size_t n_nodes) {
        const double T = 1.0;
        const std::vector<double> times{T};
        const auto snaps = heat_rod_solve(
            n_nodes, std::numbers::pi, T,
            [](double x, double t) { return -std::exp(-t) * std::cos(x); },
            [](double t) { return std::exp(-t); }, [](double) { return 0.0; },
            [](double x) { return std::cos(x); }, times, 2000);
        const double h = std::numbers::pi / static_cast<double>(n_nodes - 1);
        double err2 = 0.0;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const double exact = std::exp(-T) * std::cos(static_cast<double>(i) * h);
            err2 += (snaps[0][i] - exact) * (snaps[0][i] - exact) * h;
        }
        return std::sqrt(err2);
    };
    const double e1 = error_at(26), e2 = error_at(51), e3 = error_at(101);
    const double order12 = std::log2(e1 / e2);
    const double order23 = std::log2(e2 / e3);
    const bool ok = order12 >= 1.9 && order23 >= 1.9;
    report(4, "solver convergence", ok,
           fmt("observed orders %.3f, %.3f (>= 1.9); errors %.3e -> %.3e -> %.3e", order12, order23, e1,
               e2, e3));
    CHECK(ok);
}

TEST_CASE("criterion 05: sampling-error decay slopes") {
    const fs::path dir = scratch_dir("sampling");

    SamplingSweepConfig ns_cfg = SamplingSweepConfig::for_axis(SamplingAxis::n_samples);
    const auto ns_result =
        run_sampling_sweep(SamplingAxis::n_samples, ns_cfg, dir / "sampling-Ns.csv", 1);

    SamplingSweepConfig nt_cfg = SamplingSweepConfig::for_axis(SamplingAxis::n_times);
    const auto nt_result = run_sampling_sweep(SamplingAxis::n_times, nt_cfg, dir / "sampling-Nt.csv", 1);

    bool ok = true;
    std::string detail;
    for (std::size_t n : {5, 20}) {
        const double s = ns_result.slope_by_dim.at(n).slope;
        const bool in_window = s >= -0.35 && s <= -0.15;
        ok = ok && in_window;
        detail += fmt("Ns-axis N=%zu slope %.3f (target -0.25 +- 0.10)%s; ", n, s,
                      in_window ? "" : " OUT");
    }
    for (std::size_t n : {5, 20}) {
        const double s = nt_result.slope_by_dim.at(n).slope;
        const bool in_window = s >= -0.65 && s <= -0.35;
        ok = ok && in_window;
        detail += fmt("Nt-axis N=%zu slope %.3f (target -0.50 +- 0.15)%s; ", n, s,
                      in_window ? "" : " OUT");
    }
    report(5, "sampling-error slopes", ok, detail);
    CHECK(ok);
}

TEST_CASE("criterion 06: POD-error decay on the reference dataset") {
    const fs::path dir = scratch_dir("poddecay");
    PodDecayConfig cfg;
    const auto result = run_pod_decay(cfg, dir / "pod_decay.csv");
    bool monotone = true;
    for (std::size_t i = 1; i < result.rows.size(); ++i)
        monotone = monotone && result.rows[i].e_pod <= result.rows[i - 1].e_pod;
    const double first = result.rows.front().e_pod;
    const double last = result.rows.back().e_pod;
    const bool ratio_ok = last <= 0.01 * first;
    const bool ok = monotone && ratio_ok;
    report(6, "POD-error decay", ok,
           fmt("E_POD(1)=%.3e E_POD(32)=%.3e ratio %.3e (<= 1e-2), monotone=%d", first, last,
               first > 0 ? last / first : 0.0, int(monotone)));
    CHECK(ok);
}

TEST_CASE("criterion 07: bound sandwich across POD dimensions") {
    const fs::path dir = scratch_dir("bounds");
    BoundsSweepConfig cfg;
    cfg.arch.latent_n = 5;
    cfg.train_cfg.max_epochs = 2000;
    cfg.train_cfg.patience = 300;
    cfg.train_cfg.seed = 7;
    const auto result = run_bounds_sweep(cfg, dir / "bounds.csv", 1);
    bool ok = result.reports.size() == cfg.pod_dims.size();
    std::string detail;
    for (const auto& rep : result.reports) {
        const bool holds = rep.sandwich_holds();
        ok = ok && holds;
        detail += fmt("N=%zu: %.3e <= %.3e <= %.3e%s; ", rep.N, rep.lower_bound, rep.e_r,
                      rep.upper_bound, holds ? "" : " VIOLATED");
    }
    report(7, "bound sandwich", ok, detail);
    CHECK(ok);
}

TEST_CASE("criterion 08: latent dimension rule") {
    const bool ok = latent_dim_rule(1) == 5 && latent_dim_rule(2) == 7;
    report(8, "latent-dimension rule", ok,
           fmt("latent_dim_rule(1)=%zu latent_dim_rule(2)=%zu", latent_dim_rule(1), latent_dim_rule(2)));
    CHECK(ok);
}

TEST_CASE("criterion 09: benchmark trainability trend") {
    const std::vector<std::pair<double, std::size_t>> cases{{1.5, 20}, {7.0 / 3.0, 17}, {3.0, 15}};
    const std::vector<std::size_t> widths{8, 32, 96};
    bool ok = true;
    std::string detail;
    for (const auto& [beta, N] : cases) {
        const ProblemSpec spec = ProblemSpec::make_benchmark(beta, 1000);
        const SnapshotSet train = build_dataset(spec, 500, 1, 42);
        const SnapshotSet test = build_dataset(spec, 10000, 1, 4242);
        const PodBasis basis = build_pod_basis(train.U, train.domain_volume, N);
        double prev = std::numeric_limits<double>::infinity();
        bool monotone = true;
        detail += fmt("beta=%.3g:", beta);
        for (std::size_t b = 0; b < widths.size(); ++b) {
            double best = std::numeric_limits<double>::infinity();
            for (int s = 0; s < 3; ++s) {
                TrainConfig tc;
                tc.batch = 20;
                tc.max_epochs = 2000;
                tc.patience = 300;
                tc.seed = derive_seed(99, b * 3 + s);
                ArchSpec arch;
                arch.latent_n = 5;
                arch.decoder_hidden.assign(1, widths[b]);
                const auto trained = train_pod_dl_rom(train, basis, arch, tc);
                REQUIRE(std::isfinite(trained.stats.best_val));
                best = std::min(best, relative_error(trained.model, test));
            }
            detail += fmt(" w%zu:%.4f", widths[b], best);
            monotone = monotone && best <= prev;
            prev = best;
        }
        detail += monotone ? " ok; " : " NOT MONOTONE; ";
        ok = ok && monotone;
    }
    report(9, "benchmark trainability", ok, detail);
    CHECK(ok);
}

TEST_CASE("criterion 10: family comparison at matched budgets") {
    ComplexitySweepConfig cfg;
    cfg.beta = 1.5;
    cfg.pod_dim = 20;
    cfg.train_cfg.batch = 20;
    cfg.train_cfg.max_epochs = 2000;
    cfg.train_cfg.patience = 300;
    cfg.base_seed = 10;
    const fs::path dir = scratch_dir("complexity");
    const auto result = run_complexity_sweep(cfg, dir / "complexity.csv", 1);

    int wins = 0;
    std::string detail;
    for (std::size_t b = 0; b < cfg.resnet_depths.size(); ++b) {
        const double pdr = result.median_e_r.at("pod-dl-rom").at(b);
        const double lrn = result.median_e_r.at("lin-resnet").at(b);
        if (pdr <= lrn) ++wins;
        detail += fmt("budget %zu: pod-dl-rom %.4f vs lin-resnet %.4f; ", b, pdr, lrn);
    }
    const bool ok = wins >= 2;
    report(10, "family comparison", ok, detail + fmt("wins %d of 3 (need >= 2)", wins));
    CHECK(ok);
}

TEST_CASE("criterion 11: weighted-norm axioms") {
    Rng rng(31);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const std::size_t dofs = 2 + rng.next_u64() % 6;
        const std::size_t cols = 1 + rng.next_u64() % 8;
        DenseMatrix v(dofs, cols), z(dofs, cols);
        std::vector<double> w(cols);
        for (double& x : v.data) x = rng.uniform(-2.0, 2.0);
        for (double& x : z.data) x = rng.uniform(-2.0, 2.0);
        for (double& x : w) x = rng.uniform(0.1, 4.0);

        const double nv = weighted_norm(v, w, 1.0);
        const double nz = weighted_norm(z, w, 1.0);
        DenseMatrix sum = v;
        for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += z.data[i];
        ok = ok && weighted_norm(sum, w, 1.0) <= nv + nz + 1e-12 * (nv + nz + 1.0);

        const double lambda = rng.uniform(-3.0, 3.0);
        DenseMatrix scaled = v;
        for (double& x : scaled.data) x *= lambda;
        ok = ok && std::abs(weighted_norm(scaled, w, 1.0) - std::abs(lambda) * nv) <=
                       1e-12 * std::max(1.0, std::abs(lambda) * nv);

        ok = ok && (nv > 0.0) == std::any_of(v.data.begin(), v.data.end(),
                                             [](double x) { return x != 0.0; });
    }
    report(11, "weighted-norm axioms", ok, "triangle, homogeneity, definiteness over 1000 random fields");
    CHECK(ok);
}

TEST_CASE("criterion 12: pipeline determinism") {
    auto run_pipeline = [](const fs::path& dir) {
        Config gen;
        gen.set("problem", "heat1d");
        gen.set("ns", "50");
        gen.set("nt", "20");
        gen.set("seed", "1");
        cli::cmd_generate(gen, dir / "train.bin");
        Config tgen;
        tgen.set("problem", "heat1d");
        tgen.set("ns", "30");
        tgen.set("nt", "40");
        tgen.set("seed", "9001");
        cli::cmd_generate(tgen, dir / "test.bin");

        Config pod;
        pod.set("pod_n", "20");
        cli::cmd_pod(dir / "train.bin", pod, dir / "basis.bin", dir / "spectrum.csv", "thin", 0);

        Config train;
        train.set("latent_n", "5");
        train.set("max_epochs", "150");
        train.set("patience", "150");
        train.set("seed", "3");
        cli::cmd_train(dir / "train.bin", dir / "basis.bin", "pod-dl-rom", train, dir / "model.bin",
                       dir / "log.csv");
        cli::cmd_eval(dir / "model.bin", dir / "test.bin", dir / "report.csv");
    };

    const fs::path a = scratch_dir("pipe_a");
    const fs::path b = scratch_dir("pipe_b");
    run_pipeline(a);
    run_pipeline(b);

    bool ok = true;
    for (const std::string f :
         {"train.bin", "test.bin", "basis.bin", "spectrum.csv", "model.bin", "log.csv", "report.csv"})
        ok = ok && slurp(a / f) == slurp(b / f);
    report(12, "pipeline determinism", ok, "generate/pod/train/eval re-run byte-compared across 7 artifacts");
    CHECK(ok);
}
