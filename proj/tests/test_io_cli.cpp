#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "podrom/cli.hpp"

using namespace podrom;
namespace fs = std::filesystem;

namespace {

std::vector<char> slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("podrom_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("dataset files round-trip bit-exactly") {
    const fs::path dir = temp_dir("dataset");
    const ProblemSpec spec = ProblemSpec::make_heat1d(40);
    const SnapshotSet set = build_dataset(spec, 6, 4, 9, 200);

    save_dataset(dir / "a.bin", set);
    const SnapshotSet loaded = load_dataset(dir / "a.bin");
    CHECK(loaded.U.data == set.U.data);
    CHECK(loaded.n_samples == set.n_samples);
    CHECK(loaded.n_times == set.n_times);
    CHECK(loaded.domain_volume == set.domain_volume);
    REQUIRE(loaded.points.size() == set.points.size());
    for (std::size_t j = 0; j < set.points.size(); ++j) {
        CHECK(loaded.points[j].mu == set.points[j].mu);
        CHECK(loaded.points[j].t == set.points[j].t);
    }

    save_dataset(dir / "b.bin", loaded);
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
}

TEST_CASE("dataset header layout is the documented one") {
    const fs::path dir = temp_dir("header");
    const ProblemSpec spec = ProblemSpec::make_benchmark(1.5, 30);
    const SnapshotSet set = build_dataset(spec, 5, 1, 2);
    save_dataset(dir / "d.bin", set);

    const auto bytes = slurp(dir / "d.bin");
    // magic + 4 u32 + f64 volume + 5*3 params + 1 time + 30*5 payload
    CHECK(bytes.size() == 8 + 16 + 8 + 8 * (5 * 3 + 1 + 30 * 5));
    CHECK(std::string(bytes.data(), 8) == "PODROM01");
    std::uint32_t header[4];
    std::memcpy(header, bytes.data() + 8, 16);
    CHECK(header[0] == 30);  // N_h
    CHECK(header[1] == 5);   // N_s
    CHECK(header[2] == 1);   // N_t
    CHECK(header[3] == 3);   // p
}

TEST_CASE("model files reload to bit-identical predictions") {
    const fs::path dir = temp_dir("model");
    const ProblemSpec spec = ProblemSpec::make_heat1d(30);
    const SnapshotSet data = build_dataset(spec, 8, 4, 5, 200);
    const PodBasis basis = build_pod_basis(data.U, data.domain_volume, 3);

    TrainConfig tc;
    tc.max_epochs = 30;
    tc.patience = 30;
    tc.batch = 8;
    tc.seed = 21;

    ArchSpec arch;
    arch.latent_n = 4;
    arch.phi_hidden = {6};
    arch.decoder_hidden = {7};
    arch.encoder_hidden = {7};
    const auto pdr = train_pod_dl_rom(data, basis, arch, tc);
    save_model(dir / "pdr.bin", pdr.model);
    const auto pdr2 = std::get<PodDlRomModel>(load_model(dir / "pdr.bin"));
    const std::vector<double> mu{0.4};
    CHECK(predict(pdr2, mu, 0.8) == predict(pdr.model, mu, 0.8));
    CHECK(pdr2.train_summary.n_data == data.n_data());

    const auto dnn = train_pod_dnn(data, basis, {9}, tc);
    save_model(dir / "dnn.bin", dnn.model);
    const auto dnn2 = std::get<PodDnnModel>(load_model(dir / "dnn.bin"));
    CHECK(predict(dnn2, mu, 0.3) == predict(dnn.model, mu, 0.3));

    const auto res = train_lin_resnet(data, basis, 3, 2, tc);
    save_model(dir / "res.bin", res.model);
    const auto res2 = std::get<LinResNetModel>(load_model(dir / "res.bin"));
    CHECK(predict(res2, mu, 0.5) == predict(res.model, mu, 0.5));
    CHECK(res2.residual_k == 3);

    // saved twice, identical bytes
    save_model(dir / "pdr_again.bin", pdr2);
    CHECK(slurp(dir / "pdr.bin") == slurp(dir / "pdr_again.bin"));

    CHECK_THROWS_AS((void)load_model(dir / "missing.bin"), std::runtime_error);
    CHECK_THROWS_AS((void)load_dataset(dir / "pdr.bin"), std::runtime_error);
}

TEST_CASE("config parsing, overrides and validation") {
    const fs::path dir = temp_dir("config");
    {
        std::ofstream os(dir / "run.cfg");
        os << "# comment line\n"
           << "problem = heat1d\n"
           << "ns = 12\n"
           << "lr = 2.5e-3\n"
           << "pod_dims = 1,2, 4\n"
           << "\n";
    }
    Config cfg = Config::from_file(dir / "run.cfg");
    CHECK(cfg.require_string("problem") == "heat1d");
    CHECK(cfg.get_size("ns", 0) == 12);
    CHECK(cfg.get_double("lr", 0.0) == 2.5e-3);
    CHECK(cfg.get_size_list("pod_dims", {}) == std::vector<std::size_t>{1, 2, 4});
    CHECK(cfg.get_size("missing", 7) == 7);
    CHECK_THROWS_AS((void)cfg.require_string("absent"), std::runtime_error);

    cfg.set_override("ns=99");
    CHECK(cfg.get_size("ns", 0) == 99);
    CHECK_THROWS_AS(cfg.set_override("no_equals_sign"), std::runtime_error);

    {
        std::ofstream os(dir / "bad.cfg");
        os << "just a dangling token\n";
    }
    CHECK_THROWS_AS((void)Config::from_file(dir / "bad.cfg"), std::runtime_error);
    {
        std::ofstream os(dir / "nan.cfg");
        os << "ns = twelve\n";
    }
    CHECK_THROWS_AS((void)Config::from_file(dir / "nan.cfg").get_size("ns", 0), std::runtime_error);
}

TEST_CASE("cmd_pod: spectrum csv, eps mode and rank clamping") {
    const fs::path dir = temp_dir("cmdpod");
    Config gen;
    gen.set("problem", "heat1d");
    gen.set("ns", "6");
    gen.set("nt", "5");
    gen.set("seed", "4");
    gen.set("granularity", "200");
    cli::cmd_generate(gen, dir / "train.bin");

    Config podcfg;
    podcfg.set("pod_n", "4");
    cli::cmd_pod(dir / "train.bin", podcfg, dir / "basis.bin", dir / "spectrum.csv", "thin", 0);
    const PodBasis basis = cli::load_basis(dir / "basis.bin");
    CHECK(basis.N == 4);
    CHECK(basis.V.rows == 100);
    CHECK(basis.sigma2.size() == 30); // min(N_h, N_data)

    std::ifstream spec_csv(dir / "spectrum.csv");
    std::string line;
    std::getline(spec_csv, line);
    CHECK(line == "k,sigma2,cumulative_tail");
    std::size_t rows = 0;
    while (std::getline(spec_csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == basis.sigma2.size());

    // eps mode must agree with the selection rule applied to the spectrum
    Config epscfg;
    epscfg.set("pod_eps", "0.05");
    cli::cmd_pod(dir / "train.bin", epscfg, dir / "basis_eps.bin", dir / "spectrum_eps.csv", "thin", 0);
    const PodBasis eps_basis = cli::load_basis(dir / "basis_eps.bin");
    const SnapshotSet train = load_dataset(dir / "train.bin");
    const double m = estimate_m_M({&train}).first;
    CHECK(eps_basis.N == select_pod_dim(basis.sigma2, m, 0.05).N);

    // oversized request clamps to the numerical rank
    Config bigcfg;
    bigcfg.set("pod_n", "60");
    cli::cmd_pod(dir / "train.bin", bigcfg, dir / "basis_big.bin", dir / "spectrum_big.csv", "thin", 0);
    const PodBasis big = cli::load_basis(dir / "basis_big.bin");
    CHECK(big.N < 60);
    CHECK(tail_energy(big.sigma2, big.N) <= 1e-12 * big.sigma2.front());
}

TEST_CASE("cmd_train validates the family tag") {
    const fs::path dir = temp_dir("cmdtrain");
    Config gen;
    gen.set("problem", "heat1d");
    gen.set("ns", "5");
    gen.set("nt", "4");
    gen.set("granularity", "200");
    cli::cmd_generate(gen, dir / "train.bin");
    Config podcfg;
    podcfg.set("pod_n", "3");
    cli::cmd_pod(dir / "train.bin", podcfg, dir / "basis.bin", dir / "spectrum.csv", "thin", 0);

    Config tcfg;
    tcfg.set("max_epochs", "5");
    CHECK_THROWS_AS(cli::cmd_train(dir / "train.bin", dir / "basis.bin", "noodle-net", tcfg,
                                   dir / "m.bin", dir / "log.csv"),
                    std::runtime_error);
}

TEST_CASE("cmd_eval rejects mismatched spatial dimensions") {
    const fs::path dir = temp_dir("cmdeval");
    Config gen;
    gen.set("problem", "heat1d");
    gen.set("ns", "5");
    gen.set("nt", "4");
    gen.set("granularity", "200");
    cli::cmd_generate(gen, dir / "train.bin");
    gen.set("nh", "60");
    cli::cmd_generate(gen, dir / "other.bin");

    Config podcfg;
    podcfg.set("pod_n", "3");
    cli::cmd_pod(dir / "train.bin", podcfg, dir / "basis.bin", dir / "spectrum.csv", "thin", 0);
    Config tcfg;
    tcfg.set("max_epochs", "5");
    tcfg.set("patience", "5");
    cli::cmd_train(dir / "train.bin", dir / "basis.bin", "pod-dnn", tcfg, dir / "m.bin", dir / "log.csv");
    CHECK_THROWS_AS((void)cli::cmd_eval(dir / "m.bin", dir / "other.bin", dir / "r.csv"),
                    std::runtime_error);
}

TEST_CASE("full pipeline is bit-deterministic") {
    auto run_pipeline = [](const fs::path& dir) {
        Config cfg;
        cfg.set("problem", "heat1d");
        cfg.set("ns", "8");
        cfg.set("nt", "5");
        cfg.set("seed", "13");
        cfg.set("granularity", "300");
        cli::cmd_generate(cfg, dir / "train.bin");
        Config tcfg;
        tcfg.set("problem", "heat1d");
        tcfg.set("ns", "10");
        tcfg.set("nt", "6");
        tcfg.set("seed", "14");
        tcfg.set("granularity", "300");
        cli::cmd_generate(tcfg, dir / "test.bin");

        Config podcfg;
        podcfg.set("pod_n", "4");
        cli::cmd_pod(dir / "train.bin", podcfg, dir / "basis.bin", dir / "spectrum.csv", "thin", 0);

        Config traincfg;
        traincfg.set("latent_n", "3");
        traincfg.set("phi_hidden", "5");
        traincfg.set("coder_hidden", "6");
        traincfg.set("max_epochs", "25");
        traincfg.set("patience", "25");
        traincfg.set("seed", "7");
        cli::cmd_train(dir / "train.bin", dir / "basis.bin", "pod-dl-rom", traincfg, dir / "model.bin",
                       dir / "log.csv");
        cli::cmd_eval(dir / "model.bin", dir / "test.bin", dir / "report.csv");
    };

    const fs::path a = temp_dir("pipe_a");
    const fs::path b = temp_dir("pipe_b");
    run_pipeline(a);
    run_pipeline(b);
    for (const std::string f : {"train.bin", "test.bin", "basis.bin", "spectrum.csv", "model.bin",
                                "log.csv", "report.csv"})
        CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("sampling sweep writes resumable long-form CSV and slopes") {
    const fs::path dir = temp_dir("sweep");
    SamplingSweepConfig sc = SamplingSweepConfig::for_axis(SamplingAxis::n_samples);
    sc.axis_values = {2, 4, 8};
    sc.fixed_other = 6;
    sc.pod_dims = {2, 3};
    sc.n_seeds = 2;
    sc.probe_ns = 10;
    sc.dense_nt = 24;
    sc.n_dofs = 40;
    sc.granularity = 150;

    const auto first = run_sampling_sweep(SamplingAxis::n_samples, sc, dir / "ns.csv", 1);
    CHECK(first.rows.size() == 3 * 2 * 2);
    CHECK(first.slope_by_dim.count(2) == 1);
    CHECK(first.slope_by_dim.count(3) == 1);

    // re-running over the finished file recomputes nothing and changes nothing
    const auto bytes_before = slurp(dir / "ns.csv");
    const auto second = run_sampling_sweep(SamplingAxis::n_samples, sc, dir / "ns.csv", 1);
    CHECK(slurp(dir / "ns.csv") == bytes_before);
    CHECK(second.rows.size() == first.rows.size());
    CHECK(second.slope_by_dim.at(2).slope == doctest::Approx(first.slope_by_dim.at(2).slope));

    write_sampling_summary(second, dir / "summary.csv");
    std::ifstream s(dir / "summary.csv");
    std::string line;
    std::getline(s, line);
    CHECK(line == "N,slope,intercept,r_squared");
}
