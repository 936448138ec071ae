// Command-line front end for the POD-DL-ROM pipeline: dataset generation,
// POD basis extraction, model training, error reports and the experiment
// sweeps. All heavy lifting lives in the headers under include/podrom.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "podrom/cli.hpp"
#include "podrom/parallel.hpp"

namespace fs = std::filesystem;

namespace {

podrom::Config load_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    podrom::Config cfg;
    if (!config_path.empty()) cfg = podrom::Config::from_file(config_path);
    for (const auto& kv : overrides) cfg.set_override(kv);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"podrom: POD-DL-ROM pipeline and error-analysis experiments"};
    app.require_subcommand(1);
    app.fallthrough(); // --config/--set may follow the subcommand

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "run configuration file (key = value lines)");
    app.add_option("--set", overrides, "override a config entry, key=value")->take_all();

    // generate
    auto* gen = app.add_subcommand("generate", "build a snapshot dataset");
    std::string gen_out = "dataset.bin";
    std::uint64_t gen_seed = 0;
    bool gen_seed_set = false;
    gen->add_option("--out", gen_out, "output dataset path");
    gen->add_option("--seed", gen_seed, "dataset seed (overrides config)")->each([&](const std::string&) {
        gen_seed_set = true;
    });

    // pod
    auto* pod = app.add_subcommand("pod", "compute the POD basis and spectrum of a dataset");
    std::string pod_dataset, pod_out = "basis.bin", pod_spectrum = "spectrum.csv", pod_svd = "thin";
    std::uint64_t pod_seed = 0;
    pod->add_option("--dataset", pod_dataset, "input dataset")->required();
    pod->add_option("--out", pod_out, "output basis path");
    pod->add_option("--spectrum", pod_spectrum, "output spectrum CSV path");
    pod->add_option("--svd", pod_svd, "thin | randomized")
        ->check(CLI::IsMember({"thin", "randomized"}));
    pod->add_option("--seed", pod_seed, "seed for the randomized sketch");

    // train
    auto* train = app.add_subcommand("train", "train a model on a dataset + basis");
    std::string train_dataset, train_basis, train_family = "pod-dl-rom";
    std::string train_out = "model.bin", train_log = "training_log.csv";
    train->add_option("--dataset", train_dataset, "training dataset")->required();
    train->add_option("--basis", train_basis, "POD basis file")->required();
    train->add_option("--family", train_family, "pod-dl-rom | pod-dnn | lin-resnet");
    train->add_option("--out", train_out, "output model path");
    train->add_option("--log", train_log, "training log CSV path");

    // eval
    auto* eval = app.add_subcommand("eval", "error report of a model on a test dataset");
    std::string eval_model, eval_test, eval_out = "report.csv";
    eval->add_option("--model", eval_model, "model file")->required();
    eval->add_option("--test", eval_test, "test dataset")->required();
    eval->add_option("--out", eval_out, "report CSV path");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run one of the experiment sweeps");
    std::string sweep_kind, sweep_out = "sweep_out";
    std::size_t sweep_threads = podrom::default_threads();
    sweep->add_option("--kind", sweep_kind, "sampling-Ns | sampling-Nt | pod-decay | complexity | bounds")
        ->required()
        ->check(CLI::IsMember({"sampling-Ns", "sampling-Nt", "pod-decay", "complexity", "bounds"}));
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--threads", sweep_threads, "parallel sweep width");

    CLI11_PARSE(app, argc, argv);

    try {
        podrom::Config cfg = load_config(config_path, overrides);
        if (gen->parsed()) {
            if (gen_seed_set) cfg.set("seed", std::to_string(gen_seed));
            podrom::cli::cmd_generate(cfg, gen_out);
        } else if (pod->parsed()) {
            podrom::cli::cmd_pod(pod_dataset, cfg, pod_out, pod_spectrum, pod_svd, pod_seed);
        } else if (train->parsed()) {
            podrom::cli::cmd_train(train_dataset, train_basis, train_family, cfg, train_out, train_log);
        } else if (eval->parsed()) {
            podrom::cli::cmd_eval(eval_model, eval_test, eval_out);
        } else if (sweep->parsed()) {
            podrom::cli::cmd_sweep(sweep_kind, cfg, sweep_out, sweep_threads);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
