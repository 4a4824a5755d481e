// Batch driver: `cpree run cfg.json [--seed S] [--workers N] [--out PATH]`
// and `cpree validate cfg.json`. Exit 0 ok, 2 bad config, 3 runtime failure.
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cpree/experiment.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("CPREE_SEED");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used, 10);
        if (used != std::string(s).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw cpree::ConfigError(std::string("CPREE_SEED is not an unsigned integer: ") + s);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo lab for the contact process in a randomly evolving environment"};
    app.require_subcommand(1);

    std::string run_path, validate_path;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
    auto* run = app.add_subcommand("run", "run the experiment a config describes");
    run->add_option("config", run_path, "experiment config (JSON)")->required();
    auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides config and CPREE_SEED)");
    auto* workers_opt = run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    auto* out_opt = run->add_option("--out", out, "output path, '-' for stdout");

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", validate_path, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    cpree::Overrides ov;
    cpree::ExperimentConfig cfg;
    try {
        ov.env_seed = env_seed();
        if (*seed_opt) ov.seed = seed;
        if (*workers_opt) ov.workers = workers;
        if (*out_opt) ov.out = out;
        cfg = cpree::load_config(*validate ? validate_path : run_path, ov);
    } catch (const cpree::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    if (*validate) {
        std::cout << "ok: " << cpree::to_string(cfg.kind) << ", digest " << cpree::hex64(cfg.digest) << '\n';
        return 0;
    }

    try {
        const auto result = cpree::run_experiment(cfg);
        const std::string summary = cpree::write_outputs(cfg, result);
        const bool to_stdout = cfg.output_path.empty() || cfg.output_path == "-";
        (to_stdout ? std::cerr : std::cout) << summary << '\n';
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
