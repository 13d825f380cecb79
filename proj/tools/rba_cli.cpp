// Experiment runner CLI: executes a config (file path or bundled name) and
// writes manifest.json, CSV artifacts, and summary.json to the output dir.
//
//   rba run --config configs/uniform_n2.cfg [--seed S] [--threads K]
//           [--out DIR] [--strict]
//   rba list-experiments
//
// Exit codes: 0 ok, 1 assertion failure, 2 config parse error,
// 3 validation error, 4 runtime failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"

#include "rba/config.hpp"
#include "rba/experiments.hpp"

namespace {

int run_command(const std::string& config_arg, std::optional<std::uint64_t> seed, int threads,
                const std::string& out_dir, bool strict) {
    rba::ExperimentConfig cfg;
    try {
        if (auto text = rba::builtin_config_text(config_arg))
            cfg = rba::ExperimentConfig::parse_text(*text);
        else
            cfg = rba::ExperimentConfig::parse_file(config_arg);
    } catch (const rba::ConfigParseError& e) {
        std::fprintf(stderr, "config parse error: %s\n", e.what());
        return 2;
    }

    rba::RunOptions opts;
    opts.seed_override = seed;
    opts.threads = threads;
    opts.strict = strict;
    if (!out_dir.empty()) opts.out_dir_override = out_dir;

    try {
        rba::RunResult res = rba::run_experiment(cfg, opts);
        for (const rba::Assertion& a : res.assertions)
            std::printf("[%s] %s: %.10g %s %.10g\n", a.pass ? "ok" : "FAIL", a.name.c_str(),
                        a.value, a.relation.c_str(), a.threshold);
        std::printf("artifacts written to %s\n", res.out_dir.c_str());
        return res.assertions_ok ? 0 : 1;
    } catch (const rba::ConfigValidationError& e) {
        std::fprintf(stderr, "config validation error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rank-based position auctions: equilibria, optimal designs, inference"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed_value = 0;
    int threads = 1;
    bool strict = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("--config", config_path, "config file path or bundled name")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed_value, "override the config seed");
    run->add_option("--threads", threads, "worker threads for independent trials");
    run->add_option("--out", out_dir, "override the output directory");
    run->add_flag("--strict", strict, "stop at the first failed assertion");

    CLI::App* list = app.add_subcommand("list-experiments", "print the bundled config catalog");
    std::string write_dir;
    list->add_option("--write", write_dir, "also write each bundled config as a .cfg file");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& [name, text] : rba::builtin_configs()) {
            std::string first_line = text.substr(0, text.find('\n'));
            std::printf("%-24s %s\n", name.c_str(),
                        first_line.rfind("# ", 0) == 0 ? first_line.c_str() + 2
                                                       : first_line.c_str());
            if (!write_dir.empty()) {
                std::filesystem::create_directories(write_dir);
                std::ofstream out(std::filesystem::path(write_dir) / (name + ".cfg"),
                                  std::ios::binary);
                out << text;
            }
        }
        return 0;
    }

    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) seed = seed_value;
    return run_command(config_path, seed, threads, out_dir, strict);
}
