#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "mwlp/config.hpp"
#include "mwlp/error.hpp"
#include "mwlp/parallel.hpp"
#include "mwlp/runner.hpp"

int main(int argc, char** argv) {
    using namespace mwlp;
    CLI::App app{"Matrix-weighted L^p experiments: A_p constants, multiplier bounds, Besov equivalence"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    auto* config_opt = app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "root seed (overrides the config)");
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
    bool quiet = false;
    app.add_flag("--quiet", quiet, "do not print the report to stdout");

    for (const char* name : {"ap-constant", "doubling", "sampling-check", "multiplier-bound", "besov-equiv", "all"})
        app.add_subcommand(name, std::string("run ") + name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    ExperimentConfig cfg;
    try {
        if (*config_opt) cfg = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.code());
    }
    cfg.command = *command_from_string(app.get_subcommands().front()->get_name());
    if (*seed_opt) cfg.seed = seed;
    if (*out_opt) cfg.output_dir = out_dir;
    if (*threads_opt) cfg.threads = threads;
    set_thread_count(cfg.threads);

    const auto report = run(cfg);
    try {
        write_report(report, cfg.output_dir);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.code());
    }
    if (!quiet) std::cout << to_json(report).dump(2) << "\n";
    for (const auto& e : report.errors) std::cerr << e.command << ": " << e.message << "\n";
    return report.exit_code;
}
