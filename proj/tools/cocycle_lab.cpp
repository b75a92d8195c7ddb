#include "config.hpp"
#include "experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"cocycle-lab: numerical experiments on quasiperiodic cocycles over rotations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("--config", config_path, "Path to the key = value config")->required();
    auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides seed)");
    auto* threads_opt = run->add_option("--threads", threads, "Worker threads (overrides threads)")
                            ->check(CLI::Range(1, 256));

    CLI::App* list = app.add_subcommand("list-experiments", "List experiments and their CSV columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (list->parsed()) {
        for (const auto& info : lab::experiment_catalog()) {
            std::cout << info.name << "\n  " << info.summary << "\n  columns: ";
            for (std::size_t i = 0; i < info.columns.size(); ++i) std::cout << (i ? "," : "") << info.columns[i];
            std::cout << "\n";
        }
        return 0;
    }

    lab::RunOptions opts;
    if (*out_opt) opts.out_dir = out_dir;
    if (*seed_opt) opts.seed = seed;
    if (*threads_opt) opts.threads = threads;
    try {
        const lab::RunResult r = lab::run_experiment(lab::Config::load(config_path), opts);
        std::cout << r.experiment << ": " << lab::verdict_name(r.verdict) << " (" << r.status << ")\n"
                  << "  csv:     " << r.csv.string() << "\n"
                  << "  summary: " << r.summary.string() << "\n";
        return lab::exit_code(r.verdict);
    } catch (const lab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
