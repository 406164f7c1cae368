// Command-line front end: deterministic batch execution of the library's
// simulation, verification and control solvers from a config file.

#include <CLI11.hpp>

#include <jumpflow/jumpflow.hpp>

int main(int argc, char** argv) {
    CLI::App app{"jumpflow - Monte Carlo stochastic flows and control for jump-diffusion SDEs"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = -1;
    std::string out_dir;

    for (const std::string& name : jumpflow::subcommand_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--threads", threads, "worker threads (0 = auto; must not change results)");
        sub->add_option("--out", out_dir, "output directory (overrides config and JUMPFLOW_OUT)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are configuration errors
    }

    jumpflow::RunnerOptions opts;
    opts.config_path = config_path;
    if (seed_given) opts.seed_override = seed;
    if (threads >= 0) opts.threads_override = threads;
    if (!out_dir.empty()) opts.out_dir_override = out_dir;

    return jumpflow::run_subcommand(app.get_subcommands().front()->get_name(), opts);
}
