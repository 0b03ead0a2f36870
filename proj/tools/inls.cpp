#include "inls/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Radial inhomogeneous Schrodinger laboratory: ground states, blow-up criteria and evolution"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int workers = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config 'outputs')");
        sub->add_option("--seed", seed, "seed for randomized suites (overrides config 'seed')");
    };
    CLI::App* gs = app.add_subcommand("ground-state", "solve for the ground state and write its certificate");
    CLI::App* cl = app.add_subcommand("classify", "classify an initial datum against the blow-up conditions");
    CLI::App* ev = app.add_subcommand("evolve", "integrate the equation from a datum");
    CLI::App* ci = app.add_subcommand("check-identities", "run the invariant suites");
    CLI::App* sw = app.add_subcommand("sweep", "run a parameter sweep over a worker pool");
    for (CLI::App* sub : {gs, cl, ev, ci, sw}) add_common(sub);
    sw->add_option("--workers", workers, "number of concurrent runs (capped by max_parallel)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : inls::kExitConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        if (command == "sweep") {
            inls::SweepManifest m = inls::load_sweep_manifest(config_path);
            if (!out_dir.empty()) m.base["outputs"] = std::filesystem::absolute(out_dir).string();
            if (chosen->count("--seed")) m.base["seed"] = seed;
            const inls::SweepResult r = inls::cmd_sweep(m, workers, std::cerr);
            std::cout << r.summary.string() << "\n";
            return r.exit_code;
        }
        inls::RunConfig config = inls::load_run_config(config_path);
        if (!out_dir.empty()) config.outputs = out_dir;
        if (chosen->count("--seed")) config.seed = seed;
        const inls::CommandResult r = inls::run_command(command, config, std::cerr);
        if (!r.run_dir.empty() && r.exit_code != inls::kExitConfig) std::cout << r.run_dir.string() << "\n";
        return r.exit_code;
    } catch (const inls::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return inls::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return inls::kExitConfig;
    }
}
