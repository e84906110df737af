// Command-line driver: one subcommand per scenario plus a generic `run` mode
// that takes a full config file. Every paper-style experiment is reproducible
// from a single command.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "fdm/config.hpp"
#include "fdm/scenario.hpp"
#include "fdm/spectral.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    long snapshot_every = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
    cmd->add_option("--output", flags.output_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "RNG seed")->each([&](const std::string&) {
        flags.seed_set = true;
    });
    cmd->add_option("--threads", flags.threads, "FFT worker threads");
    cmd->add_option("--snapshot-every", flags.snapshot_every,
                    "snapshot cadence in steps (0 disables)");
}

int finish_and_run(fdm::RunConfig cfg, const CommonFlags& flags) {
    if (!flags.output_dir.empty()) cfg.output_dir = flags.output_dir;
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.threads > 0) cfg.threads = flags.threads;
    if (flags.snapshot_every >= 0) cfg.snapshot_every = flags.snapshot_every;

    const auto errors = fdm::validate_config(cfg);
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
        return 2;
    }
    fdm::set_fft_threads(cfg.threads);
    const auto result = fdm::run_scenario(cfg, std::cout);
    return result.exit_code;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Periodic-cell field dislocation mechanics simulator: FFT statics plus a "
        "central-upwind transport solver on a plastic layer"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "run a scenario from a config file");
    add_common(run_cmd, run_flags);

    std::vector<std::pair<CLI::App*, CommonFlags>> scen_cmds;
    scen_cmds.reserve(16);
    for (const auto& name : fdm::all_scenario_names()) {
        CLI::App* cmd = app.add_subcommand(name, "run the " + name + " experiment");
        scen_cmds.emplace_back(cmd, CommonFlags{});
    }
    // CLI11 stores option targets by reference; bind after the vector settles.
    {
        std::size_t q = 0;
        for ([[maybe_unused]] const auto& name : fdm::all_scenario_names()) {
            add_common(scen_cmds[q].first, scen_cmds[q].second);
            ++q;
        }
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (run_flags.config_path.empty()) {
                std::cerr << "run: --config <path> is required\n";
                return 2;
            }
            const auto parsed = fdm::parse_config(read_file(run_flags.config_path));
            if (!parsed.ok()) {
                for (const auto& e : parsed.errors)
                    std::cerr << "config error: " << e << "\n";
                return 2;
            }
            return finish_and_run(*parsed.config, run_flags);
        }
        std::size_t q = 0;
        for (const auto& name : fdm::all_scenario_names()) {
            auto& [cmd, flags] = scen_cmds[q++];
            if (!cmd->parsed()) continue;
            fdm::RunConfig cfg = fdm::scenario_defaults(*fdm::scenario_from_name(name));
            cfg.output_dir = "out/" + name;
            if (!flags.config_path.empty()) {
                const auto parsed =
                    fdm::apply_overrides(cfg, read_file(flags.config_path));
                if (!parsed.ok()) {
                    for (const auto& e : parsed.errors)
                        std::cerr << "config error: " << e << "\n";
                    return 2;
                }
                cfg = *parsed.config;
            }
            return finish_and_run(cfg, flags);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
