#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ftn/errors.hpp"
#include "lab/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

void add_run_options(CLI::App* cmd, RunArgs& args)
{
    cmd->add_option("--out", args.out, "output directory (default out/<name>)");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--threads", args.threads, "worker threads; results do not depend on it")
        ->check(CLI::Range(1, 256));
}

int run(ftn::lab::ExperimentConfig cfg, const RunArgs& args)
{
    ftn::lab::RunOptions opt;
    opt.out_dir = args.out;
    opt.seed = args.seed;
    opt.threads = args.threads;
    const auto report = ftn::lab::run_to_directory(std::move(cfg), opt);
    for (const auto& f : report.files) std::cout << f << '\n';
    std::fprintf(stderr, "done in %.2f s\n", report.elapsed_s);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace ftn::lab;
    CLI::App app{"Faster-than-Nyquist simulation lab"};
    app.require_subcommand(1);

    RunArgs args;
    std::optional<ExperimentKind> direct_kind;
    for (ExperimentKind k : all_kinds()) {
        auto* cmd = app.add_subcommand(std::string(to_string(k)), "run a " + std::string(to_string(k)) + " config");
        cmd->add_option("--config", args.config, "TOML config file")->required();
        add_run_options(cmd, args);
        cmd->callback([&direct_kind, k] { direct_kind = k; });
    }

    auto* run_cmd = app.add_subcommand("run", "run a bundled config by name, or a config file");
    run_cmd->add_option("config", args.config, "bundled name or path")->required();
    add_run_options(run_cmd, args);

    std::string config_dir;
    auto* list_cmd = app.add_subcommand("list", "list bundled configs (and user configs)");
    list_cmd->add_option("--config-dir", config_dir, "directory with additional *.toml configs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& e : list_experiments(config_dir))
                std::cout << e.name << '\t' << to_string(e.kind) << '\t' << e.source << '\t' << e.description << '\n';
            return 0;
        }
        ExperimentConfig cfg = direct_kind ? load_config(args.config) : resolve_config(args.config);
        if (direct_kind && cfg.kind != *direct_kind)
            throw ConfigError(args.config, "experiment",
                              "config is '" + std::string(to_string(cfg.kind)) + "', not '" +
                                  std::string(to_string(*direct_kind)) + "'");
        return run(std::move(cfg), args);
    }
    catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const ftn::StateExplosion& e) {
        std::cerr << "resource budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    }
    catch (const ftn::InvalidArgument& e) {
        std::cerr << "invalid value: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
