// Command-line driver: msfem <subcommand> [--config PATH] [--out DIR] [--threads K] [--seed U64]

#include <cstdint>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "msfem/error.hpp"
#include "msfem/run.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Mixed generalized multiscale finite element experiments"};
    std::string subcommand;
    std::string config_path;
    std::string out_dir = "out";
    int threads = 0;
    std::optional<std::uint64_t> seed;

    app.add_option("subcommand", subcommand, "fine | table | eigens | oversample | transport | twophase")
        ->required()
        ->check(CLI::IsMember(msfem::subcommands()));
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "seed for synthetic permeability and block sources");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(msfem::ErrorCategory::config);
    }

    try {
        msfem::RunConfig config =
            config_path.empty() ? msfem::parse_config("{}") : msfem::load_config(config_path);
        if (threads > 0)
            config.threads = threads;
        if (seed)
            config.seed = *seed;
        const auto files = msfem::run(subcommand, config, out_dir, std::cerr);
        for (const auto& f : files)
            std::cout << f.string() << '\n';
    } catch (const msfem::Error& e) {
        std::cerr << "msfem: " << e.what() << '\n';
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "msfem: " << e.what() << '\n';
        return static_cast<int>(msfem::ErrorCategory::numeric);
    }
    return 0;
}
