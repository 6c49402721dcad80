#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "critns/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"critns: critical-space diagnostics for Navier-Stokes on the periodic box"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    app.add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    for (const auto& name : critns::command_names()) app.add_subcommand(name);
    app.fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    critns::json config;
    try {
        std::ifstream is(config_path);
        config = critns::json::parse(is);
    } catch (const critns::json::exception& e) {
        std::cerr << critns::json{{"error", "config"}, {"message", e.what()}, {"command", command}}.dump() << '\n';
        return 1;
    }
    critns::ConfigContext ctx{std::filesystem::path(config_path).parent_path()};
    return critns::run_command(command, config, ctx, out_dir, threads, std::cout, std::cerr);
}
