#include "gausslab/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"gausslab: elliptic solves and checks under weighted Gaussian measures"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand

    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::vector<std::string> overrides;

    app.add_option("--config", config_path, "path to the JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--threads", threads, "worker pool cap")->default_val(1);
    app.add_option("--override", overrides, "dotted-path config override key=value");

    for (const auto& name : gausslab::command_names()) {
        app.add_subcommand(name, gausslab::command_help(name));
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    return gausslab::run_command(command, config_path, out_dir, threads, overrides);
}
