// objcomp: command line front end for the pipeline stages.
//
//   objcomp <command> --config scene.json [--seed N] [--out DIR]
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.

#include "objcomp/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Object compositing pipeline: texture refinement, relighting, rendering and compositing"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"export-views", "write coarse renders, depth maps and a view manifest for the external refiner"},
        {"refine", "optimize the UV texture against the manifest's target views"},
        {"relight", "correct the environment light toward the object's colour"},
        {"render", "render the object, its shadow and the composite for one pose"},
        {"animate", "render a pose clip to a frame sequence"},
        {"composite", "composite precomputed layers over the background"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "config file (JSON)")->required();
        sub->add_option("--seed", seed, "override render.seed");
        sub->add_option("--out", out_dir, "override output_dir");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        for (char& ch : msg) {
            if (ch == '\n' || ch == '"') {
                ch = ' ';
            }
        }
        std::cerr << "error: code=2 field=\"arguments\" msg=\"" << msg << "\"\n";
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        objcomp::PipelineConfig cfg = objcomp::load_config(config_path);
        if (seed) {
            cfg.render.settings.seed = *seed;
        }
        if (out_dir) {
            cfg.output_dir = *out_dir;
        }
        for (const auto& path : objcomp::run_command(command, cfg)) {
            std::cout << path.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << objcomp::format_error(e) << '\n';
        return objcomp::exit_code_for(e);
    }
    return 0;
}
