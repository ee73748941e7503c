#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "fgl/commands.hpp"

namespace {

int parse_threads(const std::string& text, const char* origin) {
    try {
        std::size_t used = 0;
        const int n = std::stoi(text, &used);
        if (used == text.size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw fgl::ConfigError(std::string(origin) + ": thread count must be a positive integer, got '" + text + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finsler Ginzburg-Landau experiments on the flat torus"};
    std::string command;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> threads;
    app.add_option("command", command, "torus-example | minimize | sweep | check | print-config")
        ->required()
        ->check(CLI::IsMember({"torus-example", "minimize", "sweep", "check", "print-config"}));
    app.add_option("--config", config_path, "configuration file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
    app.add_option("--seed", seed, "random seed (overrides [output] seed)");
    app.add_option("--threads", threads, "worker threads (fallback: FGL_THREADS)");
    CLI11_PARSE(app, argc, argv);

    try {
        fgl::ExperimentConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw fgl::ConfigError("cannot open config file " + config_path);
            cfg = fgl::parse_config(in, config_path);
        }
        if (out_dir) cfg.output_dir = *out_dir;
        if (seed) cfg.seed = *seed;
        fgl::validate_config(cfg);

        if (threads) {
            omp_set_num_threads(parse_threads(*threads, "--threads"));
        } else if (const char* env = std::getenv("FGL_THREADS"); env && *env) {
            omp_set_num_threads(parse_threads(env, "FGL_THREADS"));
        }

        if (command == "torus-example") return fgl::cmd_torus_example(cfg, std::cout);
        if (command == "minimize") return fgl::cmd_minimize(cfg, std::cout);
        if (command == "sweep") return fgl::cmd_sweep(cfg, std::cout);
        if (command == "check") return fgl::cmd_check(cfg, std::cout);
        return fgl::cmd_print_config(cfg, std::cout);
    } catch (const fgl::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
