// Command-line driver: one subcommand per run mode, config from a
// key=value file, artifacts under --output.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fracpme/cli.hpp"
#include "fracpme/errors.hpp"

namespace {

// Swallows log output under --quiet.
struct NullBuffer : std::streambuf {
    int overflow(int c) override { return c; }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional porous-medium solver and verification harness"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("--config", config_path, "key=value run description");
    app.add_option("--output", output_dir, "artifact directory (overrides config)");
    app.add_option("--seed", seed, "RNG seed (overrides config)");
    app.add_flag("--quiet", quiet, "suppress log output");

    std::optional<fracpme::cli::Mode> mode;
    for (const auto* name : {"evolve", "aux-solve", "probe-barrier", "verify", "converge"}) {
        auto* sub = app.add_subcommand(name, "run in " + std::string(name) + " mode");
        sub->fallthrough();  // accept the global flags after the subcommand
        sub->callback([&mode, name] { mode = fracpme::cli::parse_mode(name); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;  // --help exits 0, bad flags are config errors
    }

    NullBuffer null_buffer;
    std::ostream null_stream(&null_buffer);
    std::ostream& log = quiet ? null_stream : std::cout;

    fracpme::cli::RunConfig cfg;
    try {
        const std::string text = config_path.empty() ? "" : read_file(config_path);
        if (text.empty() && !mode)
            throw std::runtime_error("no mode given: pass a subcommand or a config file");
        cfg = fracpme::cli::parse_config(text, mode);
    } catch (const fracpme::ParseError& e) {
        std::cerr << "config error"
                  << (config_path.empty() ? "" : " in " + config_path) << ": " << e.what()
                  << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    }
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (seed) cfg.seed = *seed;

    return fracpme::cli::dispatch(cfg, log);
}
