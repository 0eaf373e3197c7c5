#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracpme/evolution.hpp"
#include "fracpme/fields.hpp"

namespace fracpme::cli {

enum class Mode { evolve, aux_solve, probe_barrier, verify, converge };

Mode parse_mode(const std::string& word);  // std::invalid_argument on unknown
std::string to_string(Mode mode);

/// Named data profile with numeric parameters, or an external two-column
/// file (x,value) interpolated linearly and clamped at its ends.
struct DataProfile {
    std::string kind;
    std::map<std::string, double> params;
    std::string path;

    double param(const std::string& key, double fallback) const;
};

struct RunConfig {
    Mode mode = Mode::verify;
    evolution::SolverConfig solver;
    DataProfile initial_data{"bump", {}, ""};
    DataProfile density{"one", {}, ""};

    double probe_r0 = 1.0;
    std::vector<double> probe_radii = {4.0, 8.0, 16.0};
    std::size_t probe_ntheta = 65;
    double probe_r_min = 0.0;  // 0 = default hole radius

    std::size_t levels = 3;  // converge mode refinement depth
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

/// Line-oriented key=value text with optional [section] headers; '#' or ';'
/// start a comment line. Sections: run, solver, initial_data, density,
/// probe. Keys of every section are also accepted before any header, with
/// the profile-name aliases u0 and rho. Unknown keys, malformed values, and
/// missing referenced files raise ParseError carrying the line number.
/// mode_override (the CLI subcommand) wins over the mode key and makes it
/// optional.
RunConfig parse_config(const std::string& text,
                       std::optional<Mode> mode_override = std::nullopt);

std::function<double(double)> initial_function(const DataProfile& profile);
std::function<double(double)> density_function(const DataProfile& profile);

struct CheckResult {
    std::string name;
    double measured = 0;
    double threshold = 0;
    bool pass = false;
};

/// Machine-readable run summary. render() is deterministic: no timestamps,
/// no addresses, fixed ordering, so identical configs and seeds reproduce
/// the report byte for byte.
struct Report {
    std::string title;
    std::vector<std::string> provenance;  // config echo, grid summary, version
    std::vector<CheckResult> checks;

    bool overall() const;
    std::string render() const;
};

/// CSV writers with round-trippable precision. Headers: "x,u" for traces,
/// "x,y,w" for strip fields, "r,theta,psi" for polar fields,
/// "t,energy,lyapunov,mass,iterations" for diagnostics series. I/O failures
/// raise std::runtime_error naming the path.
void emit_snapshot(const TraceField& u, const std::filesystem::path& path);
void emit_snapshot(const ExtensionField& w, const std::filesystem::path& path);
void emit_snapshot(const PolarField& psi, const std::filesystem::path& path);
void emit_snapshot(const std::vector<evolution::StepDiagnostics>& series,
                   const std::filesystem::path& path);

/// Runs the configured mode, writes artifacts and report.txt under
/// output_dir, and returns the process exit code: 0 success (verify: all
/// checks pass), 1 run failure (partial artifacts retained), 2 verification
/// failure, 3 configuration error.
int dispatch(const RunConfig& cfg, std::ostream& log);

}  // namespace fracpme::cli
