#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fracpme/cli.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/grid.hpp"

namespace fracpme::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& value, std::size_t line) {
    double out = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end || value.empty())
        throw ParseError(line, "expected a number, got '" + value + "'");
    return out;
}

std::size_t parse_count(const std::string& value, std::size_t line) {
    const double d = parse_number(value, line);
    if (d < 0 || d != std::floor(d))
        throw ParseError(line, "expected a nonnegative integer, got '" + value + "'");
    return static_cast<std::size_t>(d);
}

std::uint64_t parse_seed(const std::string& value, std::size_t line) {
    std::uint64_t out = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end || value.empty())
        throw ParseError(line, "expected an unsigned integer, got '" + value + "'");
    return out;
}

std::vector<double> parse_list(const std::string& value, std::size_t line) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(value);
    while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), line));
    if (out.empty()) throw ParseError(line, "expected a comma-separated list of numbers");
    return out;
}

void require(bool ok, std::size_t line, const std::string& msg) {
    if (!ok) throw ParseError(line, msg);
}

const std::set<std::string> kInitialKinds = {"bump", "cauchy", "constant", "two-bump", "file"};
const std::set<std::string> kDensityKinds = {"one", "cauchy-decay", "power-decay", "file"};

const std::map<std::string, std::set<std::string>> kInitialParams = {
    {"bump", {"center", "width", "height"}},
    {"cauchy", {"amplitude"}},
    {"constant", {"value"}},
    {"two-bump", {"separation", "width", "height"}},
    {"file", {}},
};
const std::map<std::string, std::set<std::string>> kDensityParams = {
    {"one", {}},
    {"cauchy-decay", {}},
    {"power-decay", {"alpha"}},
    {"file", {}},
};

// Parser scratch: where each key was last set, for end-of-parse validation
// messages that still carry a line number.
struct ProfileState {
    std::size_t kind_line = 0;
    std::size_t path_line = 0;
    std::map<std::string, std::size_t> param_lines;
};

struct ParseState {
    bool mode_seen = false;
    ProfileState initial, density;
};

void set_profile_kind(DataProfile& p, ProfileState& st, const std::set<std::string>& kinds,
                      const std::string& value, std::size_t line, const char* what) {
    if (!kinds.count(value))
        throw ParseError(line, std::string("unknown ") + what + " profile '" + value + "'");
    p.kind = value;
    st.kind_line = line;
}

void set_profile_param(DataProfile& p, ProfileState& st, const std::string& key,
                       const std::string& value, std::size_t line) {
    p.params[key] = parse_number(value, line);
    st.param_lines[key] = line;
}

// One table-driven setter per (section, key). Returns false for keys the
// section does not define.
bool apply_key(RunConfig& cfg, ParseState& st, const std::string& section,
               const std::string& key, const std::string& value, std::size_t line) {
    const bool top = section.empty();

    if (top || section == "run") {
        if (key == "mode") {
            cfg.mode = [&] {
                try {
                    return parse_mode(value);
                } catch (const std::invalid_argument& e) {
                    throw ParseError(line, e.what());
                }
            }();
            st.mode_seen = true;
            return true;
        }
        if (key == "output_dir") { cfg.output_dir = value; return true; }
        if (key == "seed") { cfg.seed = parse_seed(value, line); return true; }
        if (key == "levels") {
            cfg.levels = parse_count(value, line);
            require(cfg.levels >= 1, line, "levels must be at least 1");
            return true;
        }
    }

    if (top || section == "solver") {
        auto& s = cfg.solver;
        if (key == "R") {
            s.R = parse_number(value, line);
            require(s.R > 0, line, "R must be positive");
            return true;
        }
        if (key == "Y") { s.Y = parse_number(value, line); return true; }
        if (key == "nx") {
            s.nx = parse_count(value, line);
            require(s.nx >= 4, line, "nx must be at least 4");
            return true;
        }
        if (key == "ny") { s.ny = parse_count(value, line); return true; }
        if (key == "grade") {
            s.grade = parse_number(value, line);
            require(s.grade >= 1, line, "grade must be at least 1");
            return true;
        }
        if (key == "epsilon") {
            s.epsilon = parse_number(value, line);
            require(s.epsilon > 0, line, "epsilon must be positive");
            return true;
        }
        if (key == "m") {
            s.m = parse_number(value, line);
            require(s.m >= 1, line, "m must be at least 1");
            return true;
        }
        if (key == "T") {
            s.T = parse_number(value, line);
            require(s.T > 0, line, "T must be positive");
            return true;
        }
    }

    if (section == "initial_data") {
        if (key == "profile") {
            set_profile_kind(cfg.initial_data, st.initial, kInitialKinds, value, line,
                             "initial-data");
            return true;
        }
        if (key == "path") {
            cfg.initial_data.path = value;
            st.initial.path_line = line;
            return true;
        }
    }
    if (section == "density") {
        if (key == "profile") {
            set_profile_kind(cfg.density, st.density, kDensityKinds, value, line, "density");
            return true;
        }
        if (key == "path") {
            cfg.density.path = value;
            st.density.path_line = line;
            return true;
        }
    }
    if (top && key == "path")
        throw ParseError(line, "ambiguous key 'path': set it inside [initial_data] or [density]");

    if (top || section == "initial_data") {
        if (key == "initial_data" || key == "u0") {
            set_profile_kind(cfg.initial_data, st.initial, kInitialKinds, value, line,
                             "initial-data");
            return true;
        }
        static const std::set<std::string> keys = {"center", "width",  "height",
                                                   "amplitude", "value", "separation"};
        if (keys.count(key)) {
            set_profile_param(cfg.initial_data, st.initial, key, value, line);
            return true;
        }
    }

    if (top || section == "density") {
        if (key == "density" || key == "rho") {
            set_profile_kind(cfg.density, st.density, kDensityKinds, value, line, "density");
            return true;
        }
        if (key == "alpha") {
            set_profile_param(cfg.density, st.density, key, value, line);
            return true;
        }
    }

    if (top || section == "probe") {
        if (key == "r0") {
            cfg.probe_r0 = parse_number(value, line);
            require(cfg.probe_r0 > 0, line, "r0 must be positive");
            return true;
        }
        if (key == "radii") {
            cfg.probe_radii = parse_list(value, line);
            for (std::size_t k = 0; k < cfg.probe_radii.size(); ++k)
                require(cfg.probe_radii[k] > 0 &&
                            (k == 0 || cfg.probe_radii[k] > cfg.probe_radii[k - 1]),
                        line, "radii must be positive and increasing");
            return true;
        }
        if (key == "ntheta") {
            cfg.probe_ntheta = parse_count(value, line);
            require(cfg.probe_ntheta >= 3, line, "ntheta must be at least 3");
            return true;
        }
        if (key == "r_min") {
            cfg.probe_r_min = parse_number(value, line);
            require(cfg.probe_r_min >= 0, line, "r_min must be nonnegative");
            return true;
        }
    }

    return false;
}

void validate_profile(const DataProfile& p, const ProfileState& st,
                      const std::map<std::string, std::set<std::string>>& allowed,
                      const char* what) {
    const auto& ok = allowed.at(p.kind);
    for (const auto& [key, line] : st.param_lines)
        if (!ok.count(key))
            throw ParseError(line, std::string(what) + " profile '" + p.kind +
                                       "' does not take key '" + key + "'");
    if (p.kind == "file") {
        const std::size_t line = st.path_line ? st.path_line : st.kind_line;
        if (p.path.empty())
            throw ParseError(line, std::string(what) + " profile 'file' needs a path");
        if (!std::filesystem::exists(p.path))
            throw ParseError(line, "file not found: " + p.path);
    } else if (!p.path.empty()) {
        throw ParseError(st.path_line,
                         std::string(what) + " profile '" + p.kind + "' does not take a path");
    }
}

// Two-column x,value loader for file profiles. An optional non-numeric
// first line is treated as a header.
TraceField load_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> xs, vs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected two comma-separated columns");
        double x = 0, v = 0;
        const std::string c0 = trim(t.substr(0, comma));
        const std::string c1 = trim(t.substr(comma + 1));
        const auto r0 = std::from_chars(c0.data(), c0.data() + c0.size(), x);
        const auto r1 = std::from_chars(c1.data(), c1.data() + c1.size(), v);
        const bool numeric = r0.ec == std::errc{} && r0.ptr == c0.data() + c0.size() &&
                             r1.ec == std::errc{} && r1.ptr == c1.data() + c1.size();
        if (!numeric) {
            if (xs.empty() && lineno == 1) continue;  // header
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected two numbers");
        }
        xs.push_back(x);
        vs.push_back(v);
    }
    if (xs.size() < 2) throw std::runtime_error(path + ": need at least two data rows");
    TraceField f;
    f.grid = line_from_nodes(std::move(xs));
    f.values = std::move(vs);
    return f;
}

double bump_shape(double x, double center, double width) {
    const double s = (x - center) / width;
    if (std::abs(s) >= 1) return 0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

}  // namespace

Mode parse_mode(const std::string& word) {
    if (word == "evolve") return Mode::evolve;
    if (word == "aux-solve") return Mode::aux_solve;
    if (word == "probe-barrier") return Mode::probe_barrier;
    if (word == "verify") return Mode::verify;
    if (word == "converge") return Mode::converge;
    throw std::invalid_argument("unknown mode '" + word + "'");
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::evolve: return "evolve";
        case Mode::aux_solve: return "aux-solve";
        case Mode::probe_barrier: return "probe-barrier";
        case Mode::verify: return "verify";
        case Mode::converge: return "converge";
    }
    return "?";
}

double DataProfile::param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

RunConfig parse_config(const std::string& text, std::optional<Mode> mode_override) {
    RunConfig cfg;
    ParseState st;
    std::string section;

    std::stringstream ss(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(lineno, "malformed section header '" + line + "'");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name != "run" && name != "solver" && name != "initial_data" &&
                name != "density" && name != "probe")
                throw ParseError(lineno, "unknown section '" + name + "'");
            section = name;
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, "expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(lineno, "empty key");

        if (!apply_key(cfg, st, section, key, value, lineno))
            throw ParseError(lineno, "unknown key '" + key + "'" +
                                         (section.empty() ? "" : " in section [" + section + "]"));
    }

    if (mode_override)
        cfg.mode = *mode_override;
    else if (!st.mode_seen)
        throw ParseError(0, "missing required key 'mode'");

    validate_profile(cfg.initial_data, st.initial, kInitialParams, "initial-data");
    validate_profile(cfg.density, st.density, kDensityParams, "density");

    for (const auto& [key, line] : st.initial.param_lines) {
        const double v = cfg.initial_data.params.at(key);
        if (key != "center" && v < 0)
            throw ParseError(line, "initial-data parameter '" + key + "' must be nonnegative");
        if (key == "width" && v <= 0) throw ParseError(line, "width must be positive");
    }
    if (cfg.density.param("alpha", 2.0) < 0) {
        const auto it = st.density.param_lines.find("alpha");
        throw ParseError(it == st.density.param_lines.end() ? 0 : it->second,
                         "alpha must be nonnegative");
    }
    return cfg;
}

std::function<double(double)> initial_function(const DataProfile& profile) {
    if (profile.kind == "bump") {
        const double c = profile.param("center", 0.0);
        const double w = profile.param("width", 1.0);
        const double h = profile.param("height", 1.0);
        return [=](double x) { return h * bump_shape(x, c, w); };
    }
    if (profile.kind == "cauchy") {
        const double a = profile.param("amplitude", 1.0);
        return [=](double x) { return a / (1.0 + x * x); };
    }
    if (profile.kind == "constant") {
        const double v = profile.param("value", 1.0);
        return [=](double) { return v; };
    }
    if (profile.kind == "two-bump") {
        const double sep = profile.param("separation", 4.0);
        const double w = profile.param("width", 1.0);
        const double h = profile.param("height", 1.0);
        return [=](double x) {
            return h * (bump_shape(x, -0.5 * sep, w) + bump_shape(x, 0.5 * sep, w));
        };
    }
    if (profile.kind == "file") {
        auto data = std::make_shared<TraceField>(load_columns(profile.path));
        return [data](double x) { return data->interpolate(x); };
    }
    throw std::invalid_argument("unknown initial-data profile '" + profile.kind + "'");
}

std::function<double(double)> density_function(const DataProfile& profile) {
    if (profile.kind == "one") return [](double) { return 1.0; };
    if (profile.kind == "cauchy-decay") return [](double x) { return 1.0 / (1.0 + x * x); };
    if (profile.kind == "power-decay") {
        const double alpha = profile.param("alpha", 2.0);
        return [=](double x) { return std::pow(1.0 + x * x, -0.5 * alpha); };
    }
    if (profile.kind == "file") {
        auto data = std::make_shared<TraceField>(load_columns(profile.path));
        return [data](double x) { return data->interpolate(x); };
    }
    throw std::invalid_argument("unknown density profile '" + profile.kind + "'");
}

}  // namespace fracpme::cli
