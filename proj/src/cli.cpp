#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracpme/cli.hpp"
#include "fracpme/elliptic.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/evolution.hpp"
#include "fracpme/fractional_oracle.hpp"
#include "fracpme/quadrature.hpp"
#include "fracpme/uniqueness_probe.hpp"

namespace fs = std::filesystem;

namespace fracpme::cli {

namespace {

constexpr const char* kVersion = "fracpme 1.0.0";

// Shortest round-trippable decimal form.
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Display form for report lines.
std::string num6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void close_csv(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_csv(path);
    out << text;
    close_csv(out, path);
}

std::string profile_echo(const DataProfile& p) {
    std::string s = p.kind;
    for (const auto& [key, value] : p.params) s += " " + key + "=" + num6(value);
    if (!p.path.empty()) s += " path=" + p.path;
    return s;
}

// Deterministic lines; no output paths, no timestamps, so equal configs
// and seeds reproduce the report byte for byte.
std::vector<std::string> provenance_lines(const RunConfig& cfg) {
    const auto& s = cfg.solver;
    std::vector<std::string> out;
    out.push_back(std::string("version: ") + kVersion);
    out.push_back("mode: " + to_string(cfg.mode));
    out.push_back("solver: R=" + num6(s.R) + " Y=" + num6(s.Y > 0 ? s.Y : s.R) +
                  " nx=" + std::to_string(s.nx) + " ny=" + std::to_string(s.ny) +
                  " grade=" + num6(s.grade) + " epsilon=" + num6(s.epsilon) + " m=" + num6(s.m) +
                  " T=" + num6(s.T));
    out.push_back("initial_data: " + profile_echo(cfg.initial_data));
    out.push_back("density: " + profile_echo(cfg.density));
    if (cfg.mode == Mode::probe_barrier || cfg.mode == Mode::verify) {
        std::string radii;
        for (double r : cfg.probe_radii) radii += (radii.empty() ? "" : ",") + num6(r);
        out.push_back("probe: r0=" + num6(cfg.probe_r0) + " radii=" + radii +
                      " ntheta=" + std::to_string(cfg.probe_ntheta) +
                      " r_min=" + num6(cfg.probe_r_min));
    }
    if (cfg.mode == Mode::converge) out.push_back("levels: " + std::to_string(cfg.levels));
    out.push_back("seed: " + std::to_string(cfg.seed));
    return out;
}

double bump(double x, double center, double width) {
    const double s = (x - center) / width;
    if (std::abs(s) >= 1) return 0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

// splitmix64; fixed-width arithmetic keeps draws identical across platforms.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
};

TraceField random_bump_mix(const LineGridPtr& grid, Rng& rng) {
    const double a1 = rng.uniform(0.2, 1.0), c1 = rng.uniform(-2.0, 2.0);
    const double w1 = rng.uniform(0.5, 2.0);
    const double a2 = rng.uniform(0.0, 1.0), c2 = rng.uniform(-2.0, 2.0);
    const double w2 = rng.uniform(0.5, 2.0);
    return TraceField::sample(grid, [=](double x) {
        return a1 * bump(x, c1, w1) + a2 * bump(x, c2, w2);
    });
}

double positive_part_mass(const TraceField& a, const TraceField& b, const TraceField& rho) {
    TraceField d = TraceField::zeros(a.grid);
    for (std::size_t i = 0; i < d.size(); ++i)
        d.values[i] = rho.values[i] * std::max(a.values[i] - b.values[i], 0.0);
    return trapezoid(d);
}

// ---------------------------------------------------------------- checks

CheckResult make_check(std::string name, double measured, double threshold, bool pass) {
    return CheckResult{std::move(name), measured, threshold, pass};
}

void evolution_state_checks(const evolution::Trajectory& traj, double u0_max,
                            double slack, std::vector<CheckResult>& out) {
    double min_u = 0, max_u = 0, worst_lyap = 0, worst_trace = 0;
    for (const auto& st : traj.states) {
        min_u = std::min(min_u, st.u.min_value());
        max_u = std::max(max_u, st.u.max_value());
        if (!st.w.values.empty()) {
            for (std::size_t i = 0; i < st.u.size(); ++i) {
                const double zm = std::pow(st.u.values[i], traj.m);
                worst_trace = std::max(worst_trace, std::abs(st.w.at(i, 0) - zm));
            }
        }
    }
    for (std::size_t k = 0; k + 1 < traj.diagnostics.size(); ++k)
        worst_lyap = std::max(worst_lyap, traj.diagnostics[k + 1].lyapunov -
                                              traj.diagnostics[k].lyapunov);
    const double lyap_scale =
        traj.diagnostics.empty() ? 1.0 : std::abs(traj.diagnostics.front().lyapunov);
    out.push_back(make_check("state-positivity", -min_u, slack, -min_u <= slack));
    out.push_back(
        make_check("state-sup-bound", max_u - u0_max, slack, max_u - u0_max <= slack));
    const double lyap_tol = slack * (1.0 + lyap_scale);
    out.push_back(
        make_check("lyapunov-non-increasing", worst_lyap, lyap_tol, worst_lyap <= lyap_tol));
    const double trace_tol = 1e-8 * (1.0 + std::pow(u0_max, traj.m));
    out.push_back(
        make_check("trace-coupling", worst_trace, trace_tol, worst_trace <= trace_tol));
}

void probe_checks(const probe::FluxDecayReport& fit, std::vector<CheckResult>& out) {
    // interior positivity across the sweep
    double min_interior = std::numeric_limits<double>::infinity();
    double max_value = 0;
    for (const auto& psi : fit.solutions) {
        for (std::size_t i = 0; i + 1 < psi.nr(); ++i)
            for (std::size_t j = 0; j < psi.ntheta(); ++j)
                min_interior = std::min(min_interior, psi.at(i, j));
        max_value = std::max(max_value, *std::max_element(psi.values.begin(),
                                                          psi.values.end()));
    }
    out.push_back(make_check("interior-positivity", min_interior, 0.0, min_interior > 0));

    // growth of the solution in the outer radius, on index-shared nodes
    double worst_drop = 0;
    for (std::size_t k = 0; k + 1 < fit.solutions.size(); ++k) {
        const auto& lo = fit.solutions[k];
        const auto& hi = fit.solutions[k + 1];
        for (std::size_t i = 0; i + 1 < lo.nr(); ++i)
            for (std::size_t j = 0; j < lo.ntheta(); ++j)
                worst_drop = std::max(worst_drop, lo.at(i, j) - hi.at(i, j));
    }
    const double mono_tol = 1e-8 * (1.0 + max_value);
    out.push_back(
        make_check("monotone-in-R", worst_drop, mono_tol, worst_drop <= mono_tol));

    double max_flux = -std::numeric_limits<double>::infinity();
    for (const auto& psi : fit.solutions)
        for (double f : probe::sigma_flux(psi)) max_flux = std::max(max_flux, f);
    out.push_back(make_check("arc-flux-negative", max_flux, 0.0, max_flux < 0));

    const double min_gap = *std::min_element(fit.gaps.begin(), fit.gaps.end());
    out.push_back(make_check("barrier-dominates", min_gap, -1e-6, min_gap >= -1e-6));

    out.push_back(
        make_check("products-within-factor-2", fit.spread, 2.0, fit.spread <= 2.0));

    // at least one doubling step must not increase the product
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < fit.products.size(); ++k)
        min_ratio = std::min(min_ratio, fit.products[k + 1] / fit.products[k]);
    out.push_back(make_check("products-no-growth-trend", min_ratio, 1.0,
                             !fit.monotone_growth));
}

std::string product_table(const probe::FluxDecayReport& fit) {
    std::string t = "\n[products]\n";
    for (std::size_t k = 0; k < fit.radii.size(); ++k)
        t += "R=" + num6(fit.radii[k]) + "  flux_sup=" + num6(fit.flux_sup[k]) +
             "  product=" + num6(fit.products[k]) + "  raw=" + num6(fit.raw_products[k]) +
             "  gap=" + num6(fit.gaps[k]) + "\n";
    t += "influx=" + num6(fit.influx.empty() ? 0.0 : fit.influx.back()) +
         "  proxy_M=" + num6(fit.proxy_m) + "  spread=" + num6(fit.spread) + "\n";
    return t;
}

// ------------------------------------------------------------- run modes

int run_evolve(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    auto scfg = cfg.solver;
    scfg.density = density_function(cfg.density);
    evolution::Evolver ev(scfg);
    const auto u0 = TraceField::sample(ev.grid()->x, initial_function(cfg.initial_data));
    auto traj = ev.run(u0);

    if (!traj.states.empty()) {
        emit_snapshot(traj.states.back().u, dir / "trace_final.csv");
        if (!traj.states.back().w.values.empty())
            emit_snapshot(traj.states.back().w, dir / "field_final.csv");
    }
    emit_snapshot(traj.diagnostics, dir / "diagnostics.csv");

    Report rep;
    rep.title = "evolution run";
    rep.provenance = provenance_lines(cfg);
    const double slack = scfg.slack_abs + scfg.slack_rel * u0.max_abs();
    rep.checks.push_back(make_check("completed", traj.completed ? 1.0 : 0.0, 1.0,
                                    traj.completed));
    evolution_state_checks(traj, u0.max_value(), slack, rep.checks);
    write_text(dir / "report.txt", rep.render());
    log << rep.render();
    for (const auto& w : traj.warnings) log << "warning: " << w << "\n";
    if (!traj.completed) {
        log << "error: " << traj.error << "\n";
        return 1;
    }
    return 0;
}

int run_aux(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    auto scfg = cfg.solver;
    scfg.density = density_function(cfg.density);
    evolution::Evolver ev(scfg);
    const auto g = TraceField::sample(ev.grid()->x, initial_function(cfg.initial_data));
    const auto res =
        elliptic::solve_auxiliary(g, scfg.epsilon, ev.rho(), scfg.m, ev.grid(), scfg.aux);

    emit_snapshot(res.z, dir / "aux_trace.csv");
    emit_snapshot(res.v, dir / "aux_field.csv");

    Report rep;
    rep.title = "auxiliary solve";
    rep.provenance = provenance_lines(cfg);
    double rho_g = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        rho_g = std::max(rho_g, std::abs(ev.rho().values[i] * g.values[i]));
    const double res_tol = scfg.aux.newton_tol * std::max(1.0, rho_g);
    rep.checks.push_back(make_check("boundary-equation-residual", res.residual, res_tol,
                                    res.residual <= res_tol));
    rep.checks.push_back(
        make_check("trace-nonnegative", -res.z.min_value(), 0.0, res.z.min_value() >= 0));
    double worst_trace = 0;
    for (std::size_t i = 0; i < res.z.size(); ++i)
        worst_trace = std::max(worst_trace, std::abs(res.v.at(i, 0) -
                                                     std::pow(res.z.values[i], scfg.m)));
    const double trace_tol = 1e-10 * (1.0 + std::pow(g.max_abs(), scfg.m));
    rep.checks.push_back(
        make_check("trace-coupling", worst_trace, trace_tol, worst_trace <= trace_tol));
    write_text(dir / "report.txt", rep.render());
    log << rep.render();
    return 0;
}

int run_probe(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    const double R0 = cfg.probe_r0;
    const auto line = build_line(R0, 401);
    const auto F = TraceField::sample(line, initial_function(cfg.initial_data));
    probe::BarrierProblem tmpl{
        F, R0, probe::barrier_grid(R0, cfg.probe_radii.front(), cfg.probe_ntheta,
                                   cfg.probe_r_min)};
    const auto fit = probe::flux_decay_fit(tmpl, cfg.probe_radii);

    for (std::size_t k = 0; k < fit.solutions.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "psi_R%s.csv", num6(fit.radii[k]).c_str());
        emit_snapshot(fit.solutions[k], dir / name);
    }
    {
        const fs::path path = dir / "flux_products.csv";
        auto out = open_csv(path);
        out << "R,flux_sup,product,raw_product,gap\n";
        for (std::size_t k = 0; k < fit.radii.size(); ++k)
            out << num(fit.radii[k]) << ',' << num(fit.flux_sup[k]) << ','
                << num(fit.products[k]) << ',' << num(fit.raw_products[k]) << ','
                << num(fit.gaps[k]) << "\n";
        close_csv(out, path);
    }

    Report rep;
    rep.title = "barrier flux sweep";
    rep.provenance = provenance_lines(cfg);
    probe_checks(fit, rep.checks);
    const std::string body = rep.render() + product_table(fit);
    write_text(dir / "report.txt", body);
    log << body;
    return 0;
}

int run_verify(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    Report rep;
    rep.title = "verification suite";
    rep.provenance = provenance_lines(cfg);
    Rng rng(cfg.seed);

    // --- auxiliary-problem block: two nested strips, shared x lattice
    {
        const auto grid10 = build_half_strip(10.0, 10.0, 121, 36, 1.1);
        const auto grid20 = build_half_strip(20.0, 10.0, 241, 36, 1.1);
        const auto rho10 = TraceField::sample(grid10->x,
                                              [](double x) { return 1.0 / (1.0 + x * x); });
        const auto rho20 = TraceField::sample(grid20->x,
                                              [](double x) { return 1.0 / (1.0 + x * x); });

        const auto g0 = TraceField::sample(grid10->x,
                                           [](double x) { return bump(x, 0.0, 3.0); });
        const auto w = elliptic::harmonic_extension_R(g0, grid10);
        const double viol =
            std::max(-w.min_value(), w.max_value() - g0.max_value());
        rep.checks.push_back(make_check("extension-max-principle", viol, 1e-9,
                                        viol <= 1e-9));

        const auto lo = random_bump_mix(grid10->x, rng);
        auto hi = random_bump_mix(grid10->x, rng);
        for (std::size_t i = 0; i < hi.size(); ++i) hi.values[i] += lo.values[i];
        const auto zlo = elliptic::solve_auxiliary(lo, 0.1, rho10, 2.0, grid10).z;
        const auto zhi = elliptic::solve_auxiliary(hi, 0.1, rho10, 2.0, grid10).z;
        double order_viol = 0;
        for (std::size_t i = 0; i < zlo.size(); ++i)
            order_viol = std::max(order_viol, zlo.values[i] - zhi.values[i]);
        rep.checks.push_back(make_check("aux-ordering", order_viol, 1e-8,
                                        order_viol <= 1e-8));

        const double ms[] = {1.0, 2.0, 3.0, 2.0};
        const double eps[] = {0.1, 0.01, 0.1, 0.01};
        double contraction_excess = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < 4; ++k) {
            const auto ga = random_bump_mix(grid10->x, rng);
            const auto gb = random_bump_mix(grid10->x, rng);
            const auto za = elliptic::solve_auxiliary(ga, eps[k], rho10, ms[k], grid10).z;
            const auto zb = elliptic::solve_auxiliary(gb, eps[k], rho10, ms[k], grid10).z;
            const double before = positive_part_mass(ga, gb, rho10);
            const double after = positive_part_mass(za, zb, rho10);
            contraction_excess =
                std::max(contraction_excess, after - before - 1e-6 * before);
        }
        rep.checks.push_back(make_check("aux-contraction", contraction_excess, 1e-8,
                                        contraction_excess <= 1e-8));

        // operator consistency: boundary flux of the extension vs the
        // principal-value reference, error shrinking as the strip widens
        const auto ref_grid = build_line(50.0, 5001);
        const auto ref = oracle::pv_fractional_laplacian(
            TraceField::sample(ref_grid, [](double x) { return bump(x, 0.0, 2.0); }));
        auto flux_error = [&](double R, std::size_t nx, std::size_t ny) {
            const auto grid = build_half_strip(R, R, nx, ny, 1.1);
            const auto phi = TraceField::sample(grid->x,
                                                [](double x) { return bump(x, 0.0, 2.0); });
            const auto flux = elliptic::boundary_flux(elliptic::harmonic_extension_R(phi, grid));
            double err = 0;
            for (std::size_t i = 0; i < flux.size(); ++i) {
                const double x = grid->x->nodes[i];
                if (std::abs(x) > 2.0) continue;
                err = std::max(err, std::abs(-flux.values[i] - ref.interpolate(x)));
            }
            return err;
        };
        const double e1 = flux_error(10.0, 201, 40);
        const double e2 = flux_error(20.0, 401, 48);
        rep.checks.push_back(
            make_check("operator-consistency-decay", e2 / e1, 1.0, e2 < e1));

        const auto zr = elliptic::solve_auxiliary(g0, 0.1, rho10, 2.0, grid10).z;
        const auto g0w = TraceField::sample(grid20->x,
                                            [](double x) { return bump(x, 0.0, 3.0); });
        const auto zR = elliptic::solve_auxiliary(g0w, 0.1, rho20, 2.0, grid20).z;
        double r_drop = 0;
        for (std::size_t i = 0; i < zr.size(); ++i) {
            const double x = grid10->x->nodes[i];
            r_drop = std::max(r_drop, zr.values[i] - zR.interpolate(x));
        }
        rep.checks.push_back(make_check("aux-monotone-in-R", r_drop, 1e-8,
                                        r_drop <= 1e-8));
    }

    // --- time-stepper block
    {
        evolution::SolverConfig scfg;
        scfg.R = 10.0;
        scfg.Y = 10.0;
        scfg.nx = 101;
        scfg.epsilon = 0.05;
        scfg.T = 0.25;
        scfg.m = 2.0;
        scfg.density = [](double x) { return 1.0 / (1.0 + x * x); };
        evolution::Evolver ev(scfg);
        const auto u0 = TraceField::sample(ev.grid()->x,
                                           [](double x) { return bump(x, 0.0, 2.0); });
        const auto traj = ev.run(u0);
        const double slack = scfg.slack_abs + scfg.slack_rel * u0.max_abs();
        evolution_state_checks(traj, u0.max_value(), slack, rep.checks);

        const auto pa = random_bump_mix(ev.grid()->x, rng);
        const auto pb = random_bump_mix(ev.grid()->x, rng);
        const auto con = evolution::verify_contraction(pa, pb, scfg);
        rep.checks.push_back(
            make_check("order-contraction", con.worst_gap, con.tol, con.pass));

        const auto ben = evolution::verify_benilan(traj, scfg.m);
        rep.checks.push_back(
            make_check("time-monotonicity-bound", ben.worst, -ben.tol, ben.pass));

        auto level_error = [](std::size_t nx, double eps) {
            evolution::SolverConfig c;
            c.R = 25.0;
            c.Y = 25.0;
            c.nx = nx;
            c.epsilon = eps;
            c.T = 0.5;
            c.m = 1.0;
            evolution::Evolver lev(c);
            const auto f0 = TraceField::sample(lev.grid()->x,
                                               [](double x) { return 1.0 / (1.0 + x * x); });
            const auto t = lev.run(f0);
            if (!t.completed) throw SolverFailure("refinement run failed", 0, 0.0);
            const auto exact = oracle::poisson_semigroup_solution(f0, c.T);
            double err = 0;
            for (std::size_t i = 0; i < f0.size(); ++i) {
                if (std::abs(lev.grid()->x->nodes[i]) > 2.5) continue;
                err = std::max(err,
                               std::abs(t.states.back().u.values[i] - exact.values[i]));
            }
            return err;
        };
        const double c1 = level_error(201, 0.1);
        const double c2 = level_error(401, 0.05);
        rep.checks.push_back(
            make_check("linear-oracle-refinement", c2 / c1, 1.0, c2 < c1));
    }

    // --- barrier block
    {
        const auto line = build_line(1.0, 401);
        auto F = TraceField::sample(line, [](double x) { return bump(x, 0.0, 1.0); });
        const double mass = trapezoid(F);
        for (auto& v : F.values) v /= mass;
        probe::BarrierProblem tmpl{F, 1.0, probe::barrier_grid(1.0, 4.0, 65)};
        const auto fit = probe::flux_decay_fit(tmpl, {4.0, 8.0, 16.0});
        probe_checks(fit, rep.checks);
    }

    write_text(dir / "report.txt", rep.render());
    log << rep.render();
    return rep.overall() ? 0 : 2;
}

int run_converge(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
    if (cfg.solver.m != 1.0)
        throw std::invalid_argument(
            "converge mode compares against the linear closed form and needs m=1");
    if (cfg.density.kind != "one")
        throw std::invalid_argument("converge mode needs density=one");
    const double steps = cfg.solver.T / cfg.solver.epsilon;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
        throw std::invalid_argument(
            "converge mode needs T to be an integer multiple of epsilon, otherwise the "
            "final step overshoots the comparison time");

    const auto f0 = initial_function(cfg.initial_data);
    const double window = cfg.solver.R / 10.0;
    std::vector<double> spacing, epsilon, sup_error;
    bool completed = true;
    std::string error;

    for (std::size_t level = 0; level < cfg.levels; ++level) {
        auto scfg = cfg.solver;
        scfg.nx = (cfg.solver.nx - 1) * (std::size_t{1} << level) + 1;
        scfg.epsilon = cfg.solver.epsilon / static_cast<double>(std::size_t{1} << level);
        scfg.keep_fields = false;
        evolution::Evolver ev(scfg);
        const auto u0 = TraceField::sample(ev.grid()->x, f0);
        const auto traj = ev.run(u0);
        if (!traj.completed) {
            completed = false;
            error = traj.error;
            break;
        }
        const auto exact = oracle::poisson_semigroup_solution(u0, scfg.T);
        double err = 0;
        for (std::size_t i = 0; i < u0.size(); ++i) {
            if (std::abs(ev.grid()->x->nodes[i]) > window) continue;
            err = std::max(err, std::abs(traj.states.back().u.values[i] - exact.values[i]));
        }
        spacing.push_back(ev.grid()->hx());
        epsilon.push_back(scfg.epsilon);
        sup_error.push_back(err);
        log << "level " << level << ": spacing=" << num6(spacing.back())
            << " epsilon=" << num6(epsilon.back()) << " sup_error=" << num6(err) << "\n";
    }

    {
        const fs::path path = dir / "convergence.csv";
        auto out = open_csv(path);
        out << "spacing,epsilon,sup_error\n";
        for (std::size_t k = 0; k < spacing.size(); ++k)
            out << num(spacing[k]) << ',' << num(epsilon[k]) << ',' << num(sup_error[k])
                << "\n";
        close_csv(out, path);
    }

    Report rep;
    rep.title = "joint refinement study";
    rep.provenance = provenance_lines(cfg);
    rep.checks.push_back(
        make_check("completed", completed ? 1.0 : 0.0, 1.0, completed));
    double worst_ratio = 0;
    for (std::size_t k = 0; k + 1 < sup_error.size(); ++k)
        worst_ratio = std::max(worst_ratio, sup_error[k + 1] / sup_error[k]);
    rep.checks.push_back(make_check("sup-error-decreasing", worst_ratio, 1.0,
                                    completed && worst_ratio < 1.0));
    write_text(dir / "report.txt", rep.render());
    log << rep.render();
    if (!completed) {
        log << "error: " << error << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

bool Report::overall() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string Report::render() const {
    std::ostringstream os;
    os << title << "\n";
    for (const auto& line : provenance) os << "# " << line << "\n";
    os << "\n";
    std::size_t passed = 0;
    for (const auto& c : checks) {
        os << (c.pass ? "PASS" : "FAIL") << "  " << c.name
           << "  measured=" << num6(c.measured) << "  threshold=" << num6(c.threshold)
           << "\n";
        if (c.pass) ++passed;
    }
    os << "\noverall: " << (overall() ? "PASS" : "FAIL") << " (" << passed << "/"
       << checks.size() << " checks)\n";
    return os.str();
}

void emit_snapshot(const TraceField& u, const fs::path& path) {
    auto out = open_csv(path);
    out << "x,u\n";
    for (std::size_t i = 0; i < u.size(); ++i)
        out << num(u.grid->nodes[i]) << ',' << num(u.values[i]) << "\n";
    close_csv(out, path);
}

void emit_snapshot(const ExtensionField& w, const fs::path& path) {
    auto out = open_csv(path);
    out << "x,y,w\n";
    for (std::size_t j = 0; j < w.ny(); ++j)
        for (std::size_t i = 0; i < w.nx(); ++i)
            out << num(w.grid->x->nodes[i]) << ',' << num(w.grid->y[j]) << ','
                << num(w.at(i, j)) << "\n";
    close_csv(out, path);
}

void emit_snapshot(const PolarField& psi, const fs::path& path) {
    auto out = open_csv(path);
    out << "r,theta,psi\n";
    for (std::size_t i = 0; i < psi.nr(); ++i)
        for (std::size_t j = 0; j < psi.ntheta(); ++j)
            out << num(psi.grid->r[i]) << ',' << num(psi.grid->theta[j]) << ','
                << num(psi.at(i, j)) << "\n";
    close_csv(out, path);
}

void emit_snapshot(const std::vector<evolution::StepDiagnostics>& series,
                   const fs::path& path) {
    auto out = open_csv(path);
    out << "t,energy,lyapunov,mass,iterations\n";
    for (const auto& d : series)
        out << num(d.t) << ',' << num(d.dirichlet_energy) << ',' << num(d.lyapunov) << ','
            << num(d.weighted_mass) << ',' << d.newton_iterations << "\n";
    close_csv(out, path);
}

int dispatch(const RunConfig& cfg, std::ostream& log) {
    try {
        const fs::path dir = cfg.output_dir;
        fs::create_directories(dir);
        switch (cfg.mode) {
            case Mode::evolve: return run_evolve(cfg, dir, log);
            case Mode::aux_solve: return run_aux(cfg, dir, log);
            case Mode::probe_barrier: return run_probe(cfg, dir, log);
            case Mode::verify: return run_verify(cfg, dir, log);
            case Mode::converge: return run_converge(cfg, dir, log);
        }
        return 3;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        log << "run failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fracpme::cli
