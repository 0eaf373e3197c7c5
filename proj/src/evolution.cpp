#include "fracpme/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fracpme/errors.hpp"
#include "fracpme/parallel.hpp"
#include "fracpme/quadrature.hpp"

namespace fracpme::evolution {

namespace {

double pow_m(double z, double m) {
    if (m == 1.0) return z;
    if (m == 2.0) return z * z;
    if (m == 3.0) return z * z * z;
    return std::pow(z, m);
}

std::size_t graded_levels(double Y, double dy0, double grade) {
    if (grade <= 1.0 + 1e-12) return static_cast<std::size_t>(std::ceil(Y / dy0)) + 1;
    const double span = 1.0 + Y * (grade - 1.0) / dy0;
    return static_cast<std::size_t>(std::ceil(std::log(span) / std::log(grade))) + 1;
}

void require_config(const SolverConfig& cfg) {
    if (!(cfg.R > 0)) throw std::invalid_argument("SolverConfig: R must be positive");
    if (cfg.nx < 3) throw std::invalid_argument("SolverConfig: nx must be at least 3");
    if (!(cfg.epsilon > 0)) throw std::invalid_argument("SolverConfig: epsilon must be positive");
    if (!(cfg.m >= 1)) throw std::invalid_argument("SolverConfig: exponent must be >= 1");
    if (!(cfg.grade >= 1)) throw std::invalid_argument("SolverConfig: grade must be >= 1");
    if (!(cfg.T >= 0)) throw std::invalid_argument("SolverConfig: T must be nonnegative");
}

HalfStripGridPtr make_strip(const SolverConfig& cfg) {
    require_config(cfg);
    const double Y = cfg.Y > 0 ? cfg.Y : cfg.R;
    std::size_t ny = cfg.ny;
    if (ny == 0) {
        const double hx = 2.0 * cfg.R / static_cast<double>(cfg.nx - 1);
        ny = std::max<std::size_t>(graded_levels(Y, 0.5 * hx, cfg.grade), 3);
    }
    return build_half_strip(cfg.R, Y, cfg.nx, ny, cfg.grade);
}

TraceField sample_density(const SolverConfig& cfg, const HalfStripGridPtr& grid) {
    TraceField rho = cfg.density ? TraceField::sample(grid->x, cfg.density)
                                 : TraceField::constant(grid->x, 1.0);
    rho.validate("SolverConfig: density");
    if (rho.min_value() <= 0)
        throw std::invalid_argument("SolverConfig: density must be strictly positive");
    return rho;
}

double weighted_power_integral(const std::vector<double>& wts, const TraceField& rho,
                               const TraceField& u, double m) {
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += wts[i] * rho.values[i] * u.values[i] * pow_m(u.values[i], m);
    return s;
}

std::size_t state_index_at(const Trajectory& traj, double t, const char* who) {
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        if (std::abs(traj.states[k].t - t) <= 1e-9 * (1.0 + std::abs(t))) return k;
    throw std::invalid_argument(std::string(who) + ": time is not on the recorded lattice");
}

}  // namespace

Evolver::Evolver(SolverConfig cfg)
    : cfg_(std::move(cfg)),
      grid_(make_strip(cfg_)),
      rho_(sample_density(cfg_, grid_)),
      solver_(grid_) {}

EvolutionState Evolver::initial_state(const TraceField& u0) {
    u0.validate("initial_state: u0");
    if (u0.grid->nodes != grid_->x->nodes)
        throw std::invalid_argument("initial_state: data grid must match the run grid");
    if (u0.min_value() < 0)
        throw std::invalid_argument("initial_state: data must be nonnegative");

    EvolutionState s;
    s.t = 0;
    s.step_index = 0;
    s.u = u0;
    TraceField um = u0;
    for (auto& v : um.values) v = pow_m(v, cfg_.m);
    s.w = solver_.extend(um);
    return s;
}

EvolutionState Evolver::step(const EvolutionState& state) {
    state.u.validate("step: state.u");
    if (state.u.grid->nodes != grid_->x->nodes)
        throw std::invalid_argument("step: state grid must match the run grid");
    if (state.u.min_value() < 0)
        throw std::invalid_argument("step: state must be nonnegative");

    auto r = elliptic::solve_auxiliary(state.u, cfg_.epsilon, rho_, cfg_.m, solver_, cfg_.aux);
    EvolutionState next;
    next.t = state.t + cfg_.epsilon;
    next.step_index = state.step_index + 1;
    next.u = std::move(r.z);
    next.w = std::move(r.v);
    return next;
}

Trajectory Evolver::run(const TraceField& u0) {
    Trajectory traj;
    traj.grid = grid_;
    traj.rho = rho_;
    traj.m = cfg_.m;
    traj.epsilon = cfg_.epsilon;

    const double peak = u0.max_abs();
    double edge = 0;
    const std::size_t n = u0.size();
    for (std::size_t i : {std::size_t{0}, std::size_t{1}, n - 2, n - 1})
        edge = std::max(edge, std::abs(u0.values[i]));
    if (peak > 0 && edge > 1e-3 * peak)
        traj.warnings.push_back(
            "initial data is not negligible near the domain ends; the zero side "
            "condition adds truncation error that widening R would remove");

    const auto wts = trapezoid_weights(*grid_->x);
    auto record = [&](const EvolutionState& s, std::size_t iters, double residual,
                      const TraceField* u_prev) {
        StepDiagnostics d;
        d.t = s.t;
        d.dirichlet_energy = dirichlet_energy(s.w);
        d.lyapunov = weighted_power_integral(wts, rho_, s.u, cfg_.m);
        d.weighted_mass = 0;
        for (std::size_t i = 0; i < n; ++i)
            d.weighted_mass += wts[i] * rho_.values[i] * s.u.values[i];
        d.newton_iterations = iters;
        d.newton_residual = residual;
        if (u_prev) {
            double l1 = 0;
            for (std::size_t i = 0; i < n; ++i)
                l1 += wts[i] * rho_.values[i] * std::abs(s.u.values[i] - u_prev->values[i]);
            d.time_derivative_l1 = l1 / cfg_.epsilon;
        }
        traj.diagnostics.push_back(d);
    };

    EvolutionState s = initial_state(u0);
    record(s, 0, 0.0, nullptr);
    traj.states.push_back(std::move(s));

    const std::size_t nsteps =
        cfg_.T > 0 ? static_cast<std::size_t>(std::ceil(cfg_.T / cfg_.epsilon - 1e-9)) : 0;
    for (std::size_t k = 1; k <= nsteps; ++k) {
        const EvolutionState& prev = traj.states.back();
        EvolutionState next;
        std::size_t iters = 0;
        double residual = 0;
        try {
            auto r = elliptic::solve_auxiliary(prev.u, cfg_.epsilon, rho_, cfg_.m, solver_,
                                               cfg_.aux);
            next.t = prev.t + cfg_.epsilon;
            next.step_index = prev.step_index + 1;
            next.u = std::move(r.z);
            next.w = std::move(r.v);
            iters = r.iterations;
            residual = r.residual;
        } catch (const SolverFailure& e) {
            traj.completed = false;
            traj.error = e.what();
            break;
        }
        record(next, iters, residual, &traj.states.back().u);
        if (!cfg_.keep_fields) traj.states.back().w = ExtensionField{};
        traj.states.push_back(std::move(next));
    }
    return traj;
}

EvolutionState step(const EvolutionState& state, const SolverConfig& cfg) {
    Evolver ev(cfg);
    return ev.step(state);
}

Trajectory run(const TraceField& u0, const SolverConfig& cfg) {
    Evolver ev(cfg);
    return ev.run(u0);
}

double energy_identity_residual(const Trajectory& traj, double tau, double T,
                                const TraceField& rho, double m) {
    if (traj.states.empty())
        throw std::invalid_argument("energy_identity_residual: empty trajectory");
    rho.validate("energy_identity_residual: rho");
    if (rho.grid->nodes != traj.grid->x->nodes)
        throw std::invalid_argument("energy_identity_residual: density grid mismatch");
    const std::size_t k0 = state_index_at(traj, tau, "energy_identity_residual");
    const std::size_t k1 = state_index_at(traj, T, "energy_identity_residual");
    if (k0 > k1)
        throw std::invalid_argument("energy_identity_residual: tau must not exceed T");
    if (k0 == k1) return 0.0;

    double time_integral = 0;
    for (std::size_t k = k0; k < k1; ++k) {
        const double dt = traj.states[k + 1].t - traj.states[k].t;
        time_integral += 0.5 * dt *
                         (traj.diagnostics[k].dirichlet_energy +
                          traj.diagnostics[k + 1].dirichlet_energy);
    }

    const auto wts = trapezoid_weights(*traj.grid->x);
    const double l_tau = weighted_power_integral(wts, rho, traj.states[k0].u, m);
    const double l_T = weighted_power_integral(wts, rho, traj.states[k1].u, m);
    return time_integral + (l_T - l_tau) / (m + 1.0);
}

ContractionReport verify_contraction(const TraceField& u0, const TraceField& u0_tilde,
                                     const SolverConfig& cfg) {
    SolverConfig c = cfg;
    c.keep_fields = false;
    Evolver ev(c);
    Trajectory a = ev.run(u0);
    Trajectory b = ev.run(u0_tilde);
    if (!a.completed) throw SolverFailure(a.error, 0, 0.0);
    if (!b.completed) throw SolverFailure(b.error, 0, 0.0);

    const auto wts = trapezoid_weights(*ev.grid()->x);
    const auto& rho = ev.rho();
    auto gap_mass = [&](const TraceField& u, const TraceField& v) {
        double s = 0;
        for (std::size_t i = 0; i < u.size(); ++i)
            s += wts[i] * rho.values[i] * std::max(u.values[i] - v.values[i], 0.0);
        return s;
    };

    ContractionReport rep;
    rep.initial_gap_mass = gap_mass(a.states[0].u, b.states[0].u);
    double worst = 0;
    for (std::size_t k = 0; k < a.states.size(); ++k)
        worst = std::max(worst, gap_mass(a.states[k].u, b.states[k].u) - rep.initial_gap_mass);
    rep.worst_gap = worst;

    double mass0 = 0;
    for (std::size_t i = 0; i < u0.size(); ++i)
        mass0 += wts[i] * rho.values[i] * std::max(u0.values[i], u0_tilde.values[i]);
    rep.tol = cfg.slack_abs + cfg.slack_rel * mass0;
    rep.pass = rep.worst_gap <= rep.tol;
    return rep;
}

BenilanReport verify_benilan(const Trajectory& traj, double m) {
    if (!traj.completed) throw std::invalid_argument("verify_benilan: incomplete trajectory");
    if (traj.states.size() < 3)
        throw std::invalid_argument("verify_benilan: need at least three recorded times");
    for (const auto& s : traj.states)
        if (s.w.values.empty())
            throw std::invalid_argument("verify_benilan: trajectory did not keep its fields");

    BenilanReport rep;
    for (const auto& s : traj.states) rep.w_max = std::max(rep.w_max, s.w.max_abs());
    rep.tol = 1e-6 * rep.w_max;

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
        const auto& w0 = traj.states[k].w.values;
        const auto& w1 = traj.states[k + 1].w.values;
        const double t = traj.states[k].t;
        const double dt = traj.states[k + 1].t - traj.states[k].t;
        for (std::size_t p = 0; p < w0.size(); ++p) {
            const double v = (m - 1.0) * t * (w1[p] - w0[p]) / dt + m * w0[p];
            worst = std::min(worst, v);
        }
    }
    rep.worst = worst;
    rep.pass = rep.worst >= -rep.tol;
    return rep;
}

DomainSweepReport refine_in_R(const TraceField& u0, const SolverConfig& cfg,
                              const std::vector<double>& R_list) {
    require_config(cfg);
    if (R_list.empty()) throw std::invalid_argument("refine_in_R: empty radius list");
    for (std::size_t p = 0; p + 1 < R_list.size(); ++p)
        if (!(R_list[p] <= R_list[p + 1]))
            throw std::invalid_argument("refine_in_R: radii must be nondecreasing");

    const double h = 2.0 * cfg.R / static_cast<double>(cfg.nx - 1);
    const double Y = cfg.Y > 0 ? cfg.Y : cfg.R;
    std::size_t ny = cfg.ny;
    if (ny == 0) ny = std::max<std::size_t>(graded_levels(Y, 0.5 * h, cfg.grade), 3);

    std::vector<SolverConfig> sweep(R_list.size(), cfg);
    for (std::size_t p = 0; p < R_list.size(); ++p) {
        const double R = R_list[p];
        const auto nxR = static_cast<std::size_t>(std::lround(2.0 * R / h)) + 1;
        if (std::abs(static_cast<double>(nxR - 1) * h - 2.0 * R) > 1e-9 * (1.0 + 2.0 * R))
            throw std::invalid_argument(
                "refine_in_R: radius is not node-aligned with the configured spacing");
        sweep[p].R = R;
        sweep[p].nx = nxR;
        sweep[p].Y = Y;  // fixed height so the y-grids coincide across the sweep
        sweep[p].ny = ny;
        sweep[p].keep_fields = true;
    }
    for (std::size_t p = 0; p + 1 < R_list.size(); ++p)
        if ((sweep[p + 1].nx - sweep[p].nx) % 2 != 0)
            throw std::invalid_argument("refine_in_R: successive grids share no center nodes");

    DomainSweepReport rep;
    rep.radii = R_list;
    rep.runs.resize(R_list.size());
    parallel_for(R_list.size(), [&](std::size_t p) {
        Evolver ev(sweep[p]);
        auto data = TraceField::sample(ev.grid()->x,
                                       [&](double x) { return u0.interpolate(x); });
        rep.runs[p] = ev.run(data);
    });
    for (const auto& r : rep.runs)
        if (!r.completed) throw SolverFailure(r.error, 0, 0.0);

    double w_scale = 0;
    for (const auto& r : rep.runs)
        for (const auto& s : r.states) w_scale = std::max(w_scale, s.w.max_abs());
    rep.tol = cfg.slack_abs + cfg.slack_rel * w_scale;

    double worst_mono = 0;
    for (std::size_t p = 0; p + 1 < R_list.size(); ++p) {
        const auto& small = rep.runs[p];
        const auto& big = rep.runs[p + 1];
        const std::size_t offset = (sweep[p + 1].nx - sweep[p].nx) / 2;
        double sup = 0;
        for (std::size_t k = 0; k < small.states.size(); ++k) {
            const auto& ws = small.states[k].w;
            const auto& wb = big.states[k].w;
            for (std::size_t j = 0; j < ws.ny(); ++j)
                for (std::size_t i = 0; i < ws.nx(); ++i) {
                    const double d = wb.at(i + offset, j) - ws.at(i, j);
                    worst_mono = std::min(worst_mono, d);
                    sup = std::max(sup, std::abs(d));
                }
        }
        rep.sup_diffs.push_back(sup);
    }
    rep.worst_monotonicity = worst_mono;
    rep.monotone_pass = worst_mono >= -rep.tol;
    rep.cauchy_pass = true;
    for (std::size_t p = 0; p + 1 < rep.sup_diffs.size(); ++p)
        if (!(rep.sup_diffs[p + 1] < rep.sup_diffs[p])) rep.cauchy_pass = false;
    return rep;
}

}  // namespace fracpme::evolution
