#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fracpme/elliptic.hpp"
#include "fracpme/fields.hpp"
#include "fracpme/grid.hpp"
#include "fracpme/rectangle_harmonic.hpp"

namespace fracpme::evolution {

/// Run description for the implicit time stepper on the half strip.
///
/// Y <= 0 means "same as R". ny == 0 picks the number of graded y-levels so
/// the first layer is about half the x spacing. density is sampled on the
/// trace grid and must be strictly positive there; an empty function means
/// constant one.
struct SolverConfig {
    double R = 10.0;
    double Y = 0.0;
    std::size_t nx = 201;
    std::size_t ny = 0;
    double grade = 1.1;
    double epsilon = 0.01;  // time step
    double m = 1.0;         // nonlinearity exponent, >= 1
    double T = 1.0;         // final time
    std::function<double(double)> density;
    elliptic::AuxiliaryOptions aux;
    double slack_abs = 1e-8;  // property-check tolerances: abs + rel * scale
    double slack_rel = 1e-6;
    bool keep_fields = true;  // retain the bulk field of every recorded state
};

/// One recorded time level. w is the harmonic extension of u^m; its trace
/// row equals u^m verbatim. When the run drops bulk fields, w.values is
/// empty except at the final state.
struct EvolutionState {
    double t = 0;
    std::size_t step_index = 0;
    TraceField u;
    ExtensionField w;
};

struct StepDiagnostics {
    double t = 0;
    double dirichlet_energy = 0;       // Int |grad w|^2 over the strip
    double lyapunov = 0;               // Int rho u^(m+1) on the trace
    double weighted_mass = 0;          // Int rho u on the trace
    std::size_t newton_iterations = 0;
    double newton_residual = 0;
    double time_derivative_l1 = 0;     // Int rho |u - u_prev| / epsilon
};

struct Trajectory {
    std::vector<EvolutionState> states;        // index 0 is the initial state
    std::vector<StepDiagnostics> diagnostics;  // parallel to states
    HalfStripGridPtr grid;
    TraceField rho;
    double m = 1.0;
    double epsilon = 0.0;
    bool completed = true;  // false when a step failed; states hold the prefix
    std::string error;
    std::vector<std::string> warnings;

    std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

/// Shared machinery for one configuration: the grid, the sampled density,
/// and the harmonic solver. Reuse one instance to march many steps or whole
/// trajectories; build one per thread for sweeps.
class Evolver {
public:
    explicit Evolver(SolverConfig cfg);

    const SolverConfig& config() const { return cfg_; }
    const HalfStripGridPtr& grid() const { return grid_; }
    const TraceField& rho() const { return rho_; }

    /// State at t = 0 for data sampled on the trace grid; u0 must be
    /// nonnegative. Computes w = extension of u0^m.
    EvolutionState initial_state(const TraceField& u0);

    /// One implicit step: solves the auxiliary problem with g = state.u.
    EvolutionState step(const EvolutionState& state);

    /// March ceil(T / epsilon) steps, recording diagnostics. A solver
    /// failure ends the run early with completed = false and the error
    /// message; the states up to the failure are kept.
    Trajectory run(const TraceField& u0);

private:
    SolverConfig cfg_;
    HalfStripGridPtr grid_;
    TraceField rho_;
    RectangleHarmonicSolver solver_;
};

/// One-shot wrappers; each builds a fresh Evolver.
EvolutionState step(const EvolutionState& state, const SolverConfig& cfg);
Trajectory run(const TraceField& u0, const SolverConfig& cfg);

/// Signed defect of the discrete energy balance between recorded times tau
/// and T: trapezoid-in-time of Int |grad w|^2 plus the drop of
/// Int rho u^(m+1) / (m+1). Zero for tau == T; throws std::invalid_argument
/// when either time is off the recorded lattice.
double energy_identity_residual(const Trajectory& traj, double tau, double T,
                                const TraceField& rho, double m);

struct ContractionReport {
    double worst_gap = 0;         // max over t of mass((u - u~)+) - initial
    double initial_gap_mass = 0;  // Int rho (u0 - u0~)+
    double tol = 0;
    bool pass = false;
};

/// Runs both data sets and checks the weighted L1 order contraction
/// Int rho (u - u~)+ <= Int rho (u0 - u0~)+ at every recorded time.
ContractionReport verify_contraction(const TraceField& u0, const TraceField& u0_tilde,
                                     const SolverConfig& cfg);

struct BenilanReport {
    double worst = 0;  // min over nodes and times of the checked expression
    double w_max = 0;
    double tol = 0;
    bool pass = false;
};

/// Checks (m-1) t (w(t+eps) - w(t)) / eps + m w(t) >= -tol at every bulk
/// node and every recorded time with a successor. Needs a completed
/// trajectory that kept its fields and has at least three recorded times.
BenilanReport verify_benilan(const Trajectory& traj, double m);

struct DomainSweepReport {
    std::vector<double> radii;
    std::vector<double> sup_diffs;  // successive sup|w' - w| on shared nodes
    double worst_monotonicity = 0;  // most negative w' - w seen; >= -tol ok
    double tol = 0;
    bool monotone_pass = false;
    bool cauchy_pass = false;  // sup_diffs strictly decreasing
    std::vector<Trajectory> runs;
};

/// Re-runs the same data on widening domains (fixed spacing, fixed height,
/// fixed y-grid) and compares the fields on shared nodes at every recorded
/// time. Radii must be increasing and node-aligned with the configured
/// spacing. u0 is carried to the wider grids by interpolation; the clamped
/// end values stand in outside its grid, so data should be negligible there.
DomainSweepReport refine_in_R(const TraceField& u0, const SolverConfig& cfg,
                              const std::vector<double>& R_list);

}  // namespace fracpme::evolution
