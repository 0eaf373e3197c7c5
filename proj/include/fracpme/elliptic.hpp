#pragma once

#include <array>
#include <cstddef>

#include "fracpme/fields.hpp"
#include "fracpme/grid.hpp"
#include "fracpme/rectangle_harmonic.hpp"

namespace fracpme::elliptic {

enum class LinearBackend {
    fast_transform,      // sine-mode decomposition, residual at rounding level
    conjugate_gradient,  // Jacobi-preconditioned CG on the symmetrized 5-point system
};

struct LinearOptions {
    LinearBackend backend = LinearBackend::fast_transform;
    double tol = 1e-10;  // relative residual of the linear system
    std::size_t max_iter = 200000;
};

/// Harmonic field on the half strip with Dirichlet data g on the y = 0 row
/// and zero on the two side columns and the top row.
ExtensionField harmonic_extension_R(const TraceField& g, HalfStripGridPtr grid,
                                    const LinearOptions& opts = {});

/// One-sided second-order d/dy at y = 0 from the first three y-levels,
/// applied per x column. Throws UnsupportedGrid when fewer than three levels
/// are available.
TraceField boundary_flux(const ExtensionField& w);

/// Stencil weights used by boundary_flux for the grid's first two spacings.
std::array<double, 3> one_sided_flux_weights(const HalfStripGrid& grid);

struct AuxiliaryOptions {
    double newton_tol = 1e-10;  // max-norm of the trace equation, scaled by max(1, |rho g|)
    std::size_t max_newton = 80;
    double linear_tol = 1e-10;
    std::size_t max_linear = 2000;  // CG iterations for one Newton step
};

struct AuxiliarySolveResult {
    TraceField z;      // boundary unknown, z >= 0
    ExtensionField v;  // harmonic extension of z^m
    std::size_t iterations = 0;
    double residual = 0;  // final max-norm of the discrete boundary equation
    double j_value = 0;   // boundary functional at the solution (epsilon-weighted)
};

/// Solves the discrete auxiliary problem on the half strip:
///   v harmonic,  v = z^m on the trace row,  v = 0 on sides and top,
///   rho z - epsilon * d v / d y |_{y=0} = rho g    on the trace row.
/// Damped Newton on the trace unknown with the interior eliminated through
/// the harmonic solver; after three failed dampings an iteration falls back
/// to a relaxation-0.5 fixed-point update. Iterates are projected onto
/// z >= 0, and the Newton linearization of z -> z^m uses max(z, delta)^(m-1)
/// with delta = 1e-12 (1 + max|g|) so the Jacobian stays invertible where
/// the iterate vanishes.
AuxiliarySolveResult solve_auxiliary(const TraceField& g, double epsilon,
                                     const TraceField& rho, double m, HalfStripGridPtr grid,
                                     const AuxiliaryOptions& opts = {});

/// Same, reusing a caller-owned harmonic solver (one per thread).
AuxiliarySolveResult solve_auxiliary(const TraceField& g, double epsilon,
                                     const TraceField& rho, double m,
                                     RectangleHarmonicSolver& solver,
                                     const AuxiliaryOptions& opts = {});

/// Boundary functional whose trace-row stationarity condition is the
/// auxiliary equation:
///   J(v) = epsilon/2 Int |grad v|^2
///        + m/(m+1) Int_trace rho v^((m+1)/m)  -  Int_trace rho v g.
/// epsilon = 1 gives the unweighted reference form. Requires v >= 0 on the
/// trace row. Diagnostic only; the solver never descends on it.
double functional_J(const ExtensionField& v, const TraceField& g, const TraceField& rho,
                    double m, double epsilon = 1.0);

}  // namespace fracpme::elliptic
