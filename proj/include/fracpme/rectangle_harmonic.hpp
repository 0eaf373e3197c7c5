#pragma once

#include <fftw3.h>

#include <array>
#include <span>
#include <vector>

#include "fracpme/fields.hpp"
#include "fracpme/grid.hpp"

namespace fracpme {

/// Discrete harmonic solver on a half strip with Dirichlet data g on the
/// y = 0 row and zero on the sides and top. The uniform x direction
/// diagonalizes in the discrete sine basis, so a solve is one sine transform,
/// one tridiagonal sweep per mode (precomputed into mode shapes), and one
/// transform back per y row. Residuals of the 5-point equations come out at
/// rounding level, well inside the 1e-10 relative contract of the linear
/// solves.
///
/// The same mode decomposition yields the boundary-derivative map: mu[k] is
/// the one-sided second-order y-derivative at y = 0 of mode k's unit-data
/// profile, so dtn_flux(g) equals boundary_flux(extend(g)) by construction.
///
/// Instances hold scratch buffers and an FFTW plan; they are cheap to build,
/// reusable across solves on the same grid, and not safe to share between
/// threads. Build one per thread for parallel sweeps.
class RectangleHarmonicSolver {
public:
    explicit RectangleHarmonicSolver(HalfStripGridPtr grid);
    ~RectangleHarmonicSolver();
    RectangleHarmonicSolver(const RectangleHarmonicSolver&) = delete;
    RectangleHarmonicSolver& operator=(const RectangleHarmonicSolver&) = delete;

    const HalfStripGridPtr& grid() const { return grid_; }

    /// Harmonic field with trace row g; g's end values sit at the bottom
    /// corners, the side columns and top row are zero.
    ExtensionField extend(const TraceField& g);

    /// d/dy at y = 0 of extend(g), interior columns only (size nx - 2).
    void dtn_flux(std::span<const double> g_interior, std::span<double> flux_out);

    /// Full-width flux of the extension, end columns included.
    TraceField flux_of_extension(const TraceField& g);

    /// One-sided 3-level derivative weights at y = 0 for this grid.
    std::array<double, 3> flux_weights() const { return {c0_, c1_, c2_}; }

    /// Per-mode flux multipliers: mode k's boundary derivative for unit data.
    /// All negative; magnitudes grow like the mode wavenumber.
    const std::vector<double>& flux_multipliers() const { return mu_; }

    /// Max-norm of the 5-point interior residual of a field (diagnostic).
    double interior_residual(const ExtensionField& v) const;

    std::size_t interior_size() const { return n_int_; }

private:
    HalfStripGridPtr grid_;
    std::size_t n_int_;
    std::vector<double> mode_shape_;  // phi[k * ny + j], unit-data profile of mode k+1
    std::vector<double> mu_;          // flux multiplier per mode
    double c0_ = 0, c1_ = 0, c2_ = 0;
    double* buf_ = nullptr;
    fftw_plan plan_ = nullptr;

    void dst(std::span<const double> in, std::span<double> out);
};

}  // namespace fracpme
