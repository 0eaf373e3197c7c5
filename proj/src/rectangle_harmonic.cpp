#include "fracpme/rectangle_harmonic.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "fracpme/errors.hpp"
#include "fracpme/fftw_guard.hpp"
#include "fracpme/linalg.hpp"

namespace fracpme {

RectangleHarmonicSolver::RectangleHarmonicSolver(HalfStripGridPtr grid) : grid_(grid) {
    if (!grid_) throw std::invalid_argument("RectangleHarmonicSolver: null grid");
    const std::size_t nx = grid_->nx(), ny = grid_->ny();
    if (nx < 3) throw UnsupportedGrid("RectangleHarmonicSolver: need nx >= 3");
    if (ny < 3) throw UnsupportedGrid("RectangleHarmonicSolver: need ny >= 3");
    if (!grid_->x->is_uniform(1e-10))
        throw UnsupportedGrid("RectangleHarmonicSolver: x grid must be uniform");
    n_int_ = nx - 2;

    buf_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_int_));
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_ = fftw_plan_r2r_1d(static_cast<int>(n_int_), buf_, buf_, FFTW_RODFT00,
                                 FFTW_ESTIMATE);
    }

    // y-derivative at y = 0 through the first three levels (exact on
    // quadratics, second order on graded spacings).
    const double h1 = grid_->dy[0], h2 = grid_->dy[1];
    c0_ = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
    c1_ = (h1 + h2) / (h1 * h2);
    c2_ = -h1 / (h2 * (h1 + h2));

    // Unit-data y-profile per sine mode: solve the mode's vertical
    // three-point equation with value 1 at y=0, 0 at y=Y.
    const double hx = grid_->hx();
    mode_shape_.assign(n_int_ * ny, 0.0);
    mu_.assign(n_int_, 0.0);
    const std::size_t m = ny - 2;  // interior y rows
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < n_int_; ++k) {
        const double s =
            std::sin(0.5 * std::numbers::pi * static_cast<double>(k + 1) /
                     static_cast<double>(n_int_ + 1));
        const double lambda = -4.0 * s * s / (hx * hx);
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const double dm = grid_->dy[j - 1], dp = grid_->dy[j];
            const double a = 2.0 / (dm * (dm + dp));
            const double c = 2.0 / (dp * (dm + dp));
            lower[j - 1] = a;
            upper[j - 1] = c;
            diag[j - 1] = -(a + c) + lambda;
            rhs[j - 1] = (j == 1) ? -a : 0.0;  // boundary value 1 moved right
        }
        solve_tridiagonal(lower, diag, upper, rhs);
        double* phi = &mode_shape_[k * ny];
        phi[0] = 1.0;
        for (std::size_t j = 1; j + 1 < ny; ++j) phi[j] = rhs[j - 1];
        phi[ny - 1] = 0.0;
        mu_[k] = c0_ + c1_ * phi[1] + c2_ * phi[2];
    }
}

RectangleHarmonicSolver::~RectangleHarmonicSolver() {
    if (plan_) {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    if (buf_) fftw_free(buf_);
}

void RectangleHarmonicSolver::dst(std::span<const double> in, std::span<double> out) {
    std::memcpy(buf_, in.data(), sizeof(double) * n_int_);
    fftw_execute(plan_);
    std::memcpy(out.data(), buf_, sizeof(double) * n_int_);
}

ExtensionField RectangleHarmonicSolver::extend(const TraceField& g) {
    g.validate("RectangleHarmonicSolver::extend");
    if (g.grid->nodes != grid_->x->nodes)
        throw std::invalid_argument("extend: trace grid does not match the strip's x grid");
    const std::size_t nx = grid_->nx(), ny = grid_->ny();

    // Sine coefficients of the interior trace values.
    std::vector<double> coeff(n_int_), row(n_int_);
    dst(std::span<const double>(g.values.data() + 1, n_int_), coeff);
    const double inv = 1.0 / static_cast<double>(n_int_ + 1);
    for (auto& c : coeff) c *= inv;

    ExtensionField v = ExtensionField::zeros(grid_);
    for (std::size_t i = 0; i < nx; ++i) v.values[i] = g.values[i];
    std::vector<double> mode_vals(n_int_);
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        for (std::size_t k = 0; k < n_int_; ++k)
            mode_vals[k] = coeff[k] * mode_shape_[k * ny + j];
        dst(mode_vals, row);
        double* dst_row = &v.values[j * nx];
        for (std::size_t i = 0; i < n_int_; ++i) dst_row[i + 1] = 0.5 * row[i];
    }
    return v;
}

void RectangleHarmonicSolver::dtn_flux(std::span<const double> g_interior,
                                       std::span<double> flux_out) {
    std::vector<double> coeff(n_int_);
    dst(g_interior, coeff);
    const double scale = 0.5 / static_cast<double>(n_int_ + 1);
    for (std::size_t k = 0; k < n_int_; ++k) coeff[k] *= mu_[k] * scale;
    dst(coeff, flux_out);
}

TraceField RectangleHarmonicSolver::flux_of_extension(const TraceField& g) {
    g.validate("flux_of_extension");
    if (g.grid->nodes != grid_->x->nodes)
        throw std::invalid_argument("flux_of_extension: trace grid mismatch");
    TraceField out = TraceField::zeros(grid_->x);
    std::vector<double> flux(n_int_);
    dtn_flux(std::span<const double>(g.values.data() + 1, n_int_), flux);
    for (std::size_t i = 0; i < n_int_; ++i) out.values[i + 1] = flux[i];
    // End columns: the field above the corners is identically zero.
    out.values.front() = c0_ * g.values.front();
    out.values.back() = c0_ * g.values.back();
    return out;
}

double RectangleHarmonicSolver::interior_residual(const ExtensionField& v) const {
    const std::size_t nx = grid_->nx(), ny = grid_->ny();
    const double hx2 = grid_->hx() * grid_->hx();
    double worst = 0;
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        const double dm = grid_->dy[j - 1], dp = grid_->dy[j];
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const double xx = (v.at(i - 1, j) - 2.0 * v.at(i, j) + v.at(i + 1, j)) / hx2;
            const double yy = 2.0 / (dm + dp) *
                              ((v.at(i, j + 1) - v.at(i, j)) / dp -
                               (v.at(i, j) - v.at(i, j - 1)) / dm);
            worst = std::max(worst, std::abs(xx + yy));
        }
    }
    return worst;
}

}  // namespace fracpme
