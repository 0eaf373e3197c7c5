#include "fracpme/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fracpme/errors.hpp"
#include "fracpme/linalg.hpp"
#include "fracpme/quadrature.hpp"

namespace fracpme::elliptic {

namespace {

double pow_m(double z, double m) {
    if (m == 1.0) return z;
    if (m == 2.0) return z * z;
    if (m == 3.0) return z * z * z;
    return std::pow(z, m);
}

ExtensionField cg_extension(const TraceField& g, HalfStripGridPtr grid,
                            const LinearOptions& opts) {
    const std::size_t nx = grid->nx(), ny = grid->ny();
    const std::size_t n_int = nx - 2, m_int = ny - 2;
    const std::size_t n = n_int * m_int;
    const double hx = grid->hx();

    // Row (i,j) of the difference equations scaled by its cell volume, which
    // symmetrizes the graded y coupling.
    std::vector<double> wy(ny);
    for (std::size_t j = 1; j + 1 < ny; ++j) wy[j] = 0.5 * (grid->dy[j - 1] + grid->dy[j]);

    auto apply = [&](std::span<const double> v, std::span<double> out) {
        for (std::size_t j = 1; j + 1 < ny; ++j) {
            const double tx = wy[j] / hx;
            const double td = hx / grid->dy[j - 1];
            const double tu = hx / grid->dy[j];
            const std::size_t row = (j - 1) * n_int;
            for (std::size_t i = 0; i < n_int; ++i) {
                const double c = v[row + i];
                double acc = (2.0 * tx + td + tu) * c;
                if (i > 0) acc -= tx * v[row + i - 1];
                if (i + 1 < n_int) acc -= tx * v[row + i + 1];
                if (j > 1) acc -= td * v[row - n_int + i];
                if (j + 2 < ny) acc -= tu * v[row + n_int + i];
                out[row + i] = acc;
            }
        }
    };

    std::vector<double> rhs(n, 0.0), sol(n, 0.0), inv_diag(n);
    const double td0 = hx / grid->dy[0];
    for (std::size_t i = 0; i < n_int; ++i) rhs[i] = td0 * g.values[i + 1];
    for (std::size_t j = 1; j + 1 < ny; ++j) {
        const double d = 2.0 * wy[j] / hx + hx / grid->dy[j - 1] + hx / grid->dy[j];
        for (std::size_t i = 0; i < n_int; ++i) inv_diag[(j - 1) * n_int + i] = 1.0 / d;
    }
    pcg(apply, rhs, std::span<double>(sol), inv_diag, opts.tol, opts.max_iter);

    ExtensionField v = ExtensionField::zeros(grid);
    for (std::size_t i = 0; i < nx; ++i) v.values[i] = g.values[i];
    for (std::size_t j = 1; j + 1 < ny; ++j)
        for (std::size_t i = 0; i < n_int; ++i)
            v.at(i + 1, j) = sol[(j - 1) * n_int + i];
    return v;
}

void require_trace_setup(const TraceField& g, const TraceField& rho, const HalfStripGrid& grid,
                         double epsilon, double m) {
    g.validate("solve_auxiliary: g");
    rho.validate("solve_auxiliary: rho");
    if (g.grid->nodes != grid.x->nodes || rho.grid->nodes != grid.x->nodes)
        throw std::invalid_argument("solve_auxiliary: trace grids must match the strip's x grid");
    if (!(epsilon > 0)) throw std::invalid_argument("solve_auxiliary: epsilon must be positive");
    if (!(m >= 1)) throw std::invalid_argument("solve_auxiliary: exponent must be >= 1");
    if (rho.min_value() <= 0)
        throw std::invalid_argument("solve_auxiliary: density must be strictly positive");
}

}  // namespace

std::array<double, 3> one_sided_flux_weights(const HalfStripGrid& grid) {
    if (grid.ny() < 3)
        throw UnsupportedGrid("one_sided_flux_weights: need at least 3 y-levels");
    const double h1 = grid.dy[0], h2 = grid.dy[1];
    return {-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2),
            -h1 / (h2 * (h1 + h2))};
}

TraceField boundary_flux(const ExtensionField& w) {
    w.validate("boundary_flux");
    const auto [c0, c1, c2] = one_sided_flux_weights(*w.grid);
    TraceField out = TraceField::zeros(w.grid->x);
    for (std::size_t i = 0; i < w.nx(); ++i)
        out.values[i] = c0 * w.at(i, 0) + c1 * w.at(i, 1) + c2 * w.at(i, 2);
    return out;
}

ExtensionField harmonic_extension_R(const TraceField& g, HalfStripGridPtr grid,
                                    const LinearOptions& opts) {
    g.validate("harmonic_extension_R");
    if (!grid) throw std::invalid_argument("harmonic_extension_R: null grid");
    if (g.grid->nodes != grid->x->nodes)
        throw std::invalid_argument("harmonic_extension_R: trace grid mismatch");
    if (opts.backend == LinearBackend::conjugate_gradient) return cg_extension(g, grid, opts);
    RectangleHarmonicSolver solver(grid);
    return solver.extend(g);
}

AuxiliarySolveResult solve_auxiliary(const TraceField& g, double epsilon, const TraceField& rho,
                                     double m, RectangleHarmonicSolver& solver,
                                     const AuxiliaryOptions& opts) {
    const auto& grid = *solver.grid();
    require_trace_setup(g, rho, grid, epsilon, m);
    const std::size_t n = solver.interior_size();
    const double* gi = g.values.data() + 1;
    const double* ri = rho.values.data() + 1;

    const double g_max = g.max_abs();
    const double delta = 1e-12 * (1.0 + g_max);
    double res_scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) res_scale = std::max(res_scale, std::abs(ri[i] * gi[i]));

    std::vector<double> z(n), zm(n), flux(n), F(n), sqrt_d(n), y(n), inv_diag(n), dz(n),
        z_try(n), F_try(n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::max(gi[i], 0.0);

    auto eval_residual = [&](const std::vector<double>& zz, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) zm[i] = pow_m(zz[i], m);
        solver.dtn_flux(zm, std::span<double>(flux));
        double worst = 0;
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = ri[i] * (zz[i] - gi[i]) - epsilon * flux[i];
            worst = std::max(worst, std::abs(out[i]));
        }
        return worst;
    };

    // Mean boundary-derivative magnitude, a scalar Jacobi estimate for the
    // dense trace Jacobian.
    double mu_bar = 0;
    for (double muk : solver.flux_multipliers()) mu_bar -= muk;
    mu_bar /= static_cast<double>(n);

    double res = eval_residual(z, F);
    std::size_t it = 0;
    while (res > opts.newton_tol * res_scale) {
        if (it >= opts.max_newton)
            throw SolverFailure("solve_auxiliary: Newton did not converge", it, res);

        for (std::size_t i = 0; i < n; ++i) {
            const double d = m * pow_m(std::max(z[i], delta), m - 1.0);
            sqrt_d[i] = std::sqrt(d);
            inv_diag[i] = 1.0 / (ri[i] + epsilon * d * mu_bar);
        }
        // Newton system rho dz - eps L(m z^{m-1} dz) = -F, symmetrized by the
        // similarity transform with sqrt(m z^{m-1}) so CG applies.
        auto apply = [&](std::span<const double> in, std::span<double> out) {
            for (std::size_t i = 0; i < n; ++i) tmp[i] = sqrt_d[i] * in[i];
            solver.dtn_flux(tmp, std::span<double>(flux));
            for (std::size_t i = 0; i < n; ++i)
                out[i] = ri[i] * in[i] - epsilon * sqrt_d[i] * flux[i];
        };
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = 0.0;
            tmp[i] = -sqrt_d[i] * F[i];
        }
        std::vector<double> b(tmp);
        pcg(apply, b, std::span<double>(y), inv_diag, opts.linear_tol, opts.max_linear);
        for (std::size_t i = 0; i < n; ++i) dz[i] = y[i] / sqrt_d[i];

        bool accepted = false;
        double alpha = 1.0;
        for (int halvings = 0; halvings <= 3; ++halvings) {
            for (std::size_t i = 0; i < n; ++i)
                z_try[i] = std::max(z[i] + alpha * dz[i], 0.0);
            const double res_try = eval_residual(z_try, F_try);
            if (res_try < res) {
                z.swap(z_try);
                F.swap(F_try);
                res = res_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // Relaxed fixed point: the trace equation solved for z with the
            // flux frozen reads z_hat = z - F / rho.
            for (std::size_t i = 0; i < n; ++i)
                z[i] = std::max(z[i] - 0.5 * F[i] / ri[i], 0.0);
            res = eval_residual(z, F);
        }
        ++it;
    }

    AuxiliarySolveResult out;
    out.z = TraceField::zeros(grid.x);
    for (std::size_t i = 0; i < n; ++i) out.z.values[i + 1] = z[i];
    TraceField zm_full = TraceField::zeros(grid.x);
    for (std::size_t i = 0; i < n; ++i) zm_full.values[i + 1] = pow_m(z[i], m);
    out.v = solver.extend(zm_full);
    out.iterations = it;
    out.residual = res;
    out.j_value = functional_J(out.v, g, rho, m, epsilon);
    return out;
}

AuxiliarySolveResult solve_auxiliary(const TraceField& g, double epsilon, const TraceField& rho,
                                     double m, HalfStripGridPtr grid,
                                     const AuxiliaryOptions& opts) {
    RectangleHarmonicSolver solver(grid);
    return solve_auxiliary(g, epsilon, rho, m, solver, opts);
}

double functional_J(const ExtensionField& v, const TraceField& g, const TraceField& rho,
                    double m, double epsilon) {
    v.validate("functional_J: v");
    g.validate("functional_J: g");
    rho.validate("functional_J: rho");
    if (g.grid->nodes != v.grid->x->nodes || rho.grid->nodes != v.grid->x->nodes)
        throw std::invalid_argument("functional_J: grid mismatch");
    if (!(m >= 1)) throw std::invalid_argument("functional_J: exponent must be >= 1");
    if (!(epsilon > 0)) throw std::invalid_argument("functional_J: epsilon must be positive");

    const std::size_t nx = v.nx();
    const double tol = 1e-12 * (1.0 + v.max_abs());
    for (std::size_t i = 0; i < nx; ++i)
        if (v.at(i, 0) < -tol)
            throw std::invalid_argument("functional_J: trace row must be nonnegative");

    double J = 0.5 * epsilon * dirichlet_energy(v);
    const auto wts = trapezoid_weights(*v.grid->x);
    const double p = (m + 1.0) / m;
    for (std::size_t i = 0; i < nx; ++i) {
        const double V = std::max(v.at(i, 0), 0.0);
        J += wts[i] * rho.values[i] * (m / (m + 1.0) * std::pow(V, p) - V * g.values[i]);
    }
    return J;
}

}  // namespace fracpme::elliptic
