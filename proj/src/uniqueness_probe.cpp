#include "fracpme/uniqueness_probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracpme/errors.hpp"
#include "fracpme/linalg.hpp"
#include "fracpme/parallel.hpp"

namespace fracpme::probe {

namespace {

constexpr int kStepsPerOctave = 16;

// Finite-volume geometry of the annular half-disk. Unknowns are the nodes
// on rings 0 .. nr-2 (the outer ring is Dirichlet), indexed i * ntheta + j
// like PolarField. Radial faces sit at the logarithmic mean radius of the
// two rings they separate; cell i spans [face(i-1), face(i)] radially,
// clipped to [r_min, .] at the hole. Angular cell widths are dtheta, halved
// on the two flat rows.
struct Discretization {
    const HalfDiskGrid& g;
    std::size_t nr, nt, n;       // rings, angles, unknown count
    double dtheta;
    std::vector<double> tr_unit;  // 1 / log(r_{i+1}/r_i), radial face i
    std::vector<double> log_ext;  // log radial extent of cell i
    std::vector<double> width;    // radial width of cell i (flat-row source length)
    std::vector<double> wtheta;   // angular width of column j

    explicit Discretization(const HalfDiskGrid& grid)
        : g(grid), nr(grid.nr()), nt(grid.ntheta()), n((nr - 1) * nt), dtheta(grid.dtheta()) {
        tr_unit.resize(nr - 1);
        std::vector<double> face(nr - 1);
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const double step = std::log(g.r[i + 1] / g.r[i]);
            tr_unit[i] = 1.0 / step;
            face[i] = (g.r[i + 1] - g.r[i]) / step;
        }
        log_ext.resize(nr - 1);
        width.resize(nr - 1);
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const double inner = (i == 0) ? g.r.front() : face[i - 1];
            log_ext[i] = std::log(face[i] / inner);
            width[i] = face[i] - inner;
        }
        wtheta.assign(nt, dtheta);
        wtheta.front() = 0.5 * dtheta;
        wtheta.back() = 0.5 * dtheta;
    }

    // A v with homogeneous data on the outer ring folded in. Symmetric
    // positive definite: every coefficient is a shared face transmissibility.
    void apply(std::span<const double> v, std::span<double> out) const {
        const double at_unit = 1.0 / dtheta;
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const double t_ang = log_ext[i] * at_unit;
            for (std::size_t j = 0; j < nt; ++j) {
                const std::size_t idx = i * nt + j;
                const double self = v[idx];
                double acc = 0;
                const double t_out = tr_unit[i] * wtheta[j];
                acc += t_out * (self - ((i + 2 < nr) ? v[idx + nt] : 0.0));
                if (i > 0) acc += tr_unit[i - 1] * wtheta[j] * (self - v[idx - nt]);
                if (j + 1 < nt) acc += t_ang * (self - v[idx + 1]);
                if (j > 0) acc += t_ang * (self - v[idx - 1]);
                out[idx] = acc;
            }
        }
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n, 0.0);
        const double at_unit = 1.0 / dtheta;
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            const double t_ang = log_ext[i] * at_unit;
            for (std::size_t j = 0; j < nt; ++j) {
                double acc = tr_unit[i] * wtheta[j];
                if (i > 0) acc += tr_unit[i - 1] * wtheta[j];
                if (j + 1 < nt) acc += t_ang;
                if (j > 0) acc += t_ang;
                d[i * nt + j] = acc;
            }
        }
        return d;
    }

    // Flat-row sources: both rows have outward normal -e_y, so the condition
    // -d(psi)/dy = F contributes F(x) * width on each, with x = +r on the
    // theta = 0 row and x = -r on the theta = pi row.
    std::vector<double> source(const TraceField& F) const {
        std::vector<double> b(n, 0.0);
        for (std::size_t i = 0; i + 1 < nr; ++i) {
            b[i * nt] = F.interpolate(g.r[i]) * width[i];
            b[i * nt + nt - 1] = F.interpolate(-g.r[i]) * width[i];
        }
        return b;
    }
};

double ring_max(const PolarField& psi, std::size_t ring) {
    double m = psi.at(ring, 0);
    for (std::size_t j = 1; j < psi.ntheta(); ++j) m = std::max(m, psi.at(ring, j));
    return m;
}

std::size_t ring_at_radius(const HalfDiskGrid& g, double r0, const char* who) {
    for (std::size_t i = 0; i < g.nr(); ++i)
        if (std::abs(g.r[i] - r0) <= 1e-9 * std::max(1.0, r0)) return i;
    throw UnsupportedGrid(std::string(who) + ": no grid ring at the support radius");
}

}  // namespace

double theta(double r) {
    if (!(r > 0)) throw std::invalid_argument("theta: radius must be positive");
    return -std::log(r) / std::numbers::pi;
}

HalfDiskGridPtr barrier_grid(double R0, double R, std::size_t ntheta, double r_min_request) {
    if (!(R0 > 0)) throw std::invalid_argument("barrier_grid: R0 must be positive");
    if (!(R > R0)) throw std::invalid_argument("barrier_grid: R must exceed R0");
    double request = (r_min_request > 0) ? r_min_request : R0 / 50.0;
    if (!(request < R0))
        throw std::invalid_argument("barrier_grid: inner radius must lie below R0");

    const double per = static_cast<double>(kStepsPerOctave);
    const auto inner_steps = static_cast<long>(std::lround(per * std::log2(R0 / request)));
    if (inner_steps < 1)
        throw std::invalid_argument("barrier_grid: inner radius too close to R0");
    const double outer_exact = per * std::log2(R / R0);
    const auto outer_steps = static_cast<long>(std::lround(outer_exact));
    if (outer_steps < 1 || std::abs(outer_exact - static_cast<double>(outer_steps)) > 1e-9)
        throw std::invalid_argument(
            "barrier_grid: R must sit on the radius lattice R0 * 2^{k/16}");

    const double r_min = R0 * std::exp2(-static_cast<double>(inner_steps) / per);
    const auto nr = static_cast<std::size_t>(inner_steps + outer_steps) + 1;
    return build_half_disk(R, nr, ntheta, r_min);
}

void BarrierProblem::validate() const {
    if (!grid) throw std::invalid_argument("BarrierProblem: missing grid");
    if (!(R0 > 0) || !(grid->R > R0))
        throw std::invalid_argument("BarrierProblem: need 0 < R0 < outer radius");
    F.validate("BarrierProblem");
    const auto& x = F.grid->nodes;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (F.values[i] < 0)
            throw std::invalid_argument("BarrierProblem: flux data must be nonnegative");
        if (std::abs(x[i]) > R0 * (1 + 1e-12) && F.values[i] != 0)
            throw std::invalid_argument(
                "BarrierProblem: flux data must vanish outside the support radius");
    }
    if (F.values.front() != 0 || F.values.back() != 0)
        throw std::invalid_argument(
            "BarrierProblem: flux data must vanish at the ends of its grid");
}

PolarField solve_barrier(const BarrierProblem& p, const BarrierSolveOptions& opts) {
    p.validate();
    const Discretization d(*p.grid);
    const auto b = d.source(p.F);

    std::vector<double> inv_diag = d.diagonal();
    for (double& v : inv_diag) v = 1.0 / v;

    std::vector<double> x(d.n, 0.0);
    pcg([&d](std::span<const double> v, std::span<double> out) { d.apply(v, out); },
        std::span<const double>(b), std::span<double>(x), std::span<const double>(inv_diag),
        opts.tol, opts.max_iter);

    PolarField psi = PolarField::zeros(p.grid);
    std::copy(x.begin(), x.end(), psi.values.begin());
    psi.validate("solve_barrier");
    return psi;
}

PolarField flux_balance_residual(const BarrierProblem& p, const PolarField& psi) {
    p.validate();
    psi.validate("flux_balance_residual");
    if (psi.grid != p.grid)
        throw std::invalid_argument("flux_balance_residual: field grid mismatch");
    const Discretization d(*p.grid);
    const auto b = d.source(p.F);
    std::vector<double> out(d.n);
    d.apply(std::span<const double>(psi.values.data(), d.n), std::span<double>(out));
    PolarField res = PolarField::zeros(p.grid);
    for (std::size_t k = 0; k < d.n; ++k) res.values[k] = out[k] - b[k];
    return res;
}

double boundary_influx(const BarrierProblem& p) {
    p.validate();
    const Discretization d(*p.grid);
    double total = 0;
    for (double v : d.source(p.F)) total += v;
    return total;
}

std::vector<double> sigma_flux(const PolarField& psi) {
    psi.validate("sigma_flux");
    const auto& g = *psi.grid;
    const std::size_t nr = g.nr();
    if (nr < 3)
        throw UnsupportedGrid("sigma_flux: need at least 3 radial nodes");
    const double h1 = g.r[nr - 1] - g.r[nr - 2];
    const double h2 = g.r[nr - 2] - g.r[nr - 3];
    const double a0 = (2 * h1 + h2) / (h1 * (h1 + h2));
    const double a1 = -(h1 + h2) / (h1 * h2);
    const double a2 = h1 / (h2 * (h1 + h2));
    std::vector<double> flux(g.ntheta());
    for (std::size_t j = 0; j < g.ntheta(); ++j)
        flux[j] = a0 * psi.at(nr - 1, j) + a1 * psi.at(nr - 2, j) + a2 * psi.at(nr - 3, j);
    return flux;
}

double barrier_gap(const BarrierProblem& p, const PolarField& psi, double M) {
    p.validate();
    psi.validate("barrier_gap");
    if (psi.grid != p.grid) throw std::invalid_argument("barrier_gap: field grid mismatch");
    const auto& g = *p.grid;
    if (!(g.R > 2 * p.R0))
        throw std::invalid_argument("barrier_gap: outer radius must exceed twice R0");
    const std::size_t ring0 = ring_at_radius(g, p.R0, "barrier_gap");
    if (M <= 0) M = std::max(0.0, ring_max(psi, ring0));

    const double denom = theta(p.R0) - theta(g.R);
    const double theta_R = theta(g.R);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = ring0; i < g.nr(); ++i) {
        const double z = M * (theta(g.r[i]) - theta_R) / denom;
        for (std::size_t j = 0; j < g.ntheta(); ++j)
            gap = std::min(gap, z - psi.at(i, j));
    }
    return gap;
}

FluxDecayReport flux_decay_fit(const BarrierProblem& p_template,
                               const std::vector<double>& R_list,
                               const BarrierSolveOptions& opts) {
    p_template.validate();
    if (R_list.empty()) throw std::invalid_argument("flux_decay_fit: empty radius list");
    for (std::size_t k = 0; k < R_list.size(); ++k) {
        if (!(R_list[k] > 2 * p_template.R0))
            throw std::invalid_argument("flux_decay_fit: radii must exceed twice R0");
        if (k > 0 && !(R_list[k] > R_list[k - 1]))
            throw std::invalid_argument("flux_decay_fit: radii must be increasing");
    }

    FluxDecayReport rep;
    rep.radii = R_list;
    const std::size_t n = R_list.size();
    rep.flux_sup.resize(n);
    rep.products.resize(n);
    rep.raw_products.resize(n);
    rep.influx.resize(n);
    rep.problems.resize(n);
    rep.solutions.resize(n);

    const std::size_t ntheta = p_template.grid->ntheta();
    const double r_min = p_template.grid->r_min;
    parallel_for(n, [&](std::size_t k) {
        BarrierProblem prob{p_template.F, p_template.R0,
                            barrier_grid(p_template.R0, R_list[k], ntheta, r_min)};
        PolarField psi = solve_barrier(prob, opts);
        const auto flux = sigma_flux(psi);
        double s = 0;
        for (double f : flux) s = std::max(s, std::abs(f));
        rep.flux_sup[k] = s;
        rep.raw_products[k] = s * R_list[k];
        rep.products[k] = s * R_list[k] * std::log(R_list[k] / p_template.R0);
        rep.influx[k] = boundary_influx(prob);
        rep.problems[k] = std::move(prob);
        rep.solutions[k] = std::move(psi);
    });

    const auto& last = rep.solutions.back();
    rep.proxy_m =
        std::max(0.0, ring_max(last, ring_at_radius(*last.grid, p_template.R0, "flux_decay_fit")));
    rep.gaps.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        rep.gaps[k] = barrier_gap(rep.problems[k], rep.solutions[k], rep.proxy_m);

    const auto [lo, hi] = std::minmax_element(rep.products.begin(), rep.products.end());
    rep.spread = (*lo > 0) ? *hi / *lo : std::numeric_limits<double>::infinity();
    rep.monotone_growth = n >= 2;
    for (std::size_t k = 1; k < n; ++k)
        if (!(rep.products[k] > rep.products[k - 1])) rep.monotone_growth = false;
    rep.bounded_pass = rep.spread <= 2.0 && !rep.monotone_growth;
    return rep;
}

}  // namespace fracpme::probe
