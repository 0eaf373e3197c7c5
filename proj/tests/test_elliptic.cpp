#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fracpme/elliptic.hpp"
#include "fracpme/errors.hpp"
#include "fracpme/fractional_oracle.hpp"
#include "fracpme/quadrature.hpp"
#include "support.hpp"

using namespace fracpme;
using namespace fracpme::elliptic;
using testsupport::Rng;
using testsupport::smooth_bump;

namespace {

HalfStripGridPtr strip(double R, double Y, std::size_t nx, std::size_t ny, double grade = 1.1) {
    return build_half_strip(R, Y, nx, ny, grade);
}

// Number of graded levels needed so the first spacing is about dy0.
std::size_t levels_for(double Y, double dy0, double grade = 1.1) {
    return static_cast<std::size_t>(
               std::ceil(std::log(1.0 + Y * (grade - 1.0) / dy0) / std::log(grade))) +
           1;
}

double weighted_positive_part_mass(const TraceField& a, const TraceField& b,
                                   const TraceField& rho) {
    const auto w = trapezoid_weights(*a.grid);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += w[i] * rho.values[i] * std::max(a.values[i] - b.values[i], 0.0);
    return s;
}

}  // namespace

TEST_CASE("harmonic extension of zero data vanishes") {
    auto g = strip(4.0, 4.0, 33, 12);
    auto v = harmonic_extension_R(TraceField::zeros(g->x), g);
    CHECK(v.max_abs() == 0.0);
}

TEST_CASE("harmonic extension: discrete maximum principle and interior residual") {
    auto g = strip(6.0, 6.0, 97, 20);
    auto data = TraceField::sample(g->x, [](double x) { return 2.0 * smooth_bump(x, 0.5, 2.0); });
    auto v = harmonic_extension_R(data, g);
    CHECK(v.min_value() >= -1e-13);
    CHECK(v.max_value() <= data.max_value() + 1e-13);

    RectangleHarmonicSolver solver(g);
    // Residual scales like |v| / h^2; everything beyond rounding is a bug.
    const double scale = v.max_abs() / (g->dy[0] * g->dy[0]);
    CHECK(solver.interior_residual(v) <= 1e-11 * scale);
}

TEST_CASE("fast-transform and conjugate-gradient backends agree") {
    auto g = strip(3.0, 5.0, 41, 17, 1.2);
    Rng rng(777);
    auto data = TraceField::zeros(g->x);
    for (std::size_t i = 1; i + 1 < data.size(); ++i) data.values[i] = rng.next_in(-1.0, 1.0);

    auto fast = harmonic_extension_R(data, g);
    LinearOptions cg_opts;
    cg_opts.backend = LinearBackend::conjugate_gradient;
    cg_opts.tol = 1e-12;
    auto cg = harmonic_extension_R(data, g, cg_opts);
    double worst = 0;
    for (std::size_t k = 0; k < fast.values.size(); ++k)
        worst = std::max(worst, std::abs(fast.values[k] - cg.values[k]));
    CHECK(worst < 1e-9);
}

TEST_CASE("extension grows with the domain on shared nodes") {
    const double h = 0.125;
    auto g1 = strip(8.0, 6.0, 129, 18);
    auto g2 = strip(16.0, 6.0, 257, 18);
    REQUIRE(std::abs(g1->hx() - h) < 1e-12);
    REQUIRE(std::abs(g2->hx() - h) < 1e-12);
    auto profile = [](double x) { return smooth_bump(x, 0.0, 3.0); };
    auto v1 = harmonic_extension_R(TraceField::sample(g1->x, profile), g1);
    auto v2 = harmonic_extension_R(TraceField::sample(g2->x, profile), g2);
    // x nodes of the narrow grid appear in the wide one offset by 64.
    for (std::size_t j = 0; j < g1->ny(); ++j)
        for (std::size_t i = 0; i < g1->nx(); ++i)
            CHECK(v2.at(i + 64, j) >= v1.at(i, j) - 1e-12);
}

TEST_CASE("boundary flux: exact on fields linear and quadratic in y") {
    auto g = strip(2.0, 3.0, 17, 14, 1.3);
    ExtensionField lin = ExtensionField::zeros(g);
    ExtensionField quad = ExtensionField::zeros(g);
    for (std::size_t j = 0; j < g->ny(); ++j)
        for (std::size_t i = 0; i < g->nx(); ++i) {
            lin.at(i, j) = g->y[j];
            quad.at(i, j) = g->y[j] * g->y[j];
        }
    auto flin = boundary_flux(lin);
    auto fquad = boundary_flux(quad);
    for (std::size_t i = 0; i < g->nx(); ++i) {
        CHECK(flin.values[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(fquad.values[i]) < 1e-11);
    }

    auto two_rows = build_half_strip(2.0, 1.0, 17, 2, 1.0);
    CHECK_THROWS_AS(boundary_flux(ExtensionField::zeros(two_rows)), UnsupportedGrid);
}

TEST_CASE("negative extension flux reproduces the pv operator") {
    // Same node set for the pv quadrature and the strip trace.
    const double R = 40.0;
    auto line = build_line(R, 1601);
    auto g = strip(R, R, 1601, levels_for(R, 0.025));
    auto f = TraceField::sample(line, [](double x) { return 1.0 / (1.0 + x * x); });

    auto pv = oracle::pv_fractional_laplacian(f);
    auto v = harmonic_extension_R(f, g);
    auto flux = boundary_flux(v);

    std::vector<double> want, got;
    for (std::size_t i = 0; i < line->size(); ++i) {
        if (std::abs(line->nodes[i]) > 2.0) continue;
        want.push_back(pv.values[i]);
        got.push_back(-flux.values[i]);
    }
    CHECK(testsupport::normalized_sup_diff(want, got) < 1e-2);
}

TEST_CASE("extension-based operator converges to the pv operator as R grows") {
    auto profile = [](double x) {
        const double b = smooth_bump(x, 0.0, 2.5);
        return b * b;  // squared bump = exponent-2 nonlinearity applied to data
    };
    auto wide = build_line(80.0, 3201);
    auto pv = oracle::pv_fractional_laplacian(TraceField::sample(wide, profile));

    std::vector<double> errs;
    for (double R : {10.0, 20.0, 40.0}) {
        const auto nx = static_cast<std::size_t>(std::lround(2.0 * R / 0.05)) + 1;
        auto g = strip(R, R, nx, levels_for(R, 0.025));
        auto flux = boundary_flux(harmonic_extension_R(TraceField::sample(g->x, profile), g));
        double worst = 0;
        for (std::size_t i = 0; i < g->x->size(); ++i) {
            if (std::abs(g->x->nodes[i]) > 2.0) continue;
            const double ref = pv.interpolate(g->x->nodes[i]);
            worst = std::max(worst, std::abs(-flux.values[i] - ref));
        }
        errs.push_back(worst);
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
}

TEST_CASE("auxiliary solve: zero data gives the zero solution") {
    auto g = strip(4.0, 4.0, 65, 16);
    auto rho = TraceField::constant(g->x, 1.0);
    auto r = solve_auxiliary(TraceField::zeros(g->x), 0.1, rho, 2.0, g);
    CHECK(r.z.max_abs() == 0.0);
    CHECK(r.v.max_abs() == 0.0);
    CHECK(r.residual == 0.0);
    CHECK(r.j_value == 0.0);
}

TEST_CASE("auxiliary solve: positivity and sup bounds for bump data") {
    auto g = strip(8.0, 8.0, 129, 20);
    auto rho = TraceField::sample(g->x, [](double x) { return 1.0 / (1.0 + x * x); });
    auto data = TraceField::sample(g->x, [](double x) { return 1.3 * smooth_bump(x, -1.0, 2.0); });
    for (double m : {1.0, 2.0, 3.0}) {
        for (double eps : {0.1, 0.01}) {
            auto r = solve_auxiliary(data, eps, rho, m, g);
            CHECK(r.residual <= 1e-10 * std::max(1.0, data.max_abs()));
            CHECK(r.z.min_value() >= 0.0);
            CHECK(r.z.max_value() <= data.max_value() + 1e-9);
            CHECK(r.v.min_value() >= -1e-12);
            CHECK(r.v.max_value() <= std::pow(data.max_value(), m) + 1e-9);
        }
    }
}

TEST_CASE("auxiliary solve: weighted L1 contraction and ordering") {
    auto g = strip(6.0, 6.0, 97, 18);
    auto rho_one = TraceField::constant(g->x, 1.0);
    auto rho_decay = TraceField::sample(g->x, [](double x) { return 1.0 / (1.0 + x * x); });
    Rng rng(20260816);

    const double ms[] = {1.0, 2.0, 3.0};
    const double eps_list[] = {0.1, 0.01};
    for (int pair = 0; pair < 20; ++pair) {
        const double m = ms[pair % 3];
        const double eps = eps_list[pair % 2];
        const auto& rho = (pair % 4 < 2) ? rho_one : rho_decay;

        auto mk = [&](Rng& r) {
            const double a1 = r.next_in(0.0, 1.5), c1 = r.next_in(-2.0, 2.0),
                         w1 = r.next_in(0.8, 2.5);
            const double a2 = r.next_in(0.0, 1.0), c2 = r.next_in(-2.0, 2.0),
                         w2 = r.next_in(0.8, 2.0);
            return TraceField::sample(g->x, [=](double x) {
                return a1 * smooth_bump(x, c1, w1) + a2 * smooth_bump(x, c2, w2);
            });
        };
        auto ga = mk(rng), gb = mk(rng);
        auto ra = solve_auxiliary(ga, eps, rho, m, g);
        auto rb = solve_auxiliary(gb, eps, rho, m, g);

        const double lhs = weighted_positive_part_mass(ra.z, rb.z, rho);
        const double rhs = weighted_positive_part_mass(ga, gb, rho);
        const double slack = 1e2 * (ra.residual + rb.residual) + 1e-12;
        CHECK(lhs <= rhs + slack);

        // Ordering: data dominated by the pointwise max is mapped to a
        // dominated solution.
        auto gmax = ga;
        for (std::size_t i = 0; i < gmax.size(); ++i)
            gmax.values[i] = std::max(ga.values[i], gb.values[i]);
        auto rmax = solve_auxiliary(gmax, eps, rho, m, g);
        for (std::size_t i = 0; i < gmax.size(); ++i)
            CHECK(ra.z.values[i] <= rmax.z.values[i] + 1e-9);
    }
}

TEST_CASE("auxiliary solve grows with the domain") {
    auto profile = [](double x) { return smooth_bump(x, 0.0, 2.0); };
    const std::size_t ny = 18;
    auto g1 = strip(8.0, 8.0, 129, ny);
    auto g2 = strip(16.0, 8.0, 257, ny);
    auto r1 = solve_auxiliary(TraceField::sample(g1->x, profile), 0.05,
                              TraceField::constant(g1->x, 1.0), 2.0, g1);
    auto r2 = solve_auxiliary(TraceField::sample(g2->x, profile), 0.05,
                              TraceField::constant(g2->x, 1.0), 2.0, g2);
    for (std::size_t i = 0; i < g1->x->size(); ++i)
        CHECK(r1.z.values[i] <= r2.z.values[i + 64] + 1e-9);
}

TEST_CASE("auxiliary solve input validation") {
    auto g = strip(2.0, 2.0, 17, 8);
    auto rho = TraceField::constant(g->x, 1.0);
    auto zero = TraceField::zeros(g->x);
    CHECK_THROWS_AS(solve_auxiliary(zero, -0.1, rho, 2.0, g), std::invalid_argument);
    CHECK_THROWS_AS(solve_auxiliary(zero, 0.1, rho, 0.5, g), std::invalid_argument);
    auto bad_rho = TraceField::constant(g->x, 0.0);
    CHECK_THROWS_AS(solve_auxiliary(zero, 0.1, bad_rho, 2.0, g), std::invalid_argument);
    auto other = strip(3.0, 2.0, 17, 8);
    CHECK_THROWS_AS(solve_auxiliary(TraceField::zeros(other->x), 0.1, rho, 2.0, g),
                    std::invalid_argument);
}

TEST_CASE("boundary functional: zero field, lambda coercivity, solver minimizes") {
    auto g = strip(8.0, 8.0, 129, 22);
    auto rho = TraceField::constant(g->x, 1.0);
    auto data = TraceField::sample(g->x, [](double x) { return smooth_bump(x, 0.3, 2.0); });
    const double m = 2.0, eps = 0.1;

    CHECK(functional_J(ExtensionField::zeros(g), data, rho, m) == 0.0);

    auto sol = solve_auxiliary(data, eps, rho, m, g);

    // Scaling a nonzero field up: both positive terms are superlinear, so
    // J(lambda v) >= lambda J(v).
    for (double lambda : {2.0, 4.0, 8.0}) {
        ExtensionField scaled = sol.v;
        for (auto& val : scaled.values) val *= lambda;
        CHECK(functional_J(scaled, data, rho, m, eps) >=
              lambda * functional_J(sol.v, data, rho, m, eps) - 1e-12);
    }

    // The solution beats 100 random boundary-supported perturbations.
    RectangleHarmonicSolver solver(g);
    Rng rng(424242);
    const double J0 = sol.j_value;
    const double amp = 0.05 * sol.z.max_value();
    int no_better = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto pert = TraceField::zeros(g->x);
        const double c = rng.next_in(-4.0, 4.0), w = rng.next_in(0.5, 3.0);
        const double a = amp * rng.next_in(-1.0, 1.0);
        for (std::size_t i = 1; i + 1 < pert.size(); ++i) {
            const double x = g->x->nodes[i];
            const double vm = std::pow(sol.z.values[i], m);
            pert.values[i] = std::max(vm + a * smooth_bump(x, c, w), 0.0);
        }
        auto vpert = solver.extend(pert);
        if (functional_J(vpert, data, rho, m, eps) >= J0) ++no_better;
    }
    CHECK(no_better == 100);

    // Negative trace data is rejected.
    ExtensionField bad = sol.v;
    bad.at(3, 0) = -1.0;
    CHECK_THROWS_AS(functional_J(bad, data, rho, m), std::invalid_argument);
}
