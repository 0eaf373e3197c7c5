#include "fracpme/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fracpme/errors.hpp"

namespace fracpme {

namespace {

std::vector<double> diffs(const std::vector<double>& v) {
    std::vector<double> d(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    return d;
}

void require_increasing(const std::vector<double>& v, const char* label) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (!(v[i] < v[i + 1]))
            throw std::invalid_argument(std::string(label) + " nodes not strictly increasing");
        if (!std::isfinite(v[i]))
            throw std::invalid_argument(std::string(label) + " node not finite");
    }
}

}  // namespace

double LineGrid::max_spacing() const { return *std::max_element(spacing.begin(), spacing.end()); }
double LineGrid::min_spacing() const { return *std::min_element(spacing.begin(), spacing.end()); }

bool LineGrid::is_uniform(double rel_tol) const {
    const double h = spacing.front();
    for (double s : spacing)
        if (std::abs(s - h) > rel_tol * h) return false;
    return true;
}

LineGridPtr build_line(double R, std::size_t n) {
    if (!(R > 0)) throw std::invalid_argument("build_line: R must be positive");
    if (n < 2) throw std::invalid_argument("build_line: need at least 2 nodes");

    auto g = std::make_shared<LineGrid>();
    g->nodes.resize(n);
    // Mirror the left half onto the right so symmetry is exact in floating
    // point; odd n gets an exact 0 in the middle.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double xi = -R * (1.0 - 2.0 * static_cast<double>(i) / static_cast<double>(n - 1));
        g->nodes[i] = xi;
        g->nodes[n - 1 - i] = -xi;
    }
    if (n % 2 == 1) g->nodes[n / 2] = 0.0;
    g->nodes.front() = -R;
    g->nodes.back() = R;
    g->spacing = diffs(g->nodes);
    g->symmetric = true;
    require_increasing(g->nodes, "build_line");
    return g;
}

LineGridPtr line_from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2) throw std::invalid_argument("line_from_nodes: need at least 2 nodes");
    require_increasing(nodes, "line_from_nodes");
    auto g = std::make_shared<LineGrid>();
    g->nodes = std::move(nodes);
    g->spacing = diffs(g->nodes);
    g->symmetric = false;
    return g;
}

HalfStripGridPtr build_half_strip(double R, double Y, std::size_t nx, std::size_t ny,
                                  double grade) {
    if (!(Y > 0)) throw std::invalid_argument("build_half_strip: Y must be positive");
    if (ny < 2) throw std::invalid_argument("build_half_strip: need at least 2 y-levels");
    if (!(grade >= 1.0))
        throw std::invalid_argument("build_half_strip: grade must be >= 1");

    auto g = std::make_shared<HalfStripGrid>();
    g->x = build_line(R, nx);
    g->R = R;
    g->Y = Y;
    g->grade = grade;
    g->y.resize(ny);
    const auto N = static_cast<double>(ny - 1);
    if (grade == 1.0) {
        for (std::size_t j = 0; j < ny; ++j)
            g->y[j] = Y * (static_cast<double>(j) / N);
    } else {
        // Spacings form a geometric sequence with ratio `grade`; the sum
        // telescopes so y[ny-1] lands on Y exactly.
        const double qN = std::pow(grade, N);
        for (std::size_t j = 0; j < ny; ++j)
            g->y[j] = Y * (std::pow(grade, static_cast<double>(j)) - 1.0) / (qN - 1.0);
    }
    g->y.front() = 0.0;
    g->y.back() = Y;
    require_increasing(g->y, "build_half_strip");
    g->dy.resize(ny - 1);
    for (std::size_t j = 0; j + 1 < ny; ++j) g->dy[j] = g->y[j + 1] - g->y[j];
    return g;
}

HalfDiskGridPtr build_half_disk(double R, std::size_t nr, std::size_t ntheta, double r_min) {
    if (!(r_min > 0) || !(R > r_min))
        throw std::invalid_argument("build_half_disk: need 0 < r_min < R");
    if (nr < 2 || ntheta < 2)
        throw std::invalid_argument("build_half_disk: need at least 2 nodes per direction");

    auto g = std::make_shared<HalfDiskGrid>();
    g->R = R;
    g->r_min = r_min;
    g->r.resize(nr);
    const double ratio = R / r_min;
    const auto N = static_cast<double>(nr - 1);
    for (std::size_t i = 0; i < nr; ++i)
        g->r[i] = r_min * std::pow(ratio, static_cast<double>(i) / N);
    g->r.front() = r_min;
    g->r.back() = R;
    require_increasing(g->r, "build_half_disk (radii)");

    g->theta.resize(ntheta);
    const auto M = static_cast<double>(ntheta - 1);
    for (std::size_t j = 0; j < ntheta; ++j)
        g->theta[j] = std::numbers::pi * (static_cast<double>(j) / M);
    g->theta.front() = 0.0;
    g->theta.back() = std::numbers::pi;
    require_increasing(g->theta, "build_half_disk (angles)");
    return g;
}

}  // namespace fracpme
