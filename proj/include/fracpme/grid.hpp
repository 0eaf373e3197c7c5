#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace fracpme {

/// Strictly increasing 1-D node set for boundary-line data. Immutable after
/// construction; fields share grids through shared_ptr<const ...>.
struct LineGrid {
    std::vector<double> nodes;
    std::vector<double> spacing;  // nodes[i+1] - nodes[i], size() - 1 entries
    bool symmetric = false;       // true when produced by build_line

    std::size_t size() const { return nodes.size(); }
    double x(std::size_t i) const { return nodes[i]; }
    double left() const { return nodes.front(); }
    double right() const { return nodes.back(); }
    double max_spacing() const;
    double min_spacing() const;

    /// True when all spacings agree to rel_tol (required by the uniform-grid
    /// quadratures and transforms).
    bool is_uniform(double rel_tol = 1e-12) const;
};

using LineGridPtr = std::shared_ptr<const LineGrid>;

/// Uniform symmetric grid with n nodes on [-R, R]. Nodes mirror exactly
/// (x[i] == -x[n-1-i] bitwise) and odd n places a node at 0.
LineGridPtr build_line(double R, std::size_t n);

/// Wrap an explicit strictly increasing node list.
LineGridPtr line_from_nodes(std::vector<double> nodes);

/// Tensor grid on [-R, R] x [0, Y]: uniform x, geometrically graded y with
/// consecutive spacing ratio `grade` (grade 1 = uniform). y[0] is exactly 0
/// and y[ny-1] exactly Y. The y=0 row is the coupling boundary; the two side
/// columns and the top row carry homogeneous Dirichlet data in the solvers.
struct HalfStripGrid {
    LineGridPtr x;
    std::vector<double> y;
    std::vector<double> dy;  // y[j+1] - y[j]
    double R = 0, Y = 0, grade = 1;

    std::size_t nx() const { return x->size(); }
    std::size_t ny() const { return y.size(); }
    double hx() const { return x->spacing.front(); }
};

using HalfStripGridPtr = std::shared_ptr<const HalfStripGrid>;

HalfStripGridPtr build_half_strip(double R, double Y, std::size_t nx, std::size_t ny,
                                  double grade);

/// Polar tensor grid on the upper half annulus r in [r_min, R], theta in
/// [0, pi]: geometric radii (constant ratio), uniform angles. theta = 0 is the
/// positive x half-line, theta = pi the negative one; r = R is the outer arc.
struct HalfDiskGrid {
    std::vector<double> r;
    std::vector<double> theta;
    double R = 0, r_min = 0;

    std::size_t nr() const { return r.size(); }
    std::size_t ntheta() const { return theta.size(); }
    double dtheta() const { return theta[1] - theta[0]; }
};

using HalfDiskGridPtr = std::shared_ptr<const HalfDiskGrid>;

HalfDiskGridPtr build_half_disk(double R, std::size_t nr, std::size_t ntheta, double r_min);

}  // namespace fracpme
