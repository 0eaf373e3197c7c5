#pragma once

#include <functional>
#include <vector>

#include "fracpme/grid.hpp"

namespace fracpme {

/// Scalar samples on a LineGrid node set.
struct TraceField {
    LineGridPtr grid;
    std::vector<double> values;

    static TraceField zeros(LineGridPtr g);
    static TraceField constant(LineGridPtr g, double c);
    static TraceField sample(LineGridPtr g, const std::function<double(double)>& f);

    std::size_t size() const { return values.size(); }
    double max_abs() const;
    double min_value() const;
    double max_value() const;

    /// Piecewise-linear evaluation; clamps to the end values outside the grid.
    double interpolate(double x) const;

    /// Throws std::invalid_argument when sizes mismatch or values are not finite.
    void validate(const char* who) const;
};

/// Scalar samples on a HalfStripGrid, row-major by y-level:
/// values[j * nx + i] is the node (x_i, y_j).
struct ExtensionField {
    HalfStripGridPtr grid;
    std::vector<double> values;

    static ExtensionField zeros(HalfStripGridPtr g);

    std::size_t nx() const { return grid->nx(); }
    std::size_t ny() const { return grid->ny(); }
    double at(std::size_t i, std::size_t j) const { return values[j * nx() + i]; }
    double& at(std::size_t i, std::size_t j) { return values[j * nx() + i]; }

    /// Copy of the y=0 row as a TraceField on the x grid.
    TraceField trace() const;

    double max_abs() const;
    double min_value() const;
    double max_value() const;
    void validate(const char* who) const;
};

/// Scalar samples on a HalfDiskGrid: values[i * ntheta + j] is (r_i, theta_j).
struct PolarField {
    HalfDiskGridPtr grid;
    std::vector<double> values;

    static PolarField zeros(HalfDiskGridPtr g);

    std::size_t nr() const { return grid->nr(); }
    std::size_t ntheta() const { return grid->ntheta(); }
    double at(std::size_t i, std::size_t j) const { return values[i * ntheta() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * ntheta() + j]; }

    void validate(const char* who) const;
};

}  // namespace fracpme
