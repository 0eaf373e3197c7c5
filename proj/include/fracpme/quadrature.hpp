#pragma once

#include <cstddef>
#include <vector>

#include "fracpme/fields.hpp"
#include "fracpme/grid.hpp"

namespace fracpme {

/// Composite trapezoid weights for the grid's node set.
inline std::vector<double> trapezoid_weights(const LineGrid& g) {
    std::vector<double> w(g.size(), 0.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double h = g.spacing[i] * 0.5;
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

inline double trapezoid(const TraceField& f) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i)
        s += 0.5 * f.grid->spacing[i] * (f.values[i] + f.values[i + 1]);
    return s;
}

/// Trapezoid of the pointwise product of two fields on the same grid.
inline double trapezoid_product(const TraceField& a, const TraceField& b) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        s += 0.5 * a.grid->spacing[i] *
             (a.values[i] * b.values[i] + a.values[i + 1] * b.values[i + 1]);
    return s;
}

/// Gradient energy of a half-strip field: per cell, average the two one-sided
/// differences in each direction and sum |grad|^2 times the cell area.
inline double dirichlet_energy(const ExtensionField& w) {
    const auto& g = *w.grid;
    const std::size_t nx = g.nx(), ny = g.ny();
    double e = 0;
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        const double dy = g.dy[j];
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const double dx = g.x->spacing[i];
            const double wx = 0.5 * ((w.at(i + 1, j) - w.at(i, j)) +
                                     (w.at(i + 1, j + 1) - w.at(i, j + 1))) / dx;
            const double wy = 0.5 * ((w.at(i, j + 1) - w.at(i, j)) +
                                     (w.at(i + 1, j + 1) - w.at(i + 1, j))) / dy;
            e += (wx * wx + wy * wy) * dx * dy;
        }
    }
    return e;
}

}  // namespace fracpme
