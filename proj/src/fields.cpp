#include "fracpme/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fracpme {

namespace {

void check_finite(const std::vector<double>& v, const char* who) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string(who) + ": non-finite value");
}

}  // namespace

TraceField TraceField::zeros(LineGridPtr g) {
    return TraceField{g, std::vector<double>(g->size(), 0.0)};
}

TraceField TraceField::constant(LineGridPtr g, double c) {
    return TraceField{g, std::vector<double>(g->size(), c)};
}

TraceField TraceField::sample(LineGridPtr g, const std::function<double(double)>& f) {
    TraceField out{g, std::vector<double>(g->size())};
    for (std::size_t i = 0; i < g->size(); ++i) out.values[i] = f(g->nodes[i]);
    return out;
}

double TraceField::max_abs() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double TraceField::min_value() const { return *std::min_element(values.begin(), values.end()); }
double TraceField::max_value() const { return *std::max_element(values.begin(), values.end()); }

double TraceField::interpolate(double x) const {
    const auto& xs = grid->nodes;
    if (x <= xs.front()) return values.front();
    if (x >= xs.back()) return values.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - t) * values[i] + t * values[i + 1];
}

void TraceField::validate(const char* who) const {
    if (!grid) throw std::invalid_argument(std::string(who) + ": null grid");
    if (values.size() != grid->size())
        throw std::invalid_argument(std::string(who) + ": value/node count mismatch");
    check_finite(values, who);
}

ExtensionField ExtensionField::zeros(HalfStripGridPtr g) {
    return ExtensionField{g, std::vector<double>(g->nx() * g->ny(), 0.0)};
}

TraceField ExtensionField::trace() const {
    TraceField t{grid->x, std::vector<double>(values.begin(),
                                              values.begin() + static_cast<long>(nx()))};
    return t;
}

double ExtensionField::max_abs() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double ExtensionField::min_value() const { return *std::min_element(values.begin(), values.end()); }
double ExtensionField::max_value() const { return *std::max_element(values.begin(), values.end()); }

void ExtensionField::validate(const char* who) const {
    if (!grid) throw std::invalid_argument(std::string(who) + ": null grid");
    if (values.size() != grid->nx() * grid->ny())
        throw std::invalid_argument(std::string(who) + ": value/node count mismatch");
    check_finite(values, who);
}

PolarField PolarField::zeros(HalfDiskGridPtr g) {
    return PolarField{g, std::vector<double>(g->nr() * g->ntheta(), 0.0)};
}

void PolarField::validate(const char* who) const {
    if (!grid) throw std::invalid_argument(std::string(who) + ": null grid");
    if (values.size() != grid->nr() * grid->ntheta())
        throw std::invalid_argument(std::string(who) + ": value/node count mismatch");
    check_finite(values, who);
}

}  // namespace fracpme
