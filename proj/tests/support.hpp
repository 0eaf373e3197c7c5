#pragma once

// Shared helpers for the test suites: independent quadrature oracles,
// deterministic random data, smooth test profiles.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "fracpme/fields.hpp"
#include "fracpme/grid.hpp"

namespace testsupport {

// C-infinity bump supported on [center - width, center + width], peak 1.
inline double smooth_bump(double x, double center = 0.0, double width = 1.0) {
    const double s = (x - center) / width;
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

// Independent principal-value quadrature of the half-Laplacian of an analytic
// profile: Simpson on geometric panels of the symmetric pair integrand
//   (2 f(x) - f(x+s) - f(x-s)) / s^2,
// far tail bounded by ~4 max|f| / s_max. Used only to pin expected values.
inline double pv_halflap_reference(const std::function<double(double)>& f, double x,
                                   double s_max = 1e8) {
    const double s0 = 1e-8;
    const double ratio = 1.03;
    auto integrand = [&](double s) { return (2.0 * f(x) - f(x + s) - f(x - s)) / (s * s); };
    double total = 0.0;
    double a = s0;
    while (a < s_max) {
        const double b = std::min(a * ratio, s_max);
        const double mid = 0.5 * (a + b);
        total += (b - a) / 6.0 * (integrand(a) + 4.0 * integrand(mid) + integrand(b));
        a = b;
    }
    return total / std::numbers::pi;
}

// splitmix64: tiny deterministic generator, identical on every platform.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // uniform in [lo, hi)
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
};

// sup |a - b| / sup |a|, the normalized disagreement used when profiles pass
// through zeros and pointwise relative error is meaningless.
inline double normalized_sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(a[i]));
    }
    return den > 0 ? num / den : num;
}

inline fracpme::TraceField sample_on(fracpme::LineGridPtr g,
                                     const std::function<double(double)>& f) {
    return fracpme::TraceField::sample(g, f);
}

}  // namespace testsupport
