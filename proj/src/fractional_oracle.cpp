#include "fracpme/fractional_oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "fracpme/errors.hpp"
#include "fracpme/fftw_guard.hpp"

namespace fracpme::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

void require_uniform(const TraceField& f, const char* who) {
    f.validate(who);
    if (f.size() < 3) throw UnsupportedGrid(std::string(who) + ": need at least 3 nodes");
    if (!f.grid->is_uniform(1e-10))
        throw UnsupportedGrid(std::string(who) + ": requires a uniform grid");
}

}  // namespace

TraceField pv_fractional_laplacian(const TraceField& f) {
    require_uniform(f, "pv_fractional_laplacian");
    const std::size_t n = f.size();
    const double h = f.grid->spacing.front();
    const double fl = f.values.front();
    const double fr = f.values.back();

    TraceField out = TraceField::zeros(f.grid);
    for (std::size_t i = 0; i < n; ++i) {
        const double fi = f.values[i];
        const std::size_t reach = std::max(i, n - 1 - i);
        auto pair_deficit = [&](std::size_t j) {
            const double fp = (i + j < n) ? f.values[i + j] : fr;
            const double fm = (j <= i) ? f.values[i - j] : fl;
            return 2.0 * fi - fp - fm;
        };
        // Trapezoid over s = j*h; the s=0 limit of the pair integrand is the
        // centered second difference.
        double acc = 0.5 * pair_deficit(1) / (h * h);
        for (std::size_t j = 1; j < reach; ++j) {
            const double s = static_cast<double>(j) * h;
            acc += pair_deficit(j) / (s * s);
        }
        const double S = static_cast<double>(reach) * h;
        acc += 0.5 * pair_deficit(reach) / (S * S);
        double integral = acc * h;
        // Beyond the lattice both sides sit at the constant extension values.
        integral += (2.0 * fi - fl - fr) / S;
        out.values[i] = integral / kPi;
    }
    return out;
}

TraceField spectral_fractional_laplacian(const TraceField& f, double period) {
    require_uniform(f, "spectral_fractional_laplacian");
    if (!(period > 0))
        throw std::invalid_argument("spectral_fractional_laplacian: period must be positive");
    const std::size_t n = f.size();
    const double h = f.grid->spacing.front();
    if (std::abs(static_cast<double>(n) * h - period) > 1e-8 * period)
        throw UnsupportedGrid(
            "spectral_fractional_laplacian: grid must cover one period with the right "
            "endpoint omitted (n * h == period)");

    std::vector<std::complex<double>> buf(n), spec(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = f.values[i];

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf.data()),
                               reinterpret_cast<fftw_complex*>(spec.data()), FFTW_FORWARD,
                               FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()),
                               reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                               FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    for (std::size_t j = 0; j < n; ++j) {
        const double signed_index =
            (j <= n / 2) ? static_cast<double>(j)
                         : static_cast<double>(j) - static_cast<double>(n);
        spec[j] *= 2.0 * kPi * std::abs(signed_index) / period;
    }
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    TraceField out = TraceField::zeros(f.grid);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = buf[i].real() / static_cast<double>(n);
    return out;
}

namespace {

double kernel_convolution_at(const TraceField& u0, double y, double x) {
    const auto& xs = u0.grid->nodes;
    const auto& uv = u0.values;
    const std::size_t n = xs.size();
    double acc = 0;
    // Exact integral of the kernel against the piecewise-linear interpolant:
    // I0 is the kernel mass of a cell, I1 its first moment about x.
    double atan_prev = std::atan((xs[0] - x) / y);
    double logr_prev = std::log((xs[0] - x) * (xs[0] - x) + y * y);
    for (std::size_t c = 0; c + 1 < n; ++c) {
        const double a = xs[c], b = xs[c + 1];
        const double atan_next = std::atan((b - x) / y);
        const double logr_next = std::log((b - x) * (b - x) + y * y);
        const double i0 = (atan_next - atan_prev) / kPi;
        const double i1 = y * (logr_next - logr_prev) / (2.0 * kPi);
        const double slope = (uv[c + 1] - uv[c]) / (b - a);
        acc += (uv[c] + slope * (x - a)) * i0 + slope * i1;
        atan_prev = atan_next;
        logr_prev = logr_next;
    }
    // Constant extension on both half-line tails.
    acc += uv.front() * (std::atan((xs.front() - x) / y) + 0.5 * kPi) / kPi;
    acc += uv.back() * (0.5 * kPi - std::atan((xs.back() - x) / y)) / kPi;
    return acc;
}

}  // namespace

std::vector<double> poisson_extend_at(const TraceField& u0, double y,
                                      const std::vector<double>& points) {
    u0.validate("poisson_extend");
    if (y < 0) throw std::invalid_argument("poisson_extend: height must be nonnegative");
    std::vector<double> out(points.size());
    if (y == 0) {
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = u0.interpolate(points[i]);
        return out;
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        out[i] = kernel_convolution_at(u0, y, points[i]);
    return out;
}

TraceField poisson_extend(const TraceField& u0, double y) {
    u0.validate("poisson_extend");
    if (y < 0) throw std::invalid_argument("poisson_extend: height must be nonnegative");
    if (y == 0) return u0;
    TraceField out = TraceField::zeros(u0.grid);
    for (std::size_t i = 0; i < u0.size(); ++i)
        out.values[i] = kernel_convolution_at(u0, y, u0.grid->nodes[i]);
    return out;
}

TraceField poisson_semigroup_solution(const TraceField& u0, double t) {
    if (t < 0) throw std::invalid_argument("poisson_semigroup_solution: time must be nonnegative");
    return poisson_extend(u0, t);
}

}  // namespace fracpme::oracle
