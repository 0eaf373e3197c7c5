#pragma once

#include <vector>

#include "fracpme/fields.hpp"

namespace fracpme::oracle {

/// Half-Laplacian of trace data by the principal-value integral
///   (1/pi) P.V. integral (f(x) - f(t)) / (x - t)^2 dt,
/// folded into the symmetric pair integrand
///   (1/pi) integral_0^inf (2 f(x) - f(x+s) - f(x-s)) / s^2 ds.
/// Trapezoid on the grid lattice; the s=0 endpoint is the centered second
/// difference (the finite limit of the pair integrand) and f is extended by
/// its end values beyond the grid, with the remaining tail integrated in
/// closed form. Requires a uniform grid.
TraceField pv_fractional_laplacian(const TraceField& f);

/// Half-Laplacian of one period of uniformly sampled periodic data via the
/// discrete Fourier transform: mode j is multiplied by |k_j|, k_j = 2*pi*j~ /
/// period with j~ the signed mode index. The grid must cover exactly one
/// period with the right endpoint omitted (n * h == period). For even n the
/// Nyquist bin has no signed partner; it is treated as the cosine mode with
/// |k| = pi * n / period, which keeps real data real.
TraceField spectral_fractional_laplacian(const TraceField& f, double period);

/// Harmonic extension of u0 to height y >= 0 over the full line: convolution
/// with the kernel y / (pi (x^2 + y^2)). Cell integrals are exact for the
/// piecewise-linear interpolant of u0, and the two half-line tails assume u0
/// stays at its end values (closed-form arctan mass). y = 0 returns u0
/// unchanged; y < 0 throws.
TraceField poisson_extend(const TraceField& u0, double y);

/// Same convolution evaluated at arbitrary points instead of the grid nodes.
std::vector<double> poisson_extend_at(const TraceField& u0, double y,
                                      const std::vector<double>& points);

/// Time-t solution of the constant-density linear problem (m = 1, rho = 1):
/// the kernel height doubles as the time variable.
TraceField poisson_semigroup_solution(const TraceField& u0, double t);

}  // namespace fracpme::oracle
