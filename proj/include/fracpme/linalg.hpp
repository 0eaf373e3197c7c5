#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fracpme/errors.hpp"

namespace fracpme {

struct IterativeResult {
    std::size_t iterations = 0;
    double residual = 0;  // final relative residual |b - Ax| / |b|
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator given as a matvec callback. Solves A x = b in place
/// (x holds the initial guess). Relative tolerance on the preconditioned
/// residual-free true residual norm; throws SolverFailure past max_iter.
template <class MatVec>
IterativeResult pcg(MatVec&& apply_A, std::span<const double> b, std::span<double> x,
                    std::span<const double> inv_diag, double rel_tol, std::size_t max_iter) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), Ap(n);

    double bnorm = 0;
    for (std::size_t i = 0; i < n; ++i) bnorm += b[i] * b[i];
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0) {
        for (std::size_t i = 0; i < n; ++i) x[i] = 0;
        return {0, 0.0};
    }

    apply_A(x, std::span<double>(Ap));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];

    double rz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = inv_diag[i] * r[i];
        rz += r[i] * z[i];
    }
    p = z;

    double rnorm = 0;
    for (std::size_t i = 0; i < n; ++i) rnorm += r[i] * r[i];
    rnorm = std::sqrt(rnorm);

    std::size_t it = 0;
    while (rnorm > rel_tol * bnorm) {
        if (it >= max_iter)
            throw SolverFailure("pcg: max iterations exceeded", it, rnorm / bnorm);
        apply_A(std::span<const double>(p), std::span<double>(Ap));
        double pAp = 0;
        for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (!(pAp > 0))
            throw SolverFailure("pcg: operator not positive definite", it, rnorm / bnorm);
        const double alpha = rz / pAp;
        rnorm = 0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
            rnorm += r[i] * r[i];
        }
        rnorm = std::sqrt(rnorm);
        double rz_new = 0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
            rz_new += r[i] * z[i];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        ++it;
    }
    return {it, rnorm / bnorm};
}

/// Thomas algorithm. lower[i] multiplies x[i-1] in row i, upper[i] multiplies
/// x[i+1]; rhs is overwritten with the solution. Requires a factorization
/// without pivoting (holds for the diagonally dominant systems used here).
inline void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                              std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace fracpme
