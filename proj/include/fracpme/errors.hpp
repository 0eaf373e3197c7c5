#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracpme {

/// Grid does not satisfy the structural requirements of an operation
/// (e.g. a non-uniform grid passed to a uniform-only quadrature).
class UnsupportedGrid : public std::invalid_argument {
public:
    explicit UnsupportedGrid(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative solver failed to reach its tolerance. Carries the iteration
/// count and the last residual so callers can report the trace.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, std::size_t iterations, double residual)
        : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                             ", residual=" + std::to_string(residual) + ")"),
          iterations(iterations),
          residual(residual) {}

    std::size_t iterations;
    double residual;
};

/// Config-text parsing failure; `line` is 1-based, 0 for document-level
/// problems (such as a required key that never appeared).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line(line) {}

    std::size_t line;
};

}  // namespace fracpme
