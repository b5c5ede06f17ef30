#pragma once

/// @file error.hpp
/// @brief Structured error types shared by all capfem components.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace capfem {

enum class ErrorKind {
    invalid_argument,   // precondition violated by the caller
    mesh_quality,       // element below the minimum-angle threshold
    snap_failure,       // interface snapping cannot produce a fitted mesh
    conformity,         // mesh fails a structural validity condition
    io,                 // file system failure
    parse,              // malformed input text (mesh file, config)
    config,             // semantically invalid or unknown configuration
    solver,             // linear solve failed
    certification,      // verification gate or rate certification refused
};

/// Carries a machine-readable kind plus the offending index/key when known.
/// `index` is the element, step, or line number the error refers to (-1 when
/// not applicable); `key` is the configuration key path when applicable.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message, long index = -1,
          std::string key = {})
        : std::runtime_error(message), kind(kind), index(index),
          key(std::move(key)) {}

    ErrorKind kind;
    long index;
    std::string key;
};

/// Thrown when an iterative solve does not reach tolerance. Keeps the best
/// iterate seen and the residual history so callers can diagnose or reuse it.
class SolveFailure : public Error {
  public:
    SolveFailure(const std::string& message, std::vector<double> best_iterate,
                 std::vector<double> residual_history)
        : Error(ErrorKind::solver, message),
          best_iterate(std::move(best_iterate)),
          residual_history(std::move(residual_history)) {}

    std::vector<double> best_iterate;
    std::vector<double> residual_history;
};

} // namespace capfem
