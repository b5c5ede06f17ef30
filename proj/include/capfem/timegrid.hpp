#pragma once

/// @file timegrid.hpp
/// @brief Equally spaced time grid on [0, T].

#include "capfem/error.hpp"

namespace capfem {

struct TimeGrid {
    double final_time = 1.0; // T
    int steps = 1;           // N

    void validate() const {
        if (!(final_time > 0.0))
            throw Error(ErrorKind::invalid_argument,
                        "time grid: final time must be positive");
        if (steps < 1)
            throw Error(ErrorKind::invalid_argument,
                        "time grid: need at least one step");
    }
    double tau() const { return final_time / steps; }
    double node(int n) const { return n * tau(); }
};

} // namespace capfem
