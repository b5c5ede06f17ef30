#pragma once

/// @file geometry.hpp
/// @brief Plane vectors and the square-with-circular-interface geometry.

#include <cmath>

#include "capfem/error.hpp"

namespace capfem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Domain (-a, a)^2 with the interface circle |x| = r0 centered at the origin.
/// Subdomain 1 is the open disk, subdomain 2 the remainder.
struct GeometrySpec {
    double half_width = 1.0;       // a
    double interface_radius = 0.5; // r0

    void validate() const {
        if (!(half_width > 0.0))
            throw Error(ErrorKind::invalid_argument,
                        "geometry: half_width must be positive");
        if (!(interface_radius > 0.0) || !(interface_radius < half_width))
            throw Error(ErrorKind::invalid_argument,
                        "geometry: interface_radius must lie in (0, half_width)");
    }
};

} // namespace capfem
