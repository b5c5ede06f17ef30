#pragma once

/// Shared test helpers: a plain lattice mesh without interface fitting (for
/// problems where the circle plays no role; element tags are all 2, so use
/// tag-independent data and equal coefficients with it), plus small vector
/// utilities.

#include "capfem/capfem.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testsupport {

/// Uniform right-triangle lattice on (-a,a)^2, all diagonals "/", no
/// interface edges. Not circle-aware: skip validate_mesh on it.
inline capfem::Mesh lattice_mesh(int n, double a = 1.0) {
    capfem::Mesh m;
    m.geom = {a, 0.5 * a};
    double s = 2.0 * a / n;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            m.vertices.push_back({-a + i * s, -a + j * s});
            m.on_boundary.push_back(i == 0 || i == n || j == 0 || j == n);
        }
    auto idx = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int v00 = idx(i, j), v10 = idx(i + 1, j);
            int v01 = idx(i, j + 1), v11 = idx(i + 1, j + 1);
            m.elements.push_back({{v00, v10, v11}, 2});
            m.elements.push_back({{v00, v11, v01}, 2});
        }
    m.mesh_size = s * std::sqrt(2.0);
    return m;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double max_abs(const std::vector<double>& a) {
    double d = 0.0;
    for (double v : a) d = std::max(d, std::abs(v));
    return d;
}

inline std::vector<double> random_vector(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

} // namespace testsupport
