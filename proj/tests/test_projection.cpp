/// Capacitance-weighted elliptic projection of initial data: solver-path
/// independence, Galerkin orthogonality, linearity, interface flux handling,
/// and optimal refinement rates.

#include "catch2/catch_amalgamated.hpp"

#include "capfem/capfem.hpp"
#include "support.hpp"

#include <cmath>

using namespace capfem;
using testsupport::max_abs_diff;
using Catch::Matchers::WithinAbs;

namespace {

// smooth bump with zero trace; no dependence on the subdomain tag
InitialDatum smooth_bump(double eps) {
    InitialDatum d;
    d.u0 = [](Vec2 p, int) { return (1 - p.x * p.x) * (1 - p.y * p.y); };
    d.grad0 = [](Vec2 p, int) {
        return Vec2{-2 * p.x * (1 - p.y * p.y), -2 * p.y * (1 - p.x * p.x)};
    };
    d.fstar = [eps](Vec2 p, int) {
        return eps * (2 * (1 - p.y * p.y) + 2 * (1 - p.x * p.x));
    };
    return d;
}

// piecewise quadratic with continuous values and a genuine conormal jump
// across the circle; nonzero trace on the square
InitialDatum piecewise_paraboloid(const CoefficientField& c) {
    InitialDatum d;
    d.u0 = [](Vec2 p, int tag) {
        double r2 = p.x * p.x + p.y * p.y;
        return tag == 1 ? r2 : 0.25 * r2 + 0.1875;
    };
    d.grad0 = [](Vec2 p, int tag) {
        return tag == 1 ? Vec2{2 * p.x, 2 * p.y} : Vec2{0.5 * p.x, 0.5 * p.y};
    };
    d.fstar = [c](Vec2, int tag) {
        return tag == 1 ? -4.0 * c.eps1 : -1.0 * c.eps2;
    };
    // [eps du/dnu] across |x| = 0.5: eps1 * 2 r0 - eps2 * 0.5 r0
    d.gstar = [c](Vec2) { return c.eps1 * 1.0 - c.eps2 * 0.25; };
    d.boundary = [](Vec2 p) {
        return 0.25 * (p.x * p.x + p.y * p.y) + 0.1875;
    };
    return d;
}

} // namespace

// ---- solver-path independence -----------------------------------------------

TEST_CASE("projection agrees with a dense solve of its normal equations",
          "[projection]") {
    Mesh m = generate_mesh({1.0, 0.5}, 8);
    auto dofs = DofMap::interior(m);
    CoefficientField c{1, 1, 2.0, 2.0};
    auto d = smooth_bump(2.0);

    auto q = qh_project(m, c, dofs, d);
    auto a_eps = assemble_stiffness(m, c, Form::eps, dofs);
    auto load = assemble_load(
        m, [&d](Vec2 p, int t) { return d.fstar(p, t); }, dofs);
    auto oracle = dense_solve(to_dense(a_eps), load);
    REQUIRE(max_abs_diff(q, oracle) < 1e-11);
}

// ---- orthogonality ----------------------------------------------------------

TEST_CASE("projection of smooth data is Galerkin-orthogonal to machine level",
          "[projection]") {
    Mesh m = generate_mesh({1.0, 0.5}, 8);
    auto dofs = DofMap::interior(m);
    CoefficientField c{1, 1, 2.0, 2.0};
    auto d = smooth_bump(2.0);
    auto q = qh_project(m, c, dofs, d);
    REQUIRE(galerkin_orthogonality_residual(m, c, dofs, d, q) < 1e-10);
}

TEST_CASE("orthogonality defect shrinks with the interface resolution",
          "[projection]") {
    // data with a conormal jump: the defect is the geometric consistency
    // error of the chord interface and must refine away
    CoefficientField c{1, 1, 1.0, 0.1};
    auto d = piecewise_paraboloid(c);
    double res8 = 0.0, res16 = 0.0;
    for (int n : {8, 16}) {
        Mesh m = generate_mesh({1.0, 0.5}, n);
        auto dofs = DofMap::interior(m);
        auto q = qh_project(m, c, dofs, d);
        double r = galerkin_orthogonality_residual(m, c, dofs, d, q);
        (n == 8 ? res8 : res16) = r;
    }
    REQUIRE(res8 < 5e-2);
    REQUIRE(res16 < 1e-2);
    REQUIRE(res16 < res8 / 3.0);
}

// ---- structure --------------------------------------------------------------

TEST_CASE("projection is linear in the datum", "[projection]") {
    Mesh m = generate_mesh({1.0, 0.5}, 8);
    auto dofs = DofMap::interior(m);
    CoefficientField c{1, 1, 1.0, 0.1};
    auto d = piecewise_paraboloid(c);

    InitialDatum scaled;
    scaled.u0 = [&d](Vec2 p, int t) { return 2.5 * d.u0(p, t); };
    scaled.grad0 = [&d](Vec2 p, int t) { return 2.5 * d.grad0(p, t); };
    scaled.fstar = [&d](Vec2 p, int t) { return 2.5 * d.fstar(p, t); };
    scaled.gstar = [&d](Vec2 p) { return 2.5 * d.gstar(p); };
    scaled.boundary = [&d](Vec2 p) { return 2.5 * d.boundary(p); };

    auto q = qh_project(m, c, dofs, d);
    auto q_scaled = qh_project(m, c, dofs, scaled);
    for (int i = 0; i < dofs.n_dofs; ++i)
        REQUIRE_THAT(q_scaled[i], WithinAbs(2.5 * q[i], 1e-10));
}

TEST_CASE("projection requires the volumetric datum term", "[projection]") {
    Mesh m = generate_mesh({1.0, 0.5}, 8);
    auto dofs = DofMap::interior(m);
    InitialDatum d;
    d.u0 = [](Vec2, int) { return 1.0; };
    REQUIRE_THROWS_AS(qh_project(m, {1, 1, 1, 1}, dofs, d), Error);
}

TEST_CASE("nodal interpolation picks vertex values branch-wise",
          "[projection]") {
    Mesh m = generate_mesh({1.0, 0.5}, 8);
    auto dofs = DofMap::interior(m);
    auto u0 = [](Vec2 p, int tag) {
        return tag == 1 ? 1.0 + p.x : 5.0 + p.x;
    };
    auto v = nodal_interpolate(m, dofs, u0);
    const double r0 = m.geom.interface_radius;
    for (int i = 0; i < dofs.n_dofs; ++i) {
        Vec2 p = m.vertices[dofs.dof_to_vertex[i]];
        int tag = norm(p) < r0 - 1e-12 ? 1 : 2; // circle vertices take either
        if (std::abs(norm(p) - r0) < 1e-12) continue;
        REQUIRE_THAT(v[i], WithinAbs(u0(p, tag), 1e-14));
    }
    REQUIRE_THROWS_AS(nodal_interpolate(m, dofs, {}), Error);
}

// ---- refinement rates -------------------------------------------------------

TEST_CASE("projection error refines at optimal order in both norms",
          "[projection][rates]") {
    auto ca = case_A();
    std::vector<double> hs, el2, eh1;
    for (int n : {16, 32, 64}) {
        Mesh m = generate_mesh(ca.geom, n);
        auto dofs = DofMap::interior(m);
        auto q = qh_project(m, ca.coeff, dofs, ca.datum);
        auto vals = expand_to_vertices(m, dofs, q);
        auto en = error_norms(
            m, vals, [&ca](Vec2 p, int t) { return ca.datum.u0(p, t); },
            [&ca](Vec2 p, int t) { return ca.datum.grad0(p, t); });
        hs.push_back(m.mesh_size);
        el2.push_back(en.l2);
        eh1.push_back(en.h1);
    }
    double slope_l2 = fit_slope(hs, el2);
    double slope_h1 = fit_slope(hs, eh1);
    CAPTURE(slope_l2, slope_h1);
    REQUIRE(slope_l2 > 1.8);
    REQUIRE(slope_l2 < 2.2);
    REQUIRE(slope_h1 > 0.85);
    REQUIRE(slope_h1 < 1.15);
}

TEST_CASE("flux-jump datum still projects at second order in the mean",
          "[projection][rates]") {
    CoefficientField c{1, 1, 1.0, 0.1};
    auto d = piecewise_paraboloid(c);
    double prev = 0.0;
    for (int n : {8, 16, 32}) {
        Mesh m = generate_mesh({1.0, 0.5}, n);
        auto dofs = DofMap::interior(m);
        auto q = qh_project(m, c, dofs, d);
        auto vals = expand_to_vertices(m, dofs, q, d.boundary);
        auto en = error_norms(
            m, vals, [&d](Vec2 p, int t) { return d.u0(p, t); },
            [&d](Vec2 p, int t) { return d.grad0(p, t); });
        if (n > 8) {
            REQUIRE(prev / en.l2 > 3.0);
            REQUIRE(prev / en.l2 < 4.8);
        }
        prev = en.l2;
    }
}
