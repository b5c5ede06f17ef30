/// Quadrature exactness, stiffness and load assembly, interface line
/// integrals, the sparse container, and the error-norm evaluator.

#include "catch2/catch_amalgamated.hpp"

#include "capfem/capfem.hpp"
#include "support.hpp"

#include <cmath>

using namespace capfem;
using testsupport::lattice_mesh;
using testsupport::max_abs_diff;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// integral of x^p y^q over the unit right triangle {x,y >= 0, x+y <= 1}
double monomial_integral(int p, int q) {
    auto fact = [](int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    return fact(p) * fact(q) / fact(p + q + 2);
}

// square (-1,1)^2 split along the main diagonal, mixed tags
Mesh split_square(int tag0 = 2, int tag1 = 2) {
    Mesh m;
    m.geom = {1.0, 0.5};
    m.vertices = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    m.on_boundary = {1, 1, 1, 1};
    m.elements = {{{0, 1, 2}, tag0}, {{0, 2, 3}, tag1}};
    m.mesh_size = 2 * std::sqrt(2.0);
    return m;
}

} // namespace

// ---- quadrature -------------------------------------------------------------

TEST_CASE("triangle rules integrate monomials exactly to their degree",
          "[quadrature]") {
    const Vec2 p0{0, 0}, p1{1, 0}, p2{0, 1}; // jac = 2*area = 1
    for (int degree : {1, 2, 4, 6}) {
        const auto& rule = triangle_rule(degree);
        REQUIRE(rule.degree >= degree);
        for (int p = 0; p + 0 <= degree; ++p)
            for (int q = 0; p + q <= degree; ++q) {
                double sum = 0.0;
                for (const auto& pt : rule.points) {
                    Vec2 x = map_point(pt, p0, p1, p2);
                    sum += pt.w * std::pow(x.x, p) * std::pow(x.y, q);
                }
                INFO("degree " << degree << " monomial x^" << p << " y^" << q);
                REQUIRE_THAT(sum, WithinAbs(monomial_integral(p, q), 1e-15));
            }
    }
    REQUIRE_THROWS_AS(triangle_rule(7), Error);
}

TEST_CASE("segment rules integrate monomials exactly to their degree",
          "[quadrature]") {
    for (int npts : {1, 2, 3, 4}) {
        const auto& rule = segment_rule(npts);
        REQUIRE(rule.degree == 2 * npts - 1);
        for (int k = 0; k <= rule.degree; ++k) {
            double sum = 0.0;
            for (const auto& pt : rule.points) sum += pt.w * std::pow(pt.s, k);
            INFO(npts << " points, s^" << k);
            REQUIRE_THAT(sum, WithinAbs(1.0 / (k + 1), 1e-15));
        }
    }
    REQUIRE_THROWS_AS(segment_rule(5), Error);
}

// ---- stiffness --------------------------------------------------------------

TEST_CASE("unit right triangle stiffness matches the hand computation",
          "[assembly]") {
    Mesh m;
    m.geom = {1.0, 0.5};
    m.vertices = {{0, 0}, {1, 0}, {0, 1}};
    m.on_boundary = {1, 1, 1};
    m.elements = {{{0, 1, 2}, 2}};
    m.mesh_size = std::sqrt(2.0);

    auto a = assemble_stiffness(m, {1, 1, 1, 1}, Form::sigma, DofMap::all(m));
    const double expected[3][3] = {
        {1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            REQUIRE_THAT(a.get(i, j), WithinAbs(expected[i][j], 1e-14));
}

TEST_CASE("stiffness kills constants and is symmetric", "[assembly]") {
    Mesh m = split_square(1, 2);
    auto dofs = DofMap::all(m);
    auto a = assemble_stiffness(m, {3.0, 0.5, 1, 1}, Form::sigma, dofs);
    REQUIRE(a.is_symmetric());
    auto ones = std::vector<double>(4, 1.0);
    for (double v : a.multiply(ones)) REQUIRE_THAT(v, WithinAbs(0.0, 1e-14));
}

TEST_CASE("stiffness is additive over the subdomain coefficients",
          "[assembly]") {
    Mesh m = split_square(1, 2);
    auto dofs = DofMap::all(m);
    auto both = assemble_stiffness(m, {2.0, 3.0, 1, 1}, Form::sigma, dofs);
    auto inner = assemble_stiffness(m, {1.0, 0.0, 1, 1}, Form::sigma, dofs);
    auto outer = assemble_stiffness(m, {0.0, 1.0, 1, 1}, Form::sigma, dofs);
    auto sum = add_scaled(inner, outer, 3.0 / 2.0); // (A1 + 1.5 A2)
    for (std::size_t k = 0; k < both.val.size(); ++k)
        REQUIRE_THAT(both.val[k], WithinAbs(2.0 * sum.val[k], 1e-14));
}

TEST_CASE("the two capacitance forms read their own coefficient pair",
          "[assembly]") {
    Mesh m = split_square(1, 2);
    auto dofs = DofMap::all(m);
    auto a_sigma = assemble_stiffness(m, {2.0, 5.0, 7.0, 11.0}, Form::sigma, dofs);
    auto a_eps = assemble_stiffness(m, {2.0, 5.0, 7.0, 11.0}, Form::eps, dofs);
    auto ref_sigma = assemble_stiffness(m, {2.0, 5.0, 1, 1}, Form::sigma, dofs);
    auto ref_eps = assemble_stiffness(m, {7.0, 11.0, 1, 1}, Form::sigma, dofs);
    REQUIRE(max_abs_diff(a_sigma.val, ref_sigma.val) < 1e-14);
    REQUIRE(max_abs_diff(a_eps.val, ref_eps.val) < 1e-14);
}

// ---- loads ------------------------------------------------------------------

TEST_CASE("constant load integrates to the domain area", "[assembly]") {
    Mesh m = split_square();
    auto f = assemble_load(m, [](Vec2, int) { return 1.0; }, DofMap::all(m));
    double total = 0.0;
    for (double v : f) total += v;
    REQUIRE_THAT(total, WithinAbs(4.0, 1e-13));
    // each vertex collects one third of its adjacent element areas
    REQUIRE_THAT(f[0], WithinAbs(4.0 / 3.0, 1e-13)); // both triangles
    REQUIRE_THAT(f[1], WithinAbs(2.0 / 3.0, 1e-13));
    REQUIRE_THAT(f[2], WithinAbs(4.0 / 3.0, 1e-13));
    REQUIRE_THAT(f[3], WithinAbs(2.0 / 3.0, 1e-13));
}

TEST_CASE("hat-weighted load reproduces the analytic mass column",
          "[assembly]") {
    Mesh m = split_square();
    // P1 hat of vertex 0 evaluated through barycentric coordinates
    auto hat0 = [&m](Vec2 p, int) {
        bool lower = p.y <= p.x; // which side of the diagonal (0,2)
        const auto& el = m.elements[lower ? 0 : 1];
        Vec2 p0 = m.vertices[el.v[0]], p1 = m.vertices[el.v[1]],
             p2 = m.vertices[el.v[2]];
        double full = detail::signed_area(p0, p1, p2);
        return detail::signed_area(p, p1, p2) / full; // vertex 0 is el.v[0]
    };
    auto f = assemble_load(m, hat0, DofMap::all(m), triangle_rule(2));
    // per triangle of area A: diag A/6, off-diag A/12; both have A = 2
    REQUIRE_THAT(f[0], WithinAbs(2.0 / 3.0, 1e-14));
    REQUIRE_THAT(f[1], WithinAbs(1.0 / 6.0, 1e-14));
    REQUIRE_THAT(f[2], WithinAbs(1.0 / 3.0, 1e-14));
    REQUIRE_THAT(f[3], WithinAbs(1.0 / 6.0, 1e-14));
}

// ---- interface line integrals -----------------------------------------------

TEST_CASE("interface flux of a unit density sums to the chord length",
          "[assembly]") {
    Mesh m = generate_mesh({1.0, 0.5}, 16);
    auto dofs = DofMap::all(m);
    auto f = assemble_interface_flux(m, [](Vec2) { return 1.0; }, dofs);
    double total = 0.0;
    for (double v : f) total += v;
    double chords = 0.0;
    for (const auto& e : m.interface_edges)
        chords += norm(m.vertices[e[0]] - m.vertices[e[1]]);
    REQUIRE_THAT(total, WithinRel(chords, 1e-13));
    REQUIRE(std::abs(chords - 2 * M_PI * 0.5) < 0.05); // inscribed polygon
}

TEST_CASE("interface flux is quadrature-rule independent for smooth data",
          "[assembly]") {
    Mesh m = generate_mesh({1.0, 0.5}, 8);
    auto dofs = DofMap::all(m);
    auto g = [](Vec2 p) { return p.x * p.x + p.y; };
    auto f2 = assemble_interface_flux(m, g, dofs, segment_rule(2));
    auto f4 = assemble_interface_flux(m, g, dofs, segment_rule(4));
    REQUIRE(max_abs_diff(f2, f4) < 1e-14);
}

TEST_CASE("interface flux requires interface edges", "[assembly]") {
    Mesh m = split_square();
    REQUIRE_THROWS_AS(
        assemble_interface_flux(m, [](Vec2) { return 1.0; }, DofMap::all(m)),
        Error);
}

// ---- sparse container -------------------------------------------------------

TEST_CASE("sparse pattern construction and access", "[sparse]") {
    auto a = SparseMatrix::from_pairs(4, {{0, 1}, {2, 3}, {1, 0}});
    REQUIRE(a.n == 4);
    // diagonal always present, both orientations inserted, duplicates merged
    REQUIRE(a.row_ptr == std::vector<int>{0, 2, 4, 6, 8});
    a.at(0, 1) = 2.5;
    a.at(1, 0) = 2.5;
    a.at(0, 0) = 1.0;
    REQUIRE(a.get(0, 1) == 2.5);
    REQUIRE(a.get(0, 3) == 0.0); // outside the pattern
    REQUIRE_THROWS_AS(a.at(0, 3), Error);
    REQUIRE(a.is_symmetric());
    a.at(1, 0) = -2.5;
    REQUIRE_FALSE(a.is_symmetric());
}

TEST_CASE("sparse multiply and add_scaled match hand results", "[sparse]") {
    auto a = SparseMatrix::from_pairs(3, {{0, 1}, {1, 2}});
    a.at(0, 0) = 2;
    a.at(0, 1) = 1;
    a.at(1, 0) = 1;
    a.at(1, 1) = 3;
    a.at(1, 2) = -1;
    a.at(2, 1) = -1;
    a.at(2, 2) = 4;
    auto y = a.multiply({1.0, 2.0, 3.0});
    REQUIRE_THAT(y[0], WithinAbs(4.0, 1e-15));
    REQUIRE_THAT(y[1], WithinAbs(4.0, 1e-15));
    REQUIRE_THAT(y[2], WithinAbs(10.0, 1e-15));

    auto b = SparseMatrix::from_pairs(3, {{0, 1}, {1, 2}});
    b.at(0, 1) = 6;
    b.at(1, 0) = 6;
    b.at(1, 1) = 2;
    auto c = add_scaled(a, b, 0.5);
    REQUIRE(c.get(0, 0) == 2.0);
    REQUIRE(c.get(0, 1) == 4.0);
    REQUIRE(c.get(1, 0) == 4.0);
    REQUIRE(c.get(1, 1) == 4.0);
    REQUIRE(c.get(1, 2) == -1.0);

    // the step operator combination insists on a shared pattern
    auto other = SparseMatrix::from_pairs(3, {{0, 2}});
    REQUIRE_THROWS_AS(add_scaled(a, other, 1.0), Error);

    REQUIRE_THAT(bilinear(a, {1, 0, 0}, {0, 1, 0}), WithinAbs(1.0, 1e-15));
    REQUIRE_THROWS_AS(a.multiply(std::vector<double>(2, 0.0)), Error);
}

// ---- dirichlet lifting ------------------------------------------------------

TEST_CASE("dirichlet lifting reproduces linear boundary data exactly",
          "[assembly]") {
    Mesh m = lattice_mesh(2);
    auto dofs = DofMap::interior(m);
    REQUIRE(dofs.n_dofs == 1); // single interior vertex at the origin

    auto g = [](Vec2 p) { return 2 * p.x - p.y + 0.25; };
    std::vector<double> bvals(m.vertices.size(), 0.0);
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        if (m.on_boundary[v]) bvals[v] = g(m.vertices[v]);

    std::vector<double> rhs(dofs.n_dofs, 0.0);
    apply_dirichlet(m, {1, 1, 1, 1}, Form::sigma, dofs, bvals, rhs);
    auto a = assemble_stiffness(m, {1, 1, 1, 1}, Form::sigma, dofs);
    auto u = cg_solve(a, rhs).x;
    // a linear function is reproduced by the P1 space, so the interior
    // unknown must take its nodal value
    REQUIRE_THAT(u[0], WithinAbs(g({0, 0}), 1e-12));

    REQUIRE_THROWS_AS(
        boundary_coupling(m, {1, 1, 1, 1}, Form::sigma, dofs,
                          std::vector<double>(3, 0.0)),
        Error);
}

// ---- error norms ------------------------------------------------------------

TEST_CASE("error norms vanish for reproduced linears", "[assembly]") {
    Mesh m = lattice_mesh(4);
    std::vector<double> vals(m.vertices.size());
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        vals[v] = 2 * m.vertices[v].x + 3 * m.vertices[v].y - 1;
    auto en = error_norms(
        m, vals, [](Vec2 p, int) { return 2 * p.x + 3 * p.y - 1; },
        [](Vec2, int) { return Vec2{2, 3}; });
    REQUIRE_THAT(en.l2, WithinAbs(0.0, 1e-13));
    REQUIRE_THAT(en.h1, WithinAbs(0.0, 1e-13));
}

TEST_CASE("interpolation error of a smooth function refines at optimal order",
          "[assembly]") {
    auto u = [](Vec2 p, int) { return p.x * p.x * p.y + std::sin(p.y); };
    auto grad = [](Vec2 p, int) {
        return Vec2{2 * p.x * p.y, p.x * p.x + std::cos(p.y)};
    };
    double l2_prev = 0.0, h1_prev = 0.0;
    for (int n : {8, 16, 32}) {
        Mesh m = lattice_mesh(n);
        std::vector<double> vals(m.vertices.size());
        for (std::size_t v = 0; v < m.vertices.size(); ++v)
            vals[v] = u(m.vertices[v], 2);
        auto en = error_norms(m, vals, u, grad);
        if (n > 8) {
            REQUIRE(l2_prev / en.l2 > 3.6);
            REQUIRE(l2_prev / en.l2 < 4.4);
            REQUIRE(h1_prev / en.h1 > 1.8);
            REQUIRE(h1_prev / en.h1 < 2.2);
        }
        l2_prev = en.l2;
        h1_prev = en.h1;
    }
}
