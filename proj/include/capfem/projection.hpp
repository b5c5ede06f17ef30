#pragma once

/// @file projection.hpp
/// @brief The weighted elliptic projection used for the initial state, nodal
///        interpolation as its fallback, and a residual probe of the
///        projection identity.
///
/// The projection q of u0 solves, over the unconstrained unknowns,
///   A_eps q = (fstar, phi_i) + <gstar, phi_i>_Gamma - coupling(boundary),
/// with fstar = -eps_i lap(u0) per subdomain and gstar the jump of the eps
/// flux across the interface. With that data the discrete eps-form of q
/// against any interior test function reproduces the continuous eps-form of
/// u0, up to quadrature and interface-chord error.

#include <cmath>
#include <functional>
#include <vector>

#include "capfem/assembly.hpp"
#include "capfem/error.hpp"
#include "capfem/mesh.hpp"
#include "capfem/quadrature.hpp"
#include "capfem/solver.hpp"

namespace capfem {

/// Initial state description. `u0` is required; `fstar`/`gstar` enable the
/// elliptic projection (without `fstar` only interpolation is possible);
/// `grad0` is needed by the residual probe; `boundary` is the trace of u0 on
/// the square (zero when absent).
struct InitialDatum {
    ScalarFn u0;
    ScalarFn fstar;
    std::function<double(Vec2)> gstar;
    VectorFn grad0;
    std::function<double(Vec2)> boundary;
};

/// Vertex interpolation restricted to the unconstrained unknowns. The side
/// passed to u0 at a vertex is its circle side (either branch is valid on the
/// interface itself, where the solution is continuous).
inline std::vector<double> nodal_interpolate(const Mesh& mesh,
                                             const DofMap& dofs,
                                             const ScalarFn& u0) {
    if (!u0)
        throw Error(ErrorKind::invalid_argument,
                    "nodal_interpolate: missing function");
    const double r0 = mesh.geom.interface_radius;
    std::vector<double> out(dofs.n_dofs, 0.0);
    for (int i = 0; i < dofs.n_dofs; ++i) {
        Vec2 p = mesh.vertices[dofs.dof_to_vertex[i]];
        out[i] = u0(p, norm(p) < r0 ? 1 : 2);
    }
    return out;
}

/// Elliptic projection of the initial datum (see the file brief). Requires
/// `fstar`; the interface term is skipped when `gstar` is absent or the mesh
/// has no interface edges.
inline std::vector<double> qh_project(const Mesh& mesh,
                                      const CoefficientField& coeff,
                                      const DofMap& dofs,
                                      const InitialDatum& datum,
                                      const SolverConfig& cfg = {}) {
    if (!datum.u0)
        throw Error(ErrorKind::invalid_argument, "qh_project: missing u0");
    if (!datum.fstar)
        throw Error(ErrorKind::invalid_argument,
                    "qh_project: projection data fstar is unavailable; use "
                    "nodal_interpolate instead");
    auto a_eps = assemble_stiffness(mesh, coeff, Form::eps, dofs);
    auto rhs = assemble_load(mesh, datum.fstar, dofs);
    if (datum.gstar && !mesh.interface_edges.empty()) {
        auto flux = assemble_interface_flux(mesh, datum.gstar, dofs);
        for (int i = 0; i < dofs.n_dofs; ++i) rhs[i] += flux[i];
    }
    if (datum.boundary) {
        std::vector<double> bvals(mesh.vertices.size(), 0.0);
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            if (dofs.vertex_to_dof[v] < 0)
                bvals[v] = datum.boundary(mesh.vertices[v]);
        apply_dirichlet(mesh, coeff, Form::eps, dofs, bvals, rhs);
    }
    return cg_solve(a_eps, rhs, cfg).x;
}

namespace detail {

// Integrates eps(x) grad_u0(x) . grad_phi_i over an element against the TRUE
// circular subdomains: elements whose span brackets the circle are split
// recursively and leaves classified by centroid side.
struct TrueFormContext {
    const Mesh& mesh;
    const CoefficientField& coeff;
    const VectorFn& grad0;
    const TriangleRule& rule;
    double r0;
};

inline bool triangle_meets_circle(Vec2 p0, Vec2 p1, Vec2 p2, double r0) {
    // min/max distance from the origin over the closed triangle
    auto seg_min = [](Vec2 a, Vec2 b) {
        Vec2 d = b - a;
        double len2 = dot(d, d);
        double t = len2 > 0.0 ? std::clamp(-dot(a, d) / len2, 0.0, 1.0) : 0.0;
        return norm(a + t * d);
    };
    double rmax = std::max({norm(p0), norm(p1), norm(p2)});
    double rmin = std::min({seg_min(p0, p1), seg_min(p1, p2), seg_min(p2, p0)});
    // origin inside the triangle?
    double s0 = signed_area(p0, p1, {0, 0});
    double s1 = signed_area(p1, p2, {0, 0});
    double s2 = signed_area(p2, p0, {0, 0});
    if ((s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0))
        rmin = 0.0;
    return rmin <= r0 && r0 <= rmax;
}

inline void accumulate_true_form(const TrueFormContext& ctx, Vec2 p0, Vec2 p1,
                                 Vec2 p2, const std::array<Vec2, 3>& basis_grad,
                                 const std::array<int, 3>& rows,
                                 std::vector<double>& out, int depth) {
    if (depth > 0 && triangle_meets_circle(p0, p1, p2, ctx.r0)) {
        Vec2 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m20 = 0.5 * (p2 + p0);
        accumulate_true_form(ctx, p0, m01, m20, basis_grad, rows, out, depth - 1);
        accumulate_true_form(ctx, m01, p1, m12, basis_grad, rows, out, depth - 1);
        accumulate_true_form(ctx, m20, m12, p2, basis_grad, rows, out, depth - 1);
        accumulate_true_form(ctx, m01, m12, m20, basis_grad, rows, out, depth - 1);
        return;
    }
    double area = std::abs(signed_area(p0, p1, p2));
    if (area == 0.0) return;
    Vec2 c = (1.0 / 3.0) * (p0 + p1 + p2);
    int side = norm(c) < ctx.r0 ? 1 : 2;
    double eps = ctx.coeff.eps(side);
    double jac = 2.0 * area;
    for (const auto& q : ctx.rule.points) {
        Vec2 x = map_point(q, p0, p1, p2);
        Vec2 g = ctx.grad0(x, side);
        double w = q.w * jac * eps;
        for (int a = 0; a < 3; ++a)
            if (rows[a] >= 0) out[rows[a]] += w * dot(g, basis_grad[a]);
    }
}

} // namespace detail

/// Max over interior basis functions of |(true eps-form of u0) - (discrete
/// eps-form of q)|. The true form integrates over the circular subdomains
/// with a degree-6 rule and recursive subdivision near the circle, so the
/// returned residual reflects the interface-chord geometry error.
inline double galerkin_orthogonality_residual(const Mesh& mesh,
                                              const CoefficientField& coeff,
                                              const DofMap& dofs,
                                              const InitialDatum& datum,
                                              const std::vector<double>& q,
                                              int subdivision_depth = 5) {
    if (!datum.grad0)
        throw Error(ErrorKind::invalid_argument,
                    "galerkin_orthogonality_residual: missing grad0");
    if (static_cast<int>(q.size()) != dofs.n_dofs)
        throw Error(ErrorKind::invalid_argument,
                    "galerkin_orthogonality_residual: projection size "
                    "does not match dofs");
    // discrete side: A_eps q (+ coupling with the boundary trace of u0)
    auto a_eps = assemble_stiffness(mesh, coeff, Form::eps, dofs);
    auto discrete = a_eps.multiply(q);
    if (datum.boundary) {
        std::vector<double> bvals(mesh.vertices.size(), 0.0);
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            if (dofs.vertex_to_dof[v] < 0)
                bvals[v] = datum.boundary(mesh.vertices[v]);
        auto lift = boundary_coupling(mesh, coeff, Form::eps, dofs, bvals);
        for (int i = 0; i < dofs.n_dofs; ++i) discrete[i] += lift[i];
    }
    // true side
    std::vector<double> truth(dofs.n_dofs, 0.0);
    detail::TrueFormContext ctx{mesh, coeff, datum.grad0, triangle_rule(6),
                                mesh.geom.interface_radius};
    for (const auto& el : mesh.elements) {
        Vec2 p0 = mesh.vertices[el.v[0]];
        Vec2 p1 = mesh.vertices[el.v[1]];
        Vec2 p2 = mesh.vertices[el.v[2]];
        auto geo = detail::element_geometry(p0, p1, p2);
        std::array<int, 3> rows = {dofs.vertex_to_dof[el.v[0]],
                                   dofs.vertex_to_dof[el.v[1]],
                                   dofs.vertex_to_dof[el.v[2]]};
        detail::accumulate_true_form(ctx, p0, p1, p2, geo.grad, rows, truth,
                                     subdivision_depth);
    }
    double worst = 0.0;
    for (int i = 0; i < dofs.n_dofs; ++i)
        worst = std::max(worst, std::abs(truth[i] - discrete[i]));
    return worst;
}

} // namespace capfem
