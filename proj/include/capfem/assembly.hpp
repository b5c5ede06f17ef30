#pragma once

/// @file assembly.hpp
/// @brief P1 finite element assembly on interface-fitted meshes: the sigma and
///        eps stiffness forms, load vectors, interface line integrals,
///        Dirichlet elimination by lifting, and error norms.
///
/// Both stiffness forms integrate with the piecewise constant coefficient of
/// the element's subdomain tag, i.e. over the polygonal subdomains rather
/// than the true circular ones.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "capfem/error.hpp"
#include "capfem/geometry.hpp"
#include "capfem/mesh.hpp"
#include "capfem/quadrature.hpp"
#include "capfem/sparse.hpp"

namespace capfem {

/// Piecewise constant material data: sigma >= 0 (conductive), eps > 0
/// (capacitive), one value per subdomain tag.
struct CoefficientField {
    double sigma1 = 1.0, sigma2 = 1.0;
    double eps1 = 1.0, eps2 = 1.0;

    void validate() const {
        if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0))
            throw Error(ErrorKind::invalid_argument,
                        "coefficients: sigma must be nonnegative");
        if (!(eps1 > 0.0) || !(eps2 > 0.0))
            throw Error(ErrorKind::invalid_argument,
                        "coefficients: eps must be positive");
    }
    double sigma(int tag) const { return tag == 1 ? sigma1 : sigma2; }
    double eps(int tag) const { return tag == 1 ? eps1 : eps2; }
};

enum class Form { sigma, eps };

/// Maps mesh vertices to unknown indices. Constrained vertices map to -1.
struct DofMap {
    std::vector<int> vertex_to_dof;
    std::vector<int> dof_to_vertex;
    int n_dofs = 0;

    static DofMap interior(const Mesh& mesh) {
        DofMap d;
        d.vertex_to_dof.assign(mesh.vertices.size(), -1);
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            if (!mesh.on_boundary[v]) {
                d.vertex_to_dof[v] = d.n_dofs++;
                d.dof_to_vertex.push_back(static_cast<int>(v));
            }
        return d;
    }

    static DofMap all(const Mesh& mesh) {
        DofMap d;
        d.n_dofs = static_cast<int>(mesh.vertices.size());
        d.vertex_to_dof.resize(d.n_dofs);
        d.dof_to_vertex.resize(d.n_dofs);
        for (int v = 0; v < d.n_dofs; ++v) {
            d.vertex_to_dof[v] = v;
            d.dof_to_vertex[v] = v;
        }
        return d;
    }
};

/// Spatial functions may depend on the subdomain (tag 1 or 2); scalar and
/// vector-valued variants.
using ScalarFn = std::function<double(Vec2, int)>;
using VectorFn = std::function<Vec2(Vec2, int)>;

namespace detail {

struct ElementGeometry {
    double area;
    // constant P1 basis gradients
    std::array<Vec2, 3> grad;
};

inline ElementGeometry element_geometry(Vec2 p0, Vec2 p1, Vec2 p2,
                                        long index = -1) {
    double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    if (!(std::abs(twice) > 0.0))
        throw Error(ErrorKind::invalid_argument,
                    "assembly: element " + std::to_string(index) +
                        " has zero area",
                    index);
    ElementGeometry g;
    g.area = 0.5 * std::abs(twice);
    double inv = 1.0 / twice;
    g.grad[0] = {(p1.y - p2.y) * inv, (p2.x - p1.x) * inv};
    g.grad[1] = {(p2.y - p0.y) * inv, (p0.x - p2.x) * inv};
    g.grad[2] = {(p0.y - p1.y) * inv, (p1.x - p0.x) * inv};
    return g;
}

} // namespace detail

/// 3x3 stiffness block coeff * area * grad_i . grad_j for one triangle.
/// Symmetric by construction (the upper triangle is mirrored).
inline std::array<std::array<double, 3>, 3>
element_stiffness(Vec2 p0, Vec2 p1, Vec2 p2, double coeff) {
    auto g = detail::element_geometry(p0, p1, p2);
    std::array<std::array<double, 3>, 3> k{};
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            k[i][j] = coeff * g.area * dot(g.grad[i], g.grad[j]);
            k[j][i] = k[i][j];
        }
    return k;
}

namespace detail {

inline SparseMatrix stiffness_pattern(const Mesh& mesh, const DofMap& dofs) {
    std::vector<std::array<int, 2>> pairs;
    pairs.reserve(mesh.elements.size() * 3);
    for (const auto& el : mesh.elements)
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b) {
                int i = dofs.vertex_to_dof[el.v[a]];
                int j = dofs.vertex_to_dof[el.v[b]];
                if (i >= 0 && j >= 0) pairs.push_back({i, j});
            }
    return SparseMatrix::from_pairs(dofs.n_dofs, pairs);
}

} // namespace detail

/// Stiffness matrix of the requested form restricted to the unconstrained
/// unknowns. Elements are visited in index order and local entries in a fixed
/// order, so reassembly is bit-reproducible and the result exactly symmetric.
inline SparseMatrix assemble_stiffness(const Mesh& mesh,
                                       const CoefficientField& coeff,
                                       Form form, const DofMap& dofs) {
    coeff.validate();
    SparseMatrix m = detail::stiffness_pattern(mesh, dofs);
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto& el = mesh.elements[e];
        double c = form == Form::sigma ? coeff.sigma(el.tag) : coeff.eps(el.tag);
        auto k = element_stiffness(mesh.vertices[el.v[0]],
                                   mesh.vertices[el.v[1]],
                                   mesh.vertices[el.v[2]], c);
        for (int a = 0; a < 3; ++a) {
            int i = dofs.vertex_to_dof[el.v[a]];
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b) {
                int j = dofs.vertex_to_dof[el.v[b]];
                if (j >= 0) m.at(i, j) += k[a][b];
            }
        }
    }
    return m;
}

/// Load vector (g, phi_i) over the tagged elements with the given rule
/// (degree 4 by default).
inline std::vector<double>
assemble_load(const Mesh& mesh, const ScalarFn& g, const DofMap& dofs,
              const TriangleRule& rule = triangle_rule(4)) {
    std::vector<double> f(dofs.n_dofs, 0.0);
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto& el = mesh.elements[e];
        Vec2 p0 = mesh.vertices[el.v[0]];
        Vec2 p1 = mesh.vertices[el.v[1]];
        Vec2 p2 = mesh.vertices[el.v[2]];
        auto geo = detail::element_geometry(p0, p1, p2, static_cast<long>(e));
        double jac = 2.0 * geo.area;
        for (const auto& q : rule.points) {
            double gv = g(map_point(q, p0, p1, p2), el.tag) * q.w * jac;
            const double bary[3] = {q.b0, q.b1, q.b2};
            for (int a = 0; a < 3; ++a) {
                int i = dofs.vertex_to_dof[el.v[a]];
                if (i >= 0) f[i] += gv * bary[a];
            }
        }
    }
    return f;
}

/// Line integral <gstar, phi_i> over the interface chords (3-point Gauss by
/// default). Errors when the mesh has no interface edges.
inline std::vector<double>
assemble_interface_flux(const Mesh& mesh, const std::function<double(Vec2)>& gstar,
                        const DofMap& dofs,
                        const SegmentRule& rule = segment_rule(3)) {
    if (mesh.interface_edges.empty())
        throw Error(ErrorKind::invalid_argument,
                    "assemble_interface_flux: mesh has no interface edges");
    std::vector<double> f(dofs.n_dofs, 0.0);
    for (const auto& edge : mesh.interface_edges) {
        Vec2 p = mesh.vertices[edge[0]];
        Vec2 q = mesh.vertices[edge[1]];
        double len = norm(q - p);
        for (const auto& s : rule.points) {
            Vec2 x = p + s.s * (q - p);
            double gv = gstar(x) * s.w * len;
            int i0 = dofs.vertex_to_dof[edge[0]];
            int i1 = dofs.vertex_to_dof[edge[1]];
            if (i0 >= 0) f[i0] += gv * (1.0 - s.s);
            if (i1 >= 0) f[i1] += gv * s.s;
        }
    }
    return f;
}

/// Action of the constrained-to-free coupling block: out_i = sum over
/// elements of k(i, b) * values[vertex b] for constrained b. `values` holds
/// one entry per mesh vertex (only constrained entries are read).
inline std::vector<double>
boundary_coupling(const Mesh& mesh, const CoefficientField& coeff, Form form,
                  const DofMap& dofs, const std::vector<double>& values) {
    if (values.size() != mesh.vertices.size())
        throw Error(ErrorKind::invalid_argument,
                    "boundary_coupling: values must have one entry per vertex");
    std::vector<double> out(dofs.n_dofs, 0.0);
    for (const auto& el : mesh.elements) {
        double c = form == Form::sigma ? coeff.sigma(el.tag) : coeff.eps(el.tag);
        auto k = element_stiffness(mesh.vertices[el.v[0]],
                                   mesh.vertices[el.v[1]],
                                   mesh.vertices[el.v[2]], c);
        for (int a = 0; a < 3; ++a) {
            int i = dofs.vertex_to_dof[el.v[a]];
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b)
                if (dofs.vertex_to_dof[el.v[b]] < 0)
                    out[i] += k[a][b] * values[el.v[b]];
        }
    }
    return out;
}

/// Eliminates Dirichlet values by lifting: subtracts the coupling with the
/// prescribed boundary values from the right-hand side of the reduced system.
inline void apply_dirichlet(const Mesh& mesh, const CoefficientField& coeff,
                            Form form, const DofMap& dofs,
                            const std::vector<double>& boundary_values,
                            std::vector<double>& rhs) {
    if (static_cast<int>(rhs.size()) != dofs.n_dofs)
        throw Error(ErrorKind::invalid_argument,
                    "apply_dirichlet: rhs size does not match the dof count");
    auto lift = boundary_coupling(mesh, coeff, form, dofs, boundary_values);
    for (int i = 0; i < dofs.n_dofs; ++i) rhs[i] -= lift[i];
}

/// Expands a solution vector to per-vertex values, filling constrained
/// vertices from the given boundary function (zero if absent).
inline std::vector<double>
expand_to_vertices(const Mesh& mesh, const DofMap& dofs,
                   const std::vector<double>& u,
                   const std::function<double(Vec2)>& boundary = {}) {
    if (static_cast<int>(u.size()) != dofs.n_dofs)
        throw Error(ErrorKind::invalid_argument,
                    "expand_to_vertices: vector size does not match dofs");
    std::vector<double> out(mesh.vertices.size(), 0.0);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        int i = dofs.vertex_to_dof[v];
        if (i >= 0)
            out[v] = u[i];
        else if (boundary)
            out[v] = boundary(mesh.vertices[v]);
    }
    return out;
}

struct ErrorNorms {
    double l2 = 0.0;
    double h1 = 0.0; // gradient seminorm
};

/// L2 and H1-seminorm distance between the P1 field given by per-vertex
/// values and an exact solution evaluated branch-wise via the element tag.
inline ErrorNorms error_norms(const Mesh& mesh,
                              const std::vector<double>& vertex_values,
                              const ScalarFn& u_exact, const VectorFn& grad_exact,
                              const TriangleRule& rule = triangle_rule(4)) {
    if (vertex_values.size() != mesh.vertices.size())
        throw Error(ErrorKind::invalid_argument,
                    "error_norms: values must have one entry per vertex");
    double l2 = 0.0, h1 = 0.0;
    for (const auto& el : mesh.elements) {
        Vec2 p0 = mesh.vertices[el.v[0]];
        Vec2 p1 = mesh.vertices[el.v[1]];
        Vec2 p2 = mesh.vertices[el.v[2]];
        auto geo = detail::element_geometry(p0, p1, p2);
        double jac = 2.0 * geo.area;
        const double w0 = vertex_values[el.v[0]];
        const double w1 = vertex_values[el.v[1]];
        const double w2 = vertex_values[el.v[2]];
        Vec2 gh = w0 * geo.grad[0] + w1 * geo.grad[1] + w2 * geo.grad[2];
        for (const auto& q : rule.points) {
            Vec2 x = map_point(q, p0, p1, p2);
            double uh = q.b0 * w0 + q.b1 * w1 + q.b2 * w2;
            double du = uh - (u_exact ? u_exact(x, el.tag) : 0.0);
            l2 += q.w * jac * du * du;
            if (grad_exact) {
                Vec2 dg = gh - grad_exact(x, el.tag);
                h1 += q.w * jac * dot(dg, dg);
            } else {
                h1 += q.w * jac * dot(gh, gh);
            }
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

} // namespace capfem
