#pragma once

/// @file mesh.hpp
/// @brief Interface-fitted triangulations of the square with a circular
///        interface: generation by snapping, validation, resolution measure,
///        and the `cfm-mesh 1` text format.
///
/// Generation starts from a uniform right-triangle grid whose diagonals are
/// mirrored per quadrant (aligned with the radial direction), snaps the
/// endpoints of circle-crossing edges radially onto |x| = r0, then runs a
/// quality-guarded smoothing pass. The result satisfies:
///   - the elements tile the square exactly (cover condition),
///   - neighbors share full edges, no hanging nodes (conformity),
///   - no element has vertices strictly on both sides of the circle,
///   - every edge separating the two subdomain tags is a chord of the circle.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capfem/error.hpp"
#include "capfem/geometry.hpp"

namespace capfem {

struct Mesh {
    struct Element {
        std::array<int, 3> v; // counterclockwise vertex indices
        int tag;              // 1 = inside the circle, 2 = outside
    };

    GeometrySpec geom;
    std::vector<Vec2> vertices;
    std::vector<std::uint8_t> on_boundary;            // per vertex
    std::vector<Element> elements;
    std::vector<std::array<int, 2>> interface_edges;  // sorted vertex pairs
    double mesh_size = 0.0;                           // longest edge
};

namespace detail {

inline double signed_area(Vec2 p0, Vec2 p1, Vec2 p2) {
    return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

inline double min_angle_deg(Vec2 p0, Vec2 p1, Vec2 p2) {
    const Vec2 p[3] = {p0, p1, p2};
    double best = 180.0;
    for (int k = 0; k < 3; ++k) {
        Vec2 u = p[(k + 1) % 3] - p[k];
        Vec2 v = p[(k + 2) % 3] - p[k];
        double nu = norm(u), nv = norm(v);
        if (nu == 0.0 || nv == 0.0) return 0.0;
        double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
        best = std::min(best, std::acos(c) * 180.0 / M_PI);
    }
    return best;
}

// side of the circle with a relative band of 1e-12 * r0 treated as "on"
inline int circle_side(Vec2 p, double r0) {
    const double tol = 1e-12 * r0;
    double r = norm(p);
    if (r < r0 - tol) return -1;
    if (r > r0 + tol) return +1;
    return 0;
}

inline std::array<int, 2> sorted_edge(int a, int b) {
    return {std::min(a, b), std::max(a, b)};
}

} // namespace detail

/// Per-condition validation outcome. `ok` is the conjunction of all checks;
/// `violations` carries one message per failed check with element indices.
struct MeshReport {
    bool cover = false;        // element areas sum to the square's area
    bool conformity = false;   // every interior edge shared by exactly 2 elements
    bool vertex_sides = false; // no element has vertices strictly on both sides
    bool orientation = false;  // all elements counterclockwise
    bool quality = false;      // min angle above threshold
    bool interface_fit = false;// tag-boundary edges == listed chords on the circle
    double min_angle = 0.0;
    double area_error = 0.0;   // relative
    std::vector<std::string> violations;

    bool ok() const {
        return cover && conformity && vertex_sides && orientation && quality &&
               interface_fit;
    }
};

inline MeshReport validate_mesh(const Mesh& mesh, double min_angle_deg = 15.0) {
    MeshReport rep;
    const double a = mesh.geom.half_width;
    const double r0 = mesh.geom.interface_radius;
    const double tol = 1e-12 * std::max(r0, 1e-300);

    // cover + orientation + quality
    double area_sum = 0.0;
    rep.orientation = true;
    rep.min_angle = 180.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto& el = mesh.elements[e];
        Vec2 p0 = mesh.vertices[el.v[0]];
        Vec2 p1 = mesh.vertices[el.v[1]];
        Vec2 p2 = mesh.vertices[el.v[2]];
        double ar = detail::signed_area(p0, p1, p2);
        if (ar <= 0.0) {
            rep.orientation = false;
            rep.violations.push_back("element " + std::to_string(e) +
                                     ": nonpositive signed area");
        }
        area_sum += std::abs(ar);
        rep.min_angle = std::min(rep.min_angle, detail::min_angle_deg(p0, p1, p2));
    }
    rep.area_error = std::abs(area_sum - 4.0 * a * a) / (4.0 * a * a);
    rep.cover = rep.area_error <= 1e-10;
    if (!rep.cover)
        rep.violations.push_back("cover: relative area defect " +
                                 std::to_string(rep.area_error));
    rep.quality = rep.min_angle >= min_angle_deg;
    if (!rep.quality)
        rep.violations.push_back("quality: min angle " +
                                 std::to_string(rep.min_angle) + " deg below " +
                                 std::to_string(min_angle_deg));

    // conformity: every edge belongs to 1 or 2 elements; single-owner edges
    // must lie on the square's boundary
    std::map<std::array<int, 2>, int> edge_count;
    for (const auto& el : mesh.elements)
        for (int k = 0; k < 3; ++k)
            edge_count[detail::sorted_edge(el.v[k], el.v[(k + 1) % 3])]++;
    rep.conformity = true;
    for (const auto& [edge, count] : edge_count) {
        if (count == 2) continue;
        bool on_square = false;
        if (count == 1) {
            Vec2 p = mesh.vertices[edge[0]], q = mesh.vertices[edge[1]];
            double btol = 1e-12 * a;
            on_square = (std::abs(p.x - q.x) <= btol &&
                         std::abs(std::abs(p.x) - a) <= btol) ||
                        (std::abs(p.y - q.y) <= btol &&
                         std::abs(std::abs(p.y) - a) <= btol);
        }
        if (!on_square) {
            rep.conformity = false;
            rep.violations.push_back(
                "conformity: edge (" + std::to_string(edge[0]) + "," +
                std::to_string(edge[1]) + ") owned by " + std::to_string(count) +
                " element(s)");
        }
    }

    // vertex sides + tag consistency with the closed subdomains
    rep.vertex_sides = true;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto& el = mesh.elements[e];
        int inside = 0, outside = 0;
        for (int k = 0; k < 3; ++k) {
            int s = detail::circle_side(mesh.vertices[el.v[k]], r0);
            inside += (s < 0);
            outside += (s > 0);
        }
        bool bad = (inside > 0 && outside > 0) ||
                   (el.tag == 1 && outside > 0) || (el.tag == 2 && inside > 0);
        if (bad) {
            rep.vertex_sides = false;
            rep.violations.push_back("element " + std::to_string(e) +
                                     ": vertices straddle the interface circle");
        }
    }

    // interface edges: the listed chords must match the tag boundary exactly,
    // and both endpoints of each must lie on the circle
    std::set<std::array<int, 2>> tag_boundary;
    {
        std::map<std::array<int, 2>, std::array<int, 2>> owner_tags;
        for (const auto& el : mesh.elements)
            for (int k = 0; k < 3; ++k) {
                auto key = detail::sorted_edge(el.v[k], el.v[(k + 1) % 3]);
                auto it = owner_tags.find(key);
                if (it == owner_tags.end())
                    owner_tags[key] = {el.tag, 0};
                else
                    it->second[1] = el.tag;
            }
        for (const auto& [edge, tags] : owner_tags)
            if (tags[1] != 0 && tags[0] != tags[1]) tag_boundary.insert(edge);
    }
    std::set<std::array<int, 2>> listed(mesh.interface_edges.begin(),
                                        mesh.interface_edges.end());
    rep.interface_fit = listed == tag_boundary;
    if (!rep.interface_fit)
        rep.violations.push_back(
            "interface: listed edges do not match the tag boundary (" +
            std::to_string(listed.size()) + " listed, " +
            std::to_string(tag_boundary.size()) + " actual)");
    for (const auto& edge : listed)
        for (int v : edge)
            if (std::abs(norm(mesh.vertices[v]) - r0) > tol) {
                rep.interface_fit = false;
                rep.violations.push_back("interface: vertex " +
                                         std::to_string(v) +
                                         " is off the circle");
            }
    return rep;
}

/// Largest distance between the circle and its inscribed chord polygon:
/// max over interface edges of the sagitta r0 - sqrt(r0^2 - L^2/4).
inline double interface_resolution(const Mesh& mesh) {
    if (mesh.interface_edges.empty())
        throw Error(ErrorKind::invalid_argument,
                    "interface_resolution: mesh has no interface edges");
    const double r0 = mesh.geom.interface_radius;
    double lam = 0.0;
    for (const auto& edge : mesh.interface_edges) {
        double ell = norm(mesh.vertices[edge[0]] - mesh.vertices[edge[1]]);
        double half = 0.5 * ell;
        double s = r0 - std::sqrt(std::max(0.0, r0 * r0 - half * half));
        lam = std::max(lam, s);
    }
    return lam;
}

inline Mesh generate_mesh(const GeometrySpec& geom, int n,
                          double min_angle_threshold = 15.0) {
    geom.validate();
    if (n < 4)
        throw Error(ErrorKind::invalid_argument,
                    "generate_mesh: n must be at least 4, got " +
                        std::to_string(n));
    if (!(min_angle_threshold > 0.0) || !(min_angle_threshold < 60.0))
        throw Error(ErrorKind::invalid_argument,
                    "generate_mesh: min angle threshold must lie in (0, 60)");
    const double a = geom.half_width;
    const double r0 = geom.interface_radius;

    Mesh mesh;
    mesh.geom = geom;
    mesh.vertices.reserve((n + 1) * (n + 1));
    mesh.on_boundary.reserve((n + 1) * (n + 1));
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            mesh.vertices.push_back(
                {a * (2.0 * i / n - 1.0), a * (2.0 * j / n - 1.0)});
            mesh.on_boundary.push_back(i == 0 || i == n || j == 0 || j == n);
        }
    mesh.elements.reserve(2 * n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j);
            int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            double cx = a * (2.0 * (i + 0.5) / n - 1.0);
            double cy = a * (2.0 * (j + 0.5) / n - 1.0);
            if (cx * cy > 0.0) { // diagonal aligned with the radial direction
                mesh.elements.push_back({{v00, v10, v11}, 0});
                mesh.elements.push_back({{v00, v11, v01}, 0});
            } else {
                mesh.elements.push_back({{v00, v10, v01}, 0});
                mesh.elements.push_back({{v10, v11, v01}, 0});
            }
        }

    // fixed edge topology: undirected vertex pairs, and per-vertex stars
    std::vector<std::array<int, 2>> edges;
    {
        std::set<std::array<int, 2>> eset;
        for (const auto& el : mesh.elements)
            for (int k = 0; k < 3; ++k)
                eset.insert(detail::sorted_edge(el.v[k], el.v[(k + 1) % 3]));
        edges.assign(eset.begin(), eset.end());
    }
    std::vector<std::vector<int>> neighbors(mesh.vertices.size());
    for (const auto& e : edges) {
        neighbors[e[0]].push_back(e[1]);
        neighbors[e[1]].push_back(e[0]);
    }
    std::vector<std::vector<int>> star(mesh.vertices.size());
    for (std::size_t t = 0; t < mesh.elements.size(); ++t)
        for (int k = 0; k < 3; ++k)
            star[mesh.elements[t].v[k]].push_back(static_cast<int>(t));

    // snap endpoints of circle-crossing edges radially onto the circle
    const int max_sweeps = n + 8;
    bool settled = false;
    for (int sweep = 0; sweep < max_sweeps && !settled; ++sweep) {
        settled = true;
        for (const auto& e : edges) {
            int sp = detail::circle_side(mesh.vertices[e[0]], r0);
            int sq = detail::circle_side(mesh.vertices[e[1]], r0);
            if (sp * sq != -1) continue;
            settled = false;
            int pick = -1;
            double best = 0.0;
            for (int v : e) {
                if (mesh.on_boundary[v]) continue;
                double d = std::abs(norm(mesh.vertices[v]) - r0);
                if (pick < 0 || d < best) {
                    pick = v;
                    best = d;
                }
            }
            if (pick < 0)
                throw Error(ErrorKind::snap_failure,
                            "generate_mesh: a circle-crossing edge has both "
                            "endpoints on the square boundary; increase n");
            double r = norm(mesh.vertices[pick]);
            if (r < 1e-14 * a)
                throw Error(ErrorKind::snap_failure,
                            "generate_mesh: cannot project a vertex at the "
                            "origin onto the circle; increase n");
            mesh.vertices[pick] = (r0 / r) * mesh.vertices[pick];
        }
    }
    if (!settled)
        throw Error(ErrorKind::snap_failure,
                    "generate_mesh: snapping did not settle; increase n");
    for (auto& p : mesh.vertices) {
        double r = norm(p);
        if (r > 0.0 && std::abs(r - r0) <= 1e-12 * r0) p = (r0 / r) * p;
    }

    // quality-guarded smoothing; every accepted move keeps vertices on their
    // side of the circle (circle vertices move along the circle only)
    auto local_min_angle = [&](int v) {
        double m = 180.0;
        for (int t : star[v]) {
            const auto& el = mesh.elements[t];
            Vec2 p0 = mesh.vertices[el.v[0]];
            Vec2 p1 = mesh.vertices[el.v[1]];
            Vec2 p2 = mesh.vertices[el.v[2]];
            if (detail::signed_area(p0, p1, p2) <= 0.0) return -1.0;
            m = std::min(m, detail::min_angle_deg(p0, p1, p2));
        }
        return m;
    };
    for (int sweep = 0; sweep < 8; ++sweep) {
        int changed = 0;
        for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
            if (mesh.on_boundary[v]) continue;
            Vec2 old = mesh.vertices[v];
            Vec2 cand;
            if (detail::circle_side(old, r0) == 0) {
                int ring[2] = {-1, -1};
                int found = 0;
                for (int w : neighbors[v])
                    if (detail::circle_side(mesh.vertices[w], r0) == 0) {
                        if (found < 2) ring[found] = w;
                        ++found;
                    }
                if (found != 2) continue;
                double av = std::atan2(old.y, old.x);
                double d1 = std::remainder(
                    std::atan2(mesh.vertices[ring[0]].y,
                               mesh.vertices[ring[0]].x) - av, 2.0 * M_PI);
                double d2 = std::remainder(
                    std::atan2(mesh.vertices[ring[1]].y,
                               mesh.vertices[ring[1]].x) - av, 2.0 * M_PI);
                double am = av + 0.5 * (d1 + d2);
                cand = {r0 * std::cos(am), r0 * std::sin(am)};
            } else {
                Vec2 sum{0.0, 0.0};
                for (int w : neighbors[v]) sum = sum + mesh.vertices[w];
                cand = (1.0 / neighbors[v].size()) * sum;
                if (detail::circle_side(cand, r0) !=
                    detail::circle_side(old, r0))
                    continue;
            }
            double before = local_min_angle(v);
            mesh.vertices[v] = cand;
            double after = local_min_angle(v);
            if (after <= before)
                mesh.vertices[v] = old;
            else
                ++changed;
        }
        if (changed == 0) break;
    }

    // orientation, tags, quality gate
    for (std::size_t t = 0; t < mesh.elements.size(); ++t) {
        auto& el = mesh.elements[t];
        Vec2 p0 = mesh.vertices[el.v[0]];
        Vec2 p1 = mesh.vertices[el.v[1]];
        Vec2 p2 = mesh.vertices[el.v[2]];
        double ar = detail::signed_area(p0, p1, p2);
        if (ar < 0.0) {
            std::swap(el.v[1], el.v[2]);
            std::swap(p1, p2);
            ar = -ar;
        }
        if (ar == 0.0)
            throw Error(ErrorKind::mesh_quality,
                        "generate_mesh: element " + std::to_string(t) +
                            " is degenerate after snapping",
                        static_cast<long>(t));
        Vec2 c = (1.0 / 3.0) * (p0 + p1 + p2);
        el.tag = norm(c) < r0 ? 1 : 2;
        double ang = detail::min_angle_deg(p0, p1, p2);
        if (ang < min_angle_threshold)
            throw Error(ErrorKind::mesh_quality,
                        "generate_mesh: element " + std::to_string(t) +
                            " has min angle " + std::to_string(ang) +
                            " deg, below the threshold " +
                            std::to_string(min_angle_threshold),
                        static_cast<long>(t));
    }

    // interface edges = tag-boundary edges; endpoints must sit on the circle
    {
        std::map<std::array<int, 2>, std::array<int, 2>> owner_tags;
        for (const auto& el : mesh.elements)
            for (int k = 0; k < 3; ++k) {
                auto key = detail::sorted_edge(el.v[k], el.v[(k + 1) % 3]);
                auto it = owner_tags.find(key);
                if (it == owner_tags.end())
                    owner_tags[key] = {el.tag, 0};
                else
                    it->second[1] = el.tag;
            }
        for (const auto& [edge, tags] : owner_tags)
            if (tags[1] != 0 && tags[0] != tags[1]) {
                for (int v : edge)
                    if (std::abs(norm(mesh.vertices[v]) - r0) > 1e-12 * r0)
                        throw Error(ErrorKind::conformity,
                                    "generate_mesh: tag boundary vertex " +
                                        std::to_string(v) +
                                        " is off the circle",
                                    v);
                mesh.interface_edges.push_back(edge);
            }
    }

    mesh.mesh_size = 0.0;
    for (const auto& el : mesh.elements)
        for (int k = 0; k < 3; ++k)
            mesh.mesh_size = std::max(
                mesh.mesh_size, norm(mesh.vertices[el.v[k]] -
                                     mesh.vertices[el.v[(k + 1) % 3]]));
    return mesh;
}

// ---------------------------------------------------------------------------
// cfm-mesh 1 text format
// ---------------------------------------------------------------------------

inline void write_mesh(const Mesh& mesh, std::ostream& out) {
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "cfm-mesh 1\n";
    out << "V " << mesh.vertices.size() << "\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        out << i << " " << fmt(mesh.vertices[i].x) << " "
            << fmt(mesh.vertices[i].y) << " " << int(mesh.on_boundary[i])
            << "\n";
    out << "E " << mesh.elements.size() << "\n";
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
        out << e << " " << mesh.elements[e].v[0] << " " << mesh.elements[e].v[1]
            << " " << mesh.elements[e].v[2] << " " << mesh.elements[e].tag
            << "\n";
    out << "G " << mesh.interface_edges.size() << "\n";
    for (const auto& edge : mesh.interface_edges)
        out << edge[0] << " " << edge[1] << "\n";
}

inline Mesh read_mesh(std::istream& in) {
    Mesh mesh;
    std::string line;
    long lineno = 0;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line))
            throw Error(ErrorKind::parse, "mesh file: unexpected end of file",
                        lineno);
        ++lineno;
        return line;
    };
    if (next_line() != "cfm-mesh 1")
        throw Error(ErrorKind::parse,
                    "mesh file: missing 'cfm-mesh 1' header line", lineno);

    auto read_count = [&](char section) {
        std::istringstream ss(next_line());
        std::string tag;
        long count = -1;
        if (!(ss >> tag >> count) || tag != std::string(1, section) || count < 0)
            throw Error(ErrorKind::parse,
                        std::string("mesh file: expected '") + section +
                            " <count>' line",
                        lineno);
        return count;
    };

    long nv = read_count('V');
    mesh.vertices.resize(nv);
    mesh.on_boundary.resize(nv);
    for (long i = 0; i < nv; ++i) {
        std::istringstream ss(next_line());
        long id;
        double x, y;
        int bflag;
        if (!(ss >> id >> x >> y >> bflag) || id != i || (bflag & ~1))
            throw Error(ErrorKind::parse,
                        "mesh file: malformed vertex line (ids must be "
                        "consecutive from 0, flag 0/1)",
                        lineno);
        mesh.vertices[i] = {x, y};
        mesh.on_boundary[i] = static_cast<std::uint8_t>(bflag);
    }

    long ne = read_count('E');
    mesh.elements.resize(ne);
    for (long e = 0; e < ne; ++e) {
        std::istringstream ss(next_line());
        long id;
        int v0, v1, v2, tag;
        if (!(ss >> id >> v0 >> v1 >> v2 >> tag) || id != e ||
            (tag != 1 && tag != 2))
            throw Error(ErrorKind::parse,
                        "mesh file: malformed element line (ids must be "
                        "consecutive from 0, tag 1/2)",
                        lineno);
        for (int v : {v0, v1, v2})
            if (v < 0 || v >= nv)
                throw Error(ErrorKind::parse,
                            "mesh file: element vertex index out of range",
                            lineno);
        mesh.elements[e] = {{v0, v1, v2}, tag};
    }

    long ng = read_count('G');
    mesh.interface_edges.resize(ng);
    for (long g = 0; g < ng; ++g) {
        std::istringstream ss(next_line());
        int v0, v1;
        if (!(ss >> v0 >> v1) || v0 < 0 || v1 < 0 || v0 >= nv || v1 >= nv ||
            v0 >= v1)
            throw Error(ErrorKind::parse,
                        "mesh file: malformed interface edge line", lineno);
        mesh.interface_edges[g] = {v0, v1};
    }

    // geometry is implied by the data: the half-width from the boundary
    // vertices, the radius from the interface vertices
    double a = 0.0;
    for (long i = 0; i < nv; ++i)
        if (mesh.on_boundary[i])
            a = std::max(a, std::max(std::abs(mesh.vertices[i].x),
                                     std::abs(mesh.vertices[i].y)));
    double r0 = 0.0;
    long nr = 0;
    for (const auto& edge : mesh.interface_edges)
        for (int v : edge) {
            r0 += norm(mesh.vertices[v]);
            ++nr;
        }
    mesh.geom.half_width = a > 0.0 ? a : 1.0;
    mesh.geom.interface_radius = nr > 0 ? r0 / nr : 0.5 * mesh.geom.half_width;

    mesh.mesh_size = 0.0;
    for (const auto& el : mesh.elements)
        for (int k = 0; k < 3; ++k)
            mesh.mesh_size = std::max(
                mesh.mesh_size, norm(mesh.vertices[el.v[k]] -
                                     mesh.vertices[el.v[(k + 1) % 3]]));
    return mesh;
}

} // namespace capfem
