#pragma once

/// @file io.hpp
/// @brief Output writers: legacy ASCII VTK snapshots, probe time series, and
///        the run manifest. All writers are deterministic (no timestamps, no
///        machine-dependent text), so identical runs produce identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "capfem/config.hpp"
#include "capfem/error.hpp"
#include "capfem/mesh.hpp"
#include "capfem/timestepping.hpp"

namespace capfem {

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    return out;
}

} // namespace detail

/// Writes one scalar field snapshot as a legacy ASCII VTK unstructured grid
/// (triangle cells, point data field "potential").
inline void write_vtk_snapshot(const std::string& path, const Mesh& mesh,
                               const std::vector<double>& vertex_values,
                               const std::string& field = "potential") {
    if (vertex_values.size() != mesh.vertices.size())
        throw Error(ErrorKind::invalid_argument,
                    "vtk: field size does not match the vertex count");
    auto out = detail::open_out(path);
    char buf[128];
    out << "# vtk DataFile Version 3.0\n";
    out << "capfem potential field\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertices.size() << " double\n";
    for (const Vec2& p : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g 0\n", p.x, p.y);
        out << buf;
    }
    out << "CELLS " << mesh.elements.size() << " " << 4 * mesh.elements.size()
        << "\n";
    for (const auto& e : mesh.elements)
        out << "3 " << e.v[0] << " " << e.v[1] << " " << e.v[2] << "\n";
    out << "CELL_TYPES " << mesh.elements.size() << "\n";
    for (std::size_t i = 0; i < mesh.elements.size(); ++i) out << "5\n";
    out << "POINT_DATA " << vertex_values.size() << "\n";
    out << "SCALARS " << field << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : vertex_values) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        out << buf;
    }
    if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

/// Probe points with cached element locations; values are P1-interpolated.
class ProbeSet {
public:
    ProbeSet() = default;

    ProbeSet(const Mesh& mesh, const std::vector<Vec2>& points)
        : points_(points) {
        cells_.reserve(points.size());
        for (const Vec2& p : points) cells_.push_back(locate(mesh, p));
    }

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec2>& points() const { return points_; }

    /// Barycentric interpolation of a vertex field at every probe.
    std::vector<double> sample(const Mesh& mesh,
                               const std::vector<double>& vertex_values) const {
        std::vector<double> out(points_.size());
        for (std::size_t k = 0; k < points_.size(); ++k) {
            const auto& e = mesh.elements[cells_[k]];
            double b[3];
            barycentric(mesh, cells_[k], points_[k], b);
            out[k] = b[0] * vertex_values[e.v[0]] + b[1] * vertex_values[e.v[1]] +
                     b[2] * vertex_values[e.v[2]];
        }
        return out;
    }

private:
    std::vector<Vec2> points_;
    std::vector<std::size_t> cells_;

    static void barycentric(const Mesh& mesh, std::size_t cell, Vec2 p,
                            double b[3]) {
        const auto& e = mesh.elements[cell];
        Vec2 p0 = mesh.vertices[e.v[0]], p1 = mesh.vertices[e.v[1]],
             p2 = mesh.vertices[e.v[2]];
        double det = detail::signed_area(p0, p1, p2) * 2.0;
        b[0] = detail::signed_area(p, p1, p2) * 2.0 / det;
        b[1] = detail::signed_area(p0, p, p2) * 2.0 / det;
        b[2] = 1.0 - b[0] - b[1];
    }

    static std::size_t locate(const Mesh& mesh, Vec2 p) {
        const double tol = -1e-12;
        for (std::size_t i = 0; i < mesh.elements.size(); ++i) {
            double b[3];
            barycentric(mesh, i, p, b);
            if (b[0] >= tol && b[1] >= tol && b[2] >= tol) return i;
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "probe (%g, %g) lies outside the mesh",
                      p.x, p.y);
        throw Error(ErrorKind::config, buf);
    }
};

/// Writes the probe time series: a version line, a header row, then one
/// "t,value..." row per time node (t = 0 included).
inline void write_probes_csv(const std::string& path, const ProbeSet& probes,
                             const std::vector<double>& times,
                             const std::vector<std::vector<double>>& samples) {
    if (times.size() != samples.size())
        throw Error(ErrorKind::invalid_argument,
                    "probes: times and samples differ in length");
    auto out = detail::open_out(path);
    char buf[64];
    out << "# capfem-probes 1\n";
    out << "t";
    for (std::size_t k = 0; k < probes.size(); ++k) out << ",probe" << k + 1;
    out << "\n";
    for (std::size_t n = 0; n < times.size(); ++n) {
        if (samples[n].size() != probes.size())
            throw Error(ErrorKind::invalid_argument,
                        "probes: sample row width mismatch");
        std::snprintf(buf, sizeof(buf), "%.17g", times[n]);
        out << buf;
        for (double v : samples[n]) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

/// Writes the run manifest: echoed config, mesh summary, per-step solver
/// stats, the energy-identity residual, and the emitted files.
inline void write_run_manifest(const std::string& path, const RunConfig& cfg,
                               const Mesh& mesh, const Trajectory& traj,
                               double energy_residual,
                               const std::vector<std::string>& files) {
    auto out = detail::open_out(path);
    char buf[160];
    out << "capfem-manifest 1\n";
    std::istringstream echo(cfg.echo());
    std::string line;
    while (std::getline(echo, line)) out << "config." << line << "\n";
    std::snprintf(buf, sizeof(buf),
                  "mesh.vertices = %zu\nmesh.elements = %zu\nmesh.h = %.17g\n",
                  mesh.vertices.size(), mesh.elements.size(), mesh.mesh_size);
    out << buf;
    out << "run.initial_mode = " << traj.init_mode << "\n";
    out << "run.h1_warning = " << (traj.h1_warning ? 1 : 0) << "\n";
    if (traj.h1_warning)
        out << "run.warning = the pulse is discontinuous in time; the "
               "first-order rate guarantee does not apply to this run\n";
    for (std::size_t n = 0; n < traj.records.size(); ++n) {
        std::snprintf(buf, sizeof(buf),
                      "step.%zu = iterations %d residual %.6e\n", n + 1,
                      traj.records[n].iterations, traj.records[n].residual);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "energy.residual_max = %.6e\n",
                  energy_residual);
    out << buf;
    for (const std::string& f : files) out << "file = " << f << "\n";
    if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

} // namespace capfem
