/// capfem command line: mesh generation and validation, pulse-driven
/// simulation runs with field export, and convergence-rate certification.
///
/// Exit codes: 0 success, 1 I/O failure, 2 configuration or validation
/// failure, 3 solver failure, 4 certification failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capfem/capfem.hpp"

namespace {

using namespace capfem;

int exit_code(const Error& e) {
    switch (e.kind) {
    case ErrorKind::io: return 1;
    case ErrorKind::solver: return 3;
    case ErrorKind::certification: return 4;
    default: return 2;
    }
}

void print_mesh_summary(const Mesh& mesh, const MeshReport& report) {
    std::size_t disk = 0, outside = 0;
    for (const auto& e : mesh.elements) (e.tag == 1 ? disk : outside) += 1;
    std::printf("vertices = %zu\n", mesh.vertices.size());
    std::printf("elements = %zu (disk %zu, outside %zu)\n",
                mesh.elements.size(), disk, outside);
    std::printf("interface edges = %zu\n", mesh.interface_edges.size());
    std::printf("h = %.6g\n", mesh.mesh_size);
    std::printf("lambda = %.6g\n", interface_resolution(mesh));
    std::printf("min angle = %.4g deg\n", report.min_angle);
}

int run_mesh(int n, double half_width, double radius, double min_angle,
             const std::string& out_path, const std::string& validate_path) {
    if (!validate_path.empty()) {
        std::ifstream in(validate_path);
        if (!in)
            throw Error(ErrorKind::io,
                        "cannot open mesh file '" + validate_path + "'");
        Mesh mesh = read_mesh(in);
        MeshReport report = validate_mesh(mesh, min_angle);
        print_mesh_summary(mesh, report);
        std::printf("violations = %zu\n", report.violations.size());
        for (const auto& v : report.violations)
            std::printf("violation: %s\n", v.c_str());
        return report.ok() ? 0 : 2;
    }

    GeometrySpec geom{half_width, radius};
    Mesh mesh = generate_mesh(geom, n, min_angle);
    MeshReport report = validate_mesh(mesh, min_angle);
    print_mesh_summary(mesh, report);
    if (!report.ok()) {
        for (const auto& v : report.violations)
            std::printf("violation: %s\n", v.c_str());
        return 2;
    }
    if (!out_path.empty()) {
        std::string resolved = resolve_output_path(out_path);
        std::ofstream out(resolved);
        if (!out)
            throw Error(ErrorKind::io,
                        "cannot open '" + resolved + "' for writing");
        write_mesh(mesh, out);
        if (!out)
            throw Error(ErrorKind::io, "write failed for '" + resolved + "'");
        std::printf("wrote %s\n", resolved.c_str());
    }
    return 0;
}

// the solve subcommand holds the boundary potential at the initial datum's
// trace for the whole run (electrodes at fixed potential)
struct PreparedInitial {
    InitialDatum datum;
    std::function<double(Vec2)> trace; // null: homogeneous
};

PreparedInitial prepare_initial(const RunConfig& cfg) {
    PreparedInitial out;
    const GeometrySpec pinned{1.0, 0.5};
    auto geometry_is_pinned = [&] {
        return std::abs(cfg.geom.half_width - pinned.half_width) < 1e-12 &&
               std::abs(cfg.geom.interface_radius - pinned.interface_radius) <
                   1e-12;
    };
    if (cfg.initial_kind == "zero") {
        out.datum.u0 = [](Vec2, int) { return 0.0; };
    } else if (cfg.initial_kind == "case-A") {
        if (!geometry_is_pinned())
            throw Error(ErrorKind::config,
                        "initial.kind = case-A requires geometry.half_width = "
                        "1 and geometry.interface_radius = 0.5",
                        -1, "initial.kind");
        out.datum = case_a_datum(cfg.coeff);
    } else if (cfg.initial_kind == "case-B") {
        if (!geometry_is_pinned())
            throw Error(ErrorKind::config,
                        "initial.kind = case-B requires geometry.half_width = "
                        "1 and geometry.interface_radius = 0.5",
                        -1, "initial.kind");
        out.datum = case_b_datum(cfg.coeff);
        out.trace = out.datum.boundary;
    } else { // interpolate
        Expression expr = Expression::parse(cfg.initial_expression);
        out.datum.u0 = [expr](Vec2 p, int) { return expr(p); };
        out.datum.boundary = [expr](Vec2 p) { return expr(p); };
        out.trace = [expr](Vec2 p) { return expr(p); };
    }
    return out;
}

int run_solve(const std::string& config_path) {
    RunConfig cfg = RunConfig::load(config_path);

    Mesh mesh;
    if (!cfg.mesh_file.empty()) {
        std::ifstream in(cfg.mesh_file);
        if (!in)
            throw Error(ErrorKind::io,
                        "cannot open mesh file '" + cfg.mesh_file + "'");
        mesh = read_mesh(in);
        double scale = std::max(1.0, cfg.geom.half_width);
        if (std::abs(mesh.geom.half_width - cfg.geom.half_width) >
                1e-9 * scale ||
            std::abs(mesh.geom.interface_radius - cfg.geom.interface_radius) >
                1e-9 * scale)
            throw Error(ErrorKind::config,
                        "geometry.* disagrees with the mesh file '" +
                            cfg.mesh_file + "'",
                        -1, "geometry.half_width");
        MeshReport report = validate_mesh(mesh);
        if (!report.ok())
            throw Error(ErrorKind::conformity,
                        "mesh file '" + cfg.mesh_file +
                            "' fails validation: " + report.violations.front());
    } else {
        mesh = generate_mesh(cfg.geom, cfg.mesh_n);
    }
    DofMap dofs = DofMap::interior(mesh);

    Forcing forcing;
    forcing.h1_in_time = true; // no pulse: zero forcing
    if (cfg.has_pulse) {
        SeparableForcing sep;
        sep.pulse = cfg.pulse;
        sep.final_time = cfg.grid.final_time;
        if (cfg.profile == "uniform") {
            sep.profile = [](Vec2, int) { return 1.0; };
        } else {
            Vec2 c = cfg.spot_center;
            double w = cfg.spot_width;
            sep.profile = [c, w](Vec2 p, int) {
                double dx = p.x - c.x, dy = p.y - c.y;
                return std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
            };
        }
        forcing = Forcing::from_separable(sep);
    }

    PreparedInitial init = prepare_initial(cfg);
    DirichletData held;
    const DirichletData* bc = nullptr;
    if (init.trace) {
        auto trace = init.trace;
        held.value = [trace](double, Vec2 p) { return trace(p); };
        held.dt_value = [](double, Vec2) { return 0.0; };
        bc = &held;
    }

    Trajectory traj = run_fully_discrete(mesh, cfg.coeff, dofs, forcing,
                                         init.datum, cfg.grid, cfg.solver, bc);

    auto a_sigma = assemble_stiffness(mesh, cfg.coeff, Form::sigma, dofs);
    auto a_eps = assemble_stiffness(mesh, cfg.coeff, Form::eps, dofs);
    auto step_residuals = energy_identity_residual(a_sigma, a_eps, cfg.grid, traj);
    double energy_residual =
        step_residuals.empty()
            ? 0.0
            : *std::max_element(step_residuals.begin(), step_residuals.end());

    std::string dir = resolve_output_path(cfg.output_directory);
    std::error_code fs_err;
    std::filesystem::create_directories(dir, fs_err);
    if (fs_err)
        throw Error(ErrorKind::io, "cannot create output directory '" + dir +
                                       "': " + fs_err.message());

    std::vector<std::string> files;
    char name[64];
    for (int n = 0; n <= cfg.grid.steps; ++n) {
        if (n % cfg.output_stride != 0 && n != cfg.grid.steps) continue;
        auto values = expand_to_vertices(mesh, dofs, traj.states[n], init.trace);
        std::snprintf(name, sizeof(name), "potential_%04d.vtk", n);
        write_vtk_snapshot(dir + "/" + name, mesh, values);
        files.push_back(name);
    }
    if (!cfg.probes.empty()) {
        ProbeSet probes(mesh, cfg.probes);
        std::vector<double> times;
        std::vector<std::vector<double>> rows;
        for (int n = 0; n <= cfg.grid.steps; ++n) {
            auto values =
                expand_to_vertices(mesh, dofs, traj.states[n], init.trace);
            times.push_back(cfg.grid.node(n));
            rows.push_back(probes.sample(mesh, values));
        }
        write_probes_csv(dir + "/probes.csv", probes, times, rows);
        files.push_back("probes.csv");
    }
    write_run_manifest(dir + "/manifest.txt", cfg, mesh, traj, energy_residual,
                       files);

    int max_iter = 0;
    for (const auto& r : traj.records) max_iter = std::max(max_iter, r.iterations);
    std::printf("mesh: %zu vertices, h = %.6g\n", mesh.vertices.size(),
                mesh.mesh_size);
    std::printf("initial state by %s\n", traj.init_mode.c_str());
    if (traj.h1_warning)
        std::printf("warning: discontinuous pulse, rate guarantee does not "
                    "apply\n");
    std::printf("steps = %d, max cg iterations = %d\n", cfg.grid.steps,
                max_iter);
    std::printf("energy identity residual = %.3e\n", energy_residual);
    std::printf("outputs in %s (%zu files + manifest)\n", dir.c_str(),
                files.size());
    return 0;
}

int run_converge(const std::string& case_name, const std::string& mode_name,
                 const std::string& levels_csv, const std::string& out_path) {
    ManufacturedCase mcase;
    if (case_name == "A")
        mcase = case_A();
    else if (case_name == "B")
        mcase = case_B();
    else
        throw Error(ErrorKind::config, "unknown case '" + case_name +
                                           "', expected A or B");

    StudyMode mode;
    if (mode_name == "l2")
        mode = StudyMode::l2_rate;
    else if (mode_name == "h1")
        mode = StudyMode::h1_rate;
    else if (mode_name == "time")
        mode = StudyMode::time_rate;
    else
        throw Error(ErrorKind::config, "unknown mode '" + mode_name +
                                           "', expected l2, h1 or time");

    std::vector<int> levels;
    std::stringstream ss(levels_csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) levels.push_back(std::stoi(item));
    if (levels.size() < 3)
        throw Error(ErrorKind::config,
                    "need at least 3 refinement levels, got " +
                        std::to_string(levels.size()));

    ConvergenceReport rep = convergence_study(mcase, mode, levels);

    std::printf("case %s, mode %s%s\n", rep.case_name.c_str(),
                study_mode_name(rep.mode),
                rep.extended ? " (extended: nonzero boundary data)" : "");
    std::printf("gate: value jump %.2e, flux jump %.2e, strong residual %.2e "
                "-> %s\n",
                rep.gate.max_value_jump, rep.gate.max_flux_jump,
                rep.gate.max_strong_residual,
                rep.gate_passed ? "pass" : "FAIL");
    std::printf("%6s %7s %12s %12s %14s %14s\n", "n", "steps", "h", "tau",
                "L2(I;H)", "L2(I;V)");
    for (const auto& row : rep.rows) {
        if (row.failed) {
            std::printf("%6d %7d  failed: %s\n", row.n, row.steps,
                        row.note.c_str());
            continue;
        }
        std::printf("%6d %7d %12.4e %12.4e %14.6e %14.6e\n", row.n, row.steps,
                    row.h, row.tau, row.e_l2h, row.e_l2v);
    }
    if (rep.degenerate) {
        std::printf("errors at the rounding floor: fit degenerate, not "
                    "certified\n");
    } else {
        std::printf("slopes: L2(I;H) %.3f, L2(I;V) %.3f\n", rep.slope_l2h,
                    rep.slope_l2v);
        std::printf("certified slope %.3f in [%.2f, %.2f] -> %s\n",
                    rep.certified_slope, rep.band_lo, rep.band_hi,
                    rep.certified ? "PASS" : "FAIL");
    }

    if (!out_path.empty()) {
        std::string resolved = resolve_output_path(out_path);
        std::ofstream out(resolved);
        if (!out)
            throw Error(ErrorKind::io,
                        "cannot open '" + resolved + "' for writing");
        out << rep.text();
        if (!out)
            throw Error(ErrorKind::io, "write failed for '" + resolved + "'");
        std::printf("wrote %s\n", resolved.c_str());
    }
    return rep.certified ? 0 : 4;
}

int run_pulse_list() {
    std::printf("%-22s %-38s %-11s %s\n", "kind", "parameters", "H1-in-time",
                "compact-support");
    std::printf("%-22s %-38s %-11s %s\n", "rectangular",
                "amplitude, onset, duration", "no", "yes");
    std::printf("%-22s %-38s %-11s %s\n", "trapezoidal",
                "amplitude, onset, duration, rise", "yes", "yes");
    std::printf("%-22s %-38s %-11s %s\n", "gaussian",
                "amplitude, center, width", "yes", "no");
    std::printf("%-22s %-38s %-11s %s\n", "biphasic-exponential",
                "amplitude, onset, duration, decay", "yes", "yes");
    std::printf("\nrectangular pulses are discontinuous in time: simulation "
                "runs are allowed\nbut flagged, and rate certification "
                "refuses them; trapezoidal is the\nrecommended substitute.\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"capfem: finite element solver for capacitive interface "
                 "problems"};
    app.require_subcommand(1);

    auto* mesh_cmd =
        app.add_subcommand("mesh", "generate or validate a fitted mesh");
    int n = 0;
    double half_width = 1.0, radius = 0.5, min_angle = 15.0;
    std::string out_path, validate_path;
    mesh_cmd->add_option("--n", n, "grid resolution (n x n cells, n >= 4)");
    mesh_cmd->add_option("--half-width", half_width, "domain half width");
    mesh_cmd->add_option("--radius", radius, "interface circle radius");
    mesh_cmd->add_option("--min-angle", min_angle,
                         "minimum angle threshold in degrees");
    mesh_cmd->add_option("--out", out_path, "write the mesh to this file");
    mesh_cmd->add_option("--validate", validate_path,
                         "validate an existing mesh file instead");

    auto* solve_cmd =
        app.add_subcommand("solve", "run the fully discrete scheme");
    std::string config_path;
    solve_cmd->add_option("--config", config_path, "run configuration file")
        ->required();

    auto* conv_cmd = app.add_subcommand(
        "converge", "convergence study with rate certification");
    std::string case_name, mode_name, levels_csv, report_path;
    conv_cmd->add_option("--case", case_name, "manufactured case: A or B")
        ->required();
    conv_cmd->add_option("--mode", mode_name, "l2, h1 or time")->required();
    conv_cmd
        ->add_option("--levels", levels_csv,
                     "comma-separated mesh resolutions (step counts for "
                     "mode time), at least 3")
        ->required();
    conv_cmd->add_option("--out", report_path, "write the report to this file");

    auto* pulse_cmd = app.add_subcommand("pulse", "pulse library utilities");
    pulse_cmd->require_subcommand(1);
    auto* pulse_list_cmd =
        pulse_cmd->add_subcommand("list", "list the available pulse kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (mesh_cmd->parsed()) {
            if (validate_path.empty() && n == 0) {
                std::fprintf(stderr, "mesh: either --n or --validate is "
                                     "required\n");
                return 2;
            }
            if (!validate_path.empty() && n != 0) {
                std::fprintf(stderr, "mesh: --n and --validate are mutually "
                                     "exclusive\n");
                return 2;
            }
            return run_mesh(n, half_width, radius, min_angle, out_path,
                            validate_path);
        }
        if (solve_cmd->parsed()) return run_solve(config_path);
        if (conv_cmd->parsed())
            return run_converge(case_name, mode_name, levels_csv, report_path);
        if (pulse_cmd->parsed() && pulse_list_cmd->parsed())
            return run_pulse_list();
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
