#pragma once

/// @file config.hpp
/// @brief Run configuration: strict flat key = value files with dotted
///        sections. Unknown keys are fatal, every value is type-checked, and
///        the canonical echo() supports byte-stable manifests.
///
/// Schema (defaults in parentheses):
///   geometry.half_width        positive double (1.0)
///   geometry.interface_radius  double in (0, half_width) (0.5)
///   mesh.n                     int >= 4 (16); exclusive with mesh.file
///   mesh.file                  path to a cfm-mesh file
///   coefficients.sigma1/.sigma2  conductivities >= 0 (1.0)
///   coefficients.eps1/.eps2      permittivities > 0 (1.0)
///   time.final                 positive double (1.0)
///   time.steps                 int >= 1 (16)
///   pulse.kind                 none | rectangular | trapezoidal | gaussian |
///                              biphasic-exponential (none)
///   pulse.amplitude (1.0), pulse.onset (0.0), pulse.duration (0.1),
///   pulse.rise (0.01), pulse.center (0.5), pulse.width (0.1),
///   pulse.decay (0.1)          shape parameters, used per kind
///   pulse.profile              uniform | gaussian-spot (uniform)
///   pulse.spot_x (0.0), pulse.spot_y (0.0), pulse.spot_width (0.25)
///   initial.kind               zero | case-A | case-B | interpolate (zero)
///   initial.expression         required iff initial.kind = interpolate
///   solver.tolerance           double in (0,1) (1e-12)
///   solver.max_iterations      int >= 0, 0 = automatic (0)
///   solver.preconditioner      none | diagonal (diagonal)
///   output.directory           path (out); relative paths resolve under
///                              $CAPFEM_OUT when that variable is set
///   output.stride              int >= 1, snapshot every stride steps (1)
///   output.probes              semicolon-separated "x,y" sample points ()

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capfem/assembly.hpp"
#include "capfem/error.hpp"
#include "capfem/expression.hpp"
#include "capfem/geometry.hpp"
#include "capfem/pulses.hpp"
#include "capfem/solver.hpp"
#include "capfem/timegrid.hpp"

namespace capfem {

struct RunConfig {
    GeometrySpec geom;
    int mesh_n = 16;
    std::string mesh_file; // nonempty: load instead of generating

    CoefficientField coeff{1.0, 1.0, 1.0, 1.0};
    TimeGrid grid{1.0, 16};

    bool has_pulse = false;
    PulseShape pulse; // meaningful only when has_pulse
    std::string profile = "uniform";
    Vec2 spot_center{0.0, 0.0};
    double spot_width = 0.25;

    std::string initial_kind = "zero";
    std::string initial_expression;

    SolverConfig solver;
    std::string preconditioner = "diagonal";

    std::string output_directory = "out";
    int output_stride = 1;
    std::vector<Vec2> probes;

    static RunConfig parse_text(const std::string& text);
    static RunConfig load(const std::string& path);

    void validate() const;
    std::string echo() const; // canonical key = value form, fixed order
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& key,
                                     const std::string& what) {
    throw Error(ErrorKind::config, "config key '" + key + "': " + what, -1, key);
}

inline double config_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        config_fail(key, "expected a number, got '" + v + "'");
    }
    if (used != v.size()) config_fail(key, "trailing characters in '" + v + "'");
    return out;
}

inline int config_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long out = 0;
    try {
        out = std::stol(v, &used);
    } catch (const std::exception&) {
        config_fail(key, "expected an integer, got '" + v + "'");
    }
    if (used != v.size()) config_fail(key, "trailing characters in '" + v + "'");
    return static_cast<int>(out);
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<Vec2> parse_probes(const std::string& key,
                                      const std::string& v) {
    std::vector<Vec2> pts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t comma = item.find(',');
        if (comma == std::string::npos)
            config_fail(key, "probe '" + item + "' is not of the form x,y");
        pts.push_back({config_double(key, trim(item.substr(0, comma))),
                       config_double(key, trim(item.substr(comma + 1)))});
    }
    return pts;
}

inline std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline RunConfig RunConfig::parse_text(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    bool saw_mesh_n = false, saw_mesh_file = false;
    PulseKind pulse_kind = PulseKind::rectangular;
    bool pulse_requested = false;

    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::config,
                        "config line " + std::to_string(lineno) +
                            ": expected key = value, got '" + line + "'",
                        lineno);
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw Error(ErrorKind::config,
                        "config line " + std::to_string(lineno) + ": empty key",
                        lineno);
        if (!seen.insert(key).second)
            detail::config_fail(key, "duplicate assignment");

        if (key == "geometry.half_width")
            cfg.geom.half_width = detail::config_double(key, val);
        else if (key == "geometry.interface_radius")
            cfg.geom.interface_radius = detail::config_double(key, val);
        else if (key == "mesh.n") {
            cfg.mesh_n = detail::config_int(key, val);
            saw_mesh_n = true;
        } else if (key == "mesh.file") {
            cfg.mesh_file = val;
            saw_mesh_file = true;
        } else if (key == "coefficients.sigma1")
            cfg.coeff.sigma1 = detail::config_double(key, val);
        else if (key == "coefficients.sigma2")
            cfg.coeff.sigma2 = detail::config_double(key, val);
        else if (key == "coefficients.eps1")
            cfg.coeff.eps1 = detail::config_double(key, val);
        else if (key == "coefficients.eps2")
            cfg.coeff.eps2 = detail::config_double(key, val);
        else if (key == "time.final")
            cfg.grid.final_time = detail::config_double(key, val);
        else if (key == "time.steps")
            cfg.grid.steps = detail::config_int(key, val);
        else if (key == "pulse.kind") {
            if (val == "none") {
                pulse_requested = false;
                cfg.has_pulse = false;
            } else {
                pulse_requested = true;
                if (val == "rectangular")
                    pulse_kind = PulseKind::rectangular;
                else if (val == "trapezoidal")
                    pulse_kind = PulseKind::trapezoidal;
                else if (val == "gaussian")
                    pulse_kind = PulseKind::gaussian;
                else if (val == "biphasic-exponential")
                    pulse_kind = PulseKind::biphasic_exponential;
                else
                    detail::config_fail(key, "unknown pulse kind '" + val + "'");
            }
        } else if (key == "pulse.amplitude")
            cfg.pulse.amplitude = detail::config_double(key, val);
        else if (key == "pulse.onset")
            cfg.pulse.onset = detail::config_double(key, val);
        else if (key == "pulse.duration")
            cfg.pulse.duration = detail::config_double(key, val);
        else if (key == "pulse.rise")
            cfg.pulse.rise = detail::config_double(key, val);
        else if (key == "pulse.center")
            cfg.pulse.center = detail::config_double(key, val);
        else if (key == "pulse.width")
            cfg.pulse.width = detail::config_double(key, val);
        else if (key == "pulse.decay")
            cfg.pulse.decay = detail::config_double(key, val);
        else if (key == "pulse.profile") {
            if (val != "uniform" && val != "gaussian-spot")
                detail::config_fail(key, "unknown profile '" + val + "'");
            cfg.profile = val;
        } else if (key == "pulse.spot_x")
            cfg.spot_center.x = detail::config_double(key, val);
        else if (key == "pulse.spot_y")
            cfg.spot_center.y = detail::config_double(key, val);
        else if (key == "pulse.spot_width")
            cfg.spot_width = detail::config_double(key, val);
        else if (key == "initial.kind") {
            if (val != "zero" && val != "case-A" && val != "case-B" &&
                val != "interpolate")
                detail::config_fail(key, "unknown initial kind '" + val + "'");
            cfg.initial_kind = val;
        } else if (key == "initial.expression")
            cfg.initial_expression = val;
        else if (key == "solver.tolerance")
            cfg.solver.tolerance = detail::config_double(key, val);
        else if (key == "solver.max_iterations")
            cfg.solver.max_iterations = detail::config_int(key, val);
        else if (key == "solver.preconditioner") {
            if (val != "none" && val != "diagonal")
                detail::config_fail(key, "unknown preconditioner '" + val + "'");
            cfg.preconditioner = val;
            cfg.solver.diagonal_preconditioner = (val == "diagonal");
        } else if (key == "output.directory")
            cfg.output_directory = val;
        else if (key == "output.stride")
            cfg.output_stride = detail::config_int(key, val);
        else if (key == "output.probes")
            cfg.probes = detail::parse_probes(key, val);
        else
            throw Error(ErrorKind::config, "unknown config key '" + key + "'",
                        lineno, key);
    }

    if (saw_mesh_n && saw_mesh_file)
        detail::config_fail("mesh.file",
                            "mesh.n and mesh.file are mutually exclusive");
    if (pulse_requested) {
        cfg.has_pulse = true;
        cfg.pulse.kind = pulse_kind;
    }
    cfg.validate();
    return cfg;
}

inline RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

inline void RunConfig::validate() const {
    geom.validate();
    coeff.validate();
    grid.validate();
    if (mesh_file.empty() && mesh_n < 4)
        detail::config_fail("mesh.n", "must be at least 4");
    if (has_pulse) pulse.validate();
    if (profile == "gaussian-spot" && !(spot_width > 0.0))
        detail::config_fail("pulse.spot_width", "must be positive");
    if (initial_kind == "interpolate") {
        if (initial_expression.empty())
            detail::config_fail("initial.expression",
                                "required when initial.kind = interpolate");
        try {
            Expression::parse(initial_expression);
        } catch (const Error& e) {
            detail::config_fail("initial.expression", e.what());
        }
    } else if (!initial_expression.empty()) {
        detail::config_fail("initial.expression",
                            "only meaningful with initial.kind = interpolate");
    }
    if (!(solver.tolerance > 0.0 && solver.tolerance < 1.0))
        detail::config_fail("solver.tolerance", "must lie in (0, 1)");
    if (solver.max_iterations < 0)
        detail::config_fail("solver.max_iterations", "must be >= 0");
    if (output_stride < 1)
        detail::config_fail("output.stride", "must be >= 1");
    if (output_directory.empty())
        detail::config_fail("output.directory", "must not be empty");
}

inline std::string RunConfig::echo() const {
    using detail::fmt_g17;
    std::ostringstream out;
    out << "geometry.half_width = " << fmt_g17(geom.half_width) << "\n";
    out << "geometry.interface_radius = " << fmt_g17(geom.interface_radius)
        << "\n";
    if (mesh_file.empty())
        out << "mesh.n = " << mesh_n << "\n";
    else
        out << "mesh.file = " << mesh_file << "\n";
    out << "coefficients.sigma1 = " << fmt_g17(coeff.sigma1) << "\n";
    out << "coefficients.sigma2 = " << fmt_g17(coeff.sigma2) << "\n";
    out << "coefficients.eps1 = " << fmt_g17(coeff.eps1) << "\n";
    out << "coefficients.eps2 = " << fmt_g17(coeff.eps2) << "\n";
    out << "time.final = " << fmt_g17(grid.final_time) << "\n";
    out << "time.steps = " << grid.steps << "\n";
    out << "pulse.kind = " << (has_pulse ? pulse_kind_name(pulse.kind) : "none")
        << "\n";
    if (has_pulse) {
        out << "pulse.amplitude = " << fmt_g17(pulse.amplitude) << "\n";
        out << "pulse.onset = " << fmt_g17(pulse.onset) << "\n";
        switch (pulse.kind) {
        case PulseKind::rectangular:
            out << "pulse.duration = " << fmt_g17(pulse.duration) << "\n";
            break;
        case PulseKind::trapezoidal:
            out << "pulse.duration = " << fmt_g17(pulse.duration) << "\n";
            out << "pulse.rise = " << fmt_g17(pulse.rise) << "\n";
            break;
        case PulseKind::gaussian:
            out << "pulse.center = " << fmt_g17(pulse.center) << "\n";
            out << "pulse.width = " << fmt_g17(pulse.width) << "\n";
            break;
        case PulseKind::biphasic_exponential:
            out << "pulse.duration = " << fmt_g17(pulse.duration) << "\n";
            out << "pulse.decay = " << fmt_g17(pulse.decay) << "\n";
            break;
        }
        out << "pulse.profile = " << profile << "\n";
        if (profile == "gaussian-spot") {
            out << "pulse.spot_x = " << fmt_g17(spot_center.x) << "\n";
            out << "pulse.spot_y = " << fmt_g17(spot_center.y) << "\n";
            out << "pulse.spot_width = " << fmt_g17(spot_width) << "\n";
        }
    }
    out << "initial.kind = " << initial_kind << "\n";
    if (initial_kind == "interpolate")
        out << "initial.expression = " << initial_expression << "\n";
    out << "solver.tolerance = " << fmt_g17(solver.tolerance) << "\n";
    out << "solver.max_iterations = " << solver.max_iterations << "\n";
    out << "solver.preconditioner = " << preconditioner << "\n";
    out << "output.directory = " << output_directory << "\n";
    out << "output.stride = " << output_stride << "\n";
    if (!probes.empty()) {
        out << "output.probes = ";
        for (std::size_t i = 0; i < probes.size(); ++i) {
            if (i) out << "; ";
            out << fmt_g17(probes[i].x) << "," << fmt_g17(probes[i].y);
        }
        out << "\n";
    }
    return out.str();
}

/// Resolves a (possibly relative) output path under $CAPFEM_OUT when set.
inline std::string resolve_output_path(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    const char* root = std::getenv("CAPFEM_OUT");
    if (!root || !*root) return path;
    std::string r(root);
    if (r.back() != '/') r += '/';
    return r + path;
}

} // namespace capfem
