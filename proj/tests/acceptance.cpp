/// Acceptance scoreboard: one pass/fail line per shipping criterion, pinned
/// tolerances, exit code = number of failed criteria.
///
/// Criteria 1, 2, and the energy-norm half of 4 are evaluated on the pinned
/// coarse window starting at n = 8. The manufactured solution's interface
/// feature spans about two cells there, so those slopes are still
/// pre-asymptotic; the same studies one refinement later are printed as
/// clearly marked informational lines and certify cleanly. The criteria are
/// scored on the pinned window regardless.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "capfem/capfem.hpp"

using namespace capfem;

namespace {

int failures = 0;

void verdict(int id, const std::string& label, bool ok,
             const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", id,
                label.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void info(const std::string& text) {
    std::printf("       info: %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[192];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

struct ProjectionSlopes {
    double l2 = 0.0, h1 = 0.0;
};

ProjectionSlopes projection_slopes(const std::vector<int>& levels) {
    auto ca = case_A();
    std::vector<double> hs, el2, eh1;
    for (int n : levels) {
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
    return {fit_slope(hs, el2), fit_slope(hs, eh1)};
}

} // namespace

int main() {
    std::printf("capfem acceptance suite\n");
    std::printf("-----------------------\n");

    // 1. space rate in the mean-square norm, pinned window n = 8, 16, 32
    {
        auto rep = convergence_study(case_A(), StudyMode::l2_rate, {8, 16, 32});
        verdict(1, "case A converges at second order in L2(I;H), meshes 8-32",
                rep.certified,
                fmt("slope %.4f, band [1.80, 2.20]", rep.certified_slope));
        auto wide =
            convergence_study(case_A(), StudyMode::l2_rate, {16, 32, 64});
        info(fmt("same study on meshes 16-64: slope %.4f, certified %.0f",
                 wide.certified_slope, wide.certified ? 1.0 : 0.0));
    }

    // 2. space rate in the energy norm, pinned window n = 8, 16, 32
    {
        auto rep = convergence_study(case_A(), StudyMode::h1_rate, {8, 16, 32});
        verdict(2, "case A converges at first order in L2(I;V), meshes 8-32",
                rep.certified,
                fmt("slope %.4f, band [0.85, 1.15]", rep.certified_slope));
        auto wide =
            convergence_study(case_A(), StudyMode::h1_rate, {16, 32, 64});
        info(fmt("same study on meshes 16-64: slope %.4f, certified %.0f",
                 wide.certified_slope, wide.certified ? 1.0 : 0.0));
    }

    // 3. time rate against a step-doubled reference on the fixed mesh n = 32
    {
        auto rep = convergence_study(case_A(), StudyMode::time_rate,
                                     {8, 16, 32, 64}, 1.0, {}, 32);
        verdict(3, "backward Euler is first order in time on a fixed mesh",
                rep.certified,
                fmt("slope %.4f, band [0.90, 1.10]", rep.certified_slope));
    }

    // 4. initial-state projection accuracy in both norms, meshes 8-64
    {
        auto s = projection_slopes({8, 16, 32, 64});
        bool ok_l2 = s.l2 > 1.85 && s.l2 < 2.15;
        bool ok_h1 = s.h1 > 0.9 && s.h1 < 1.1;
        verdict(4, "initial projection is optimal in L2 and H1, meshes 8-64",
                ok_l2 && ok_h1,
                fmt("L2 slope %.4f in [1.85, 2.15], H1 slope %.4f in "
                    "[0.90, 1.10]",
                    s.l2, s.h1));
        auto wide = projection_slopes({16, 32, 64});
        info(fmt("same study on meshes 16-64: L2 slope %.4f, H1 slope %.4f",
                 wide.l2, wide.h1));
    }

    // 5. interface geometric resolution shrinks at second order in h
    {
        std::vector<double> hs, lambdas;
        for (int n : {8, 16, 32, 64}) {
            Mesh m = generate_mesh({1.0, 0.5}, n);
            hs.push_back(m.mesh_size);
            lambdas.push_back(interface_resolution(m));
        }
        double slope = fit_slope(hs, lambdas);
        bool ok = slope > 1.85 && slope < 2.15;
        verdict(5, "interface resolution refines at second order",
                ok, fmt("slope %.4f, band [1.85, 2.15]", slope));
    }

    // 6. the discrete energy identity closes along both manufactured runs
    {
        double worst = 0.0;
        for (auto c : {case_A(), case_B()}) {
            Mesh m = generate_mesh(c.geom, 16);
            auto dofs = DofMap::interior(m);
            const DirichletData* bc = c.homogeneous ? nullptr : &c.dirichlet;
            auto traj = run_fully_discrete(m, c.coeff, dofs, c.forcing,
                                           c.datum, {1.0, 32}, {}, bc);
            auto a_sigma = assemble_stiffness(m, c.coeff, Form::sigma, dofs);
            auto a_eps = assemble_stiffness(m, c.coeff, Form::eps, dofs);
            auto res = energy_identity_residual(a_sigma, a_eps, {1.0, 32}, traj);
            worst = std::max(worst,
                             *std::max_element(res.begin(), res.end()));
        }
        verdict(6, "energy identity residual below 1e-8 on both cases",
                worst < 1e-8, fmt("max residual %.3e", worst));
    }

    // 7. zero conductivity and zero forcing conserve the state exactly
    {
        Mesh m = generate_mesh({1.0, 0.5}, 16);
        auto dofs = DofMap::interior(m);
        CoefficientField c{0.0, 0.0, 1.0, 0.1};
        InitialDatum d;
        d.u0 = [](Vec2 p, int) { return (1 - p.x * p.x) * (1 - p.y * p.y); };
        Forcing none;
        auto traj = run_fully_discrete(m, c, dofs, none, d, {1.0, 16});
        double scale = 0.0;
        for (double v : traj.states[0]) scale = std::max(scale, std::abs(v));
        double drift = 0.0;
        for (const auto& s : traj.states)
            for (std::size_t i = 0; i < s.size(); ++i)
                drift = std::max(drift, std::abs(s[i] - traj.states[0][i]));
        verdict(7, "pure capacitive run conserves the state",
                scale > 0.0 && drift / scale < 1e-8,
                fmt("relative drift %.3e", drift / scale));
    }

    // 8. the iterative stepper matches a dense-arithmetic replay
    {
        auto ca = case_A();
        Mesh m = generate_mesh(ca.geom, 4);
        auto dofs = DofMap::interior(m);
        TimeGrid grid{1.0, 16};
        auto traj =
            run_fully_discrete(m, ca.coeff, dofs, ca.forcing, ca.datum, grid);
        auto a_sigma = assemble_stiffness(m, ca.coeff, Form::sigma, dofs);
        auto a_eps = assemble_stiffness(m, ca.coeff, Form::eps, dofs);
        auto dstep = to_dense(add_scaled(a_sigma, a_eps, 1.0 / grid.tau()));
        std::vector<double> u = traj.states[0];
        double worst = 0.0;
        for (int n = 1; n <= grid.steps; ++n) {
            auto rhs = a_eps.multiply(u);
            for (int i = 0; i < a_eps.n; ++i)
                rhs[i] = traj.loads[n - 1][i] + rhs[i] / grid.tau();
            u = dense_solve(dstep, rhs);
            for (int i = 0; i < a_eps.n; ++i)
                worst = std::max(worst, std::abs(u[i] - traj.states[n][i]));
        }
        verdict(8, "stepping agrees with a dense replay to 1e-10",
                worst < 1e-10, fmt("max deviation %.3e", worst));
    }

    // 9. both manufactured cases satisfy their interface conditions
    {
        auto ga = manufactured_gate(case_A());
        auto gb = manufactured_gate(case_B());
        double jump = std::max({ga.max_value_jump, ga.max_flux_jump,
                                gb.max_value_jump, gb.max_flux_jump});
        double res = std::max(ga.max_strong_residual, gb.max_strong_residual);
        verdict(9, "manufactured cases pass the interface gates",
                ga.pass() && gb.pass(),
                fmt("max jump %.3e (tol 1e-10), max residual %.3e (tol 1e-8)",
                    jump, res));
    }

    // 10. the generated mesh family is valid at the 15 degree threshold
    {
        bool ok = true;
        double min_angle = 90.0;
        for (int n : {8, 16, 32, 64}) {
            Mesh m = generate_mesh({1.0, 0.5}, n);
            auto rep = validate_mesh(m, 15.0);
            ok = ok && rep.ok() && rep.violations.empty();
            min_angle = std::min(min_angle, rep.min_angle);
        }
        verdict(10, "meshes 8-64 pass every structural validation at 15 deg",
                ok, fmt("worst minimum angle %.2f deg", min_angle));
    }

    std::printf("-----------------------\n");
    std::printf("%d/10 criteria pass\n", 10 - failures);
    return failures;
}
