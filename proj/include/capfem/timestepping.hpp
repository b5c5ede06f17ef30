#pragma once

/// @file timestepping.hpp
/// @brief Backward-Euler time stepping of the capacitive interface problem,
///        the per-step energy identity probe, and a classical 4-stage
///        order-4 reference integrator for the semi-discrete system.
///
/// Fully discrete step (unknowns at interior vertices):
///   (A_sigma + A_eps / tau) u^n = f^n + (A_eps / tau) u^{n-1},
/// where f^n samples the forcing at t^n and, for nonzero Dirichlet data,
/// carries the liftings  - C_sigma b(t^n) - C_eps (b(t^n) - b(t^{n-1}))/tau.
///
/// Taking the inner product of the step equation with 2 tau d, where
/// d = (u^n - u^{n-1}) / tau, gives the exact algebraic identity
///   a1(u^n,u^n) - a1(u^{n-1},u^{n-1}) + tau^2 a1(d,d) + 2 tau a2(d,d)
///     = 2 tau (f^n, d),
/// which energy_identity_residual checks step by step.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "capfem/assembly.hpp"
#include "capfem/error.hpp"
#include "capfem/mesh.hpp"
#include "capfem/projection.hpp"
#include "capfem/pulses.hpp"
#include "capfem/solver.hpp"
#include "capfem/sparse.hpp"
#include "capfem/timegrid.hpp"

namespace capfem {

/// Forcing as a sum of separable terms p_k(t) * g_k(x) plus an optional
/// general closure assembled per step. Separable spatial parts are assembled
/// once per run; the order-4 reference integrates polynomial p_k of degree up
/// to 3 exactly under this representation.
struct Forcing {
    struct Term {
        std::function<double(double)> p;
        ScalarFn g;
    };
    std::vector<Term> terms;
    std::function<double(double, Vec2, int)> general;
    bool h1_in_time = true;

    static Forcing from_separable(const SeparableForcing& f) {
        Forcing out;
        if (f.general) {
            out.general = f.general;
        } else {
            PulseShape pulse = f.pulse;
            ScalarSpatialFn profile = f.profile;
            out.terms.push_back(
                {[pulse](double t) { return pulse.value(t); },
                 [profile](Vec2 x, int tag) { return profile(x, tag); }});
        }
        out.h1_in_time = f.pulse.is_h1_in_time();
        return out;
    }
};

/// Time-dependent Dirichlet trace and its time derivative (needed by the
/// lifting of the capacitive term).
struct DirichletData {
    std::function<double(double, Vec2)> value;
    std::function<double(double, Vec2)> dt_value;
};

struct SolveRecord {
    int iterations = 0;
    double residual = 0.0;
};

struct Trajectory {
    TimeGrid grid;
    std::vector<std::vector<double>> states; // N+1 coefficient vectors
    std::vector<std::vector<double>> loads;  // N effective right-hand loads
    std::vector<SolveRecord> records;        // N
    std::vector<double> initial;             // copy of states[0]
    std::string init_mode;                   // "projection" | "interpolation"
    bool h1_warning = false;                 // forcing not H1 in time
};

/// One backward-Euler step: solves (A_sigma + A_eps/tau) u = f_n +
/// (A_eps/tau) u_prev. Standalone form used by tests and oracles; the run
/// driver below prepares the step operator once instead.
inline std::vector<double>
backward_euler_step(const SparseMatrix& a_sigma, const SparseMatrix& a_eps,
                    double tau, const std::vector<double>& u_prev,
                    const std::vector<double>& f_n, const SolverConfig& cfg = {},
                    SolveRecord* record = nullptr) {
    if (!(tau > 0.0))
        throw Error(ErrorKind::invalid_argument,
                    "backward_euler_step: tau must be positive");
    if (static_cast<int>(u_prev.size()) != a_sigma.n ||
        static_cast<int>(f_n.size()) != a_sigma.n)
        throw Error(ErrorKind::invalid_argument,
                    "backward_euler_step: vector sizes do not match");
    SparseMatrix step = add_scaled(a_sigma, a_eps, 1.0 / tau);
    auto rhs = a_eps.multiply(u_prev);
    for (int i = 0; i < a_eps.n; ++i) rhs[i] = f_n[i] + rhs[i] / tau;
    auto result = cg_solve(step, rhs, cfg, &u_prev);
    if (record) *record = {result.iterations, result.residual};
    return std::move(result.x);
}

namespace detail {

struct LoadSampler {
    const Mesh& mesh;
    const DofMap& dofs;
    const Forcing& forcing;
    std::vector<std::vector<double>> term_loads; // preassembled spatial parts

    LoadSampler(const Mesh& mesh, const DofMap& dofs, const Forcing& forcing)
        : mesh(mesh), dofs(dofs), forcing(forcing) {
        for (const auto& term : forcing.terms)
            term_loads.push_back(assemble_load(mesh, term.g, dofs));
    }

    std::vector<double> operator()(double t) const {
        std::vector<double> f(dofs.n_dofs, 0.0);
        for (std::size_t k = 0; k < forcing.terms.size(); ++k) {
            double p = forcing.terms[k].p(t);
            const auto& g = term_loads[k];
            for (int i = 0; i < dofs.n_dofs; ++i) f[i] += p * g[i];
        }
        if (forcing.general) {
            auto extra = assemble_load(
                mesh,
                [&](Vec2 x, int tag) { return forcing.general(t, x, tag); },
                dofs);
            for (int i = 0; i < dofs.n_dofs; ++i) f[i] += extra[i];
        }
        return f;
    }
};

struct BoundarySampler {
    const Mesh& mesh;
    const DofMap& dofs;
    const DirichletData* data;

    bool active() const { return data && data->value; }

    // per-vertex vector with values only at constrained vertices
    std::vector<double> values(double t) const {
        std::vector<double> b(mesh.vertices.size(), 0.0);
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            if (dofs.vertex_to_dof[v] < 0)
                b[v] = data->value(t, mesh.vertices[v]);
        return b;
    }
    std::vector<double> dt_values(double t) const {
        if (!data->dt_value)
            throw Error(ErrorKind::invalid_argument,
                        "run: time-dependent boundary data needs dt_value");
        std::vector<double> b(mesh.vertices.size(), 0.0);
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
            if (dofs.vertex_to_dof[v] < 0)
                b[v] = data->dt_value(t, mesh.vertices[v]);
        return b;
    }
};

inline std::vector<double> initial_state(const Mesh& mesh,
                                         const CoefficientField& coeff,
                                         const DofMap& dofs,
                                         const InitialDatum& datum,
                                         const SolverConfig& cfg,
                                         std::string& mode) {
    if (datum.fstar) {
        mode = "projection";
        return qh_project(mesh, coeff, dofs, datum, cfg);
    }
    mode = "interpolation";
    return nodal_interpolate(mesh, dofs, datum.u0);
}

} // namespace detail

/// Runs the fully discrete scheme over the whole grid. The step operator is
/// assembled and preconditioned once; every solve warm-starts from the
/// previous state. Solver failures are rethrown tagged with the step index.
inline Trajectory run_fully_discrete(const Mesh& mesh,
                                     const CoefficientField& coeff,
                                     const DofMap& dofs, const Forcing& forcing,
                                     const InitialDatum& datum,
                                     const TimeGrid& grid,
                                     const SolverConfig& cfg = {},
                                     const DirichletData* dirichlet = nullptr) {
    grid.validate();
    coeff.validate();
    const double tau = grid.tau();

    Trajectory traj;
    traj.grid = grid;
    traj.h1_warning = !forcing.h1_in_time;
    traj.states.reserve(grid.steps + 1);
    traj.loads.reserve(grid.steps);
    traj.records.reserve(grid.steps);

    auto a_sigma = assemble_stiffness(mesh, coeff, Form::sigma, dofs);
    auto a_eps = assemble_stiffness(mesh, coeff, Form::eps, dofs);
    SparseMatrix step = add_scaled(a_sigma, a_eps, 1.0 / tau);

    traj.states.push_back(
        detail::initial_state(mesh, coeff, dofs, datum, cfg, traj.init_mode));
    traj.initial = traj.states[0];

    detail::LoadSampler load(mesh, dofs, forcing);
    detail::BoundarySampler boundary{mesh, dofs, dirichlet};
    std::vector<double> b_prev;
    if (boundary.active()) b_prev = boundary.values(0.0);

    for (int n = 1; n <= grid.steps; ++n) {
        double t = grid.node(n);
        auto f = load(t);
        if (boundary.active()) {
            auto b = boundary.values(t);
            std::vector<double> db(b.size());
            for (std::size_t i = 0; i < b.size(); ++i)
                db[i] = (b[i] - b_prev[i]) / tau;
            apply_dirichlet(mesh, coeff, Form::sigma, dofs, b, f);
            apply_dirichlet(mesh, coeff, Form::eps, dofs, db, f);
            b_prev = std::move(b);
        }
        const auto& u_prev = traj.states.back();
        auto rhs = a_eps.multiply(u_prev);
        for (int i = 0; i < a_eps.n; ++i) rhs[i] = f[i] + rhs[i] / tau;
        try {
            auto result = cg_solve(step, rhs, cfg, &u_prev);
            traj.records.push_back({result.iterations, result.residual});
            traj.states.push_back(std::move(result.x));
        } catch (const SolveFailure& failure) {
            throw Error(ErrorKind::solver,
                        "run: step " + std::to_string(n) + " of " +
                            std::to_string(grid.steps) +
                            " failed: " + failure.what(),
                        n);
        }
        traj.loads.push_back(std::move(f));
    }
    return traj;
}

/// Per-step relative defect of the discrete energy identity (see file brief).
/// Uses the trajectory's recorded effective loads unless an explicit load
/// sequence is supplied. A zero trajectory yields zeros. Scaled by the
/// largest term in the identity at each step.
inline std::vector<double>
energy_identity_residual(const SparseMatrix& a_sigma, const SparseMatrix& a_eps,
                         const TimeGrid& grid, const Trajectory& traj,
                         const std::vector<std::vector<double>>* loads_in = nullptr) {
    const auto& loads = loads_in ? *loads_in : traj.loads;
    if (static_cast<int>(traj.states.size()) != grid.steps + 1 ||
        static_cast<int>(loads.size()) != grid.steps)
        throw Error(ErrorKind::invalid_argument,
                    "energy_identity_residual: trajectory does not match grid");
    const double tau = grid.tau();
    std::vector<double> out(grid.steps, 0.0);
    const int n_dofs = a_sigma.n;
    std::vector<double> d(n_dofs);
    for (int n = 1; n <= grid.steps; ++n) {
        const auto& u1 = traj.states[n];
        const auto& u0 = traj.states[n - 1];
        for (int i = 0; i < n_dofs; ++i) d[i] = (u1[i] - u0[i]) / tau;
        double t_new = bilinear(a_sigma, u1, u1);
        double t_old = bilinear(a_sigma, u0, u0);
        double t_diff = tau * tau * bilinear(a_sigma, d, d);
        double t_eps = 2.0 * tau * bilinear(a_eps, d, d);
        double t_load = 0.0;
        for (int i = 0; i < n_dofs; ++i) t_load += loads[n - 1][i] * d[i];
        t_load *= 2.0 * tau;
        double defect = t_new - t_old + t_diff + t_eps - t_load;
        double scale = std::max({std::abs(t_new), std::abs(t_old),
                                 std::abs(t_diff), std::abs(t_eps),
                                 std::abs(t_load)});
        out[n - 1] = scale > 0.0 ? std::abs(defect) / scale : 0.0;
    }
    return out;
}

/// Classical 4-stage order-4 integration of the semi-discrete system
///   A_eps u' = F(t) - A_sigma u - liftings(t),
/// run with `substeps` uniform internal steps per grid interval and sampled
/// at the grid nodes. Every stage solves one SPD system with A_eps. Serves
/// as the reference when measuring the backward-Euler time error.
inline Trajectory run_semidiscrete_reference(
    const Mesh& mesh, const CoefficientField& coeff, const DofMap& dofs,
    const Forcing& forcing, const InitialDatum& datum, const TimeGrid& grid,
    int substeps, const SolverConfig& cfg = {},
    const DirichletData* dirichlet = nullptr) {
    grid.validate();
    if (substeps < 1)
        throw Error(ErrorKind::invalid_argument,
                    "reference run: substeps must be at least 1");

    auto a_sigma = assemble_stiffness(mesh, coeff, Form::sigma, dofs);
    auto a_eps = assemble_stiffness(mesh, coeff, Form::eps, dofs);
    detail::LoadSampler load(mesh, dofs, forcing);
    detail::BoundarySampler boundary{mesh, dofs, dirichlet};

    Trajectory traj;
    traj.grid = grid;
    traj.h1_warning = !forcing.h1_in_time;
    traj.states.reserve(grid.steps + 1);

    std::vector<double> u =
        detail::initial_state(mesh, coeff, dofs, datum, cfg, traj.init_mode);
    traj.states.push_back(u);
    traj.initial = u;

    std::vector<double> warm = u;
    auto rate = [&](double t, const std::vector<double>& y) {
        auto rhs = load(t);
        auto ay = a_sigma.multiply(y);
        for (int i = 0; i < a_sigma.n; ++i) rhs[i] -= ay[i];
        if (boundary.active()) {
            auto b = boundary.values(t);
            auto db = boundary.dt_values(t);
            apply_dirichlet(mesh, coeff, Form::sigma, dofs, b, rhs);
            apply_dirichlet(mesh, coeff, Form::eps, dofs, db, rhs);
        }
        auto result = cg_solve(a_eps, rhs, cfg, &warm);
        warm = result.x;
        return std::move(result.x);
    };

    const double tau = grid.tau();
    const double dt = tau / substeps;
    std::vector<double> y1(dofs.n_dofs), k1, k2, k3, k4;
    for (int n = 1; n <= grid.steps; ++n) {
        double t0 = grid.node(n - 1);
        for (int s = 0; s < substeps; ++s) {
            double t = t0 + s * dt;
            k1 = rate(t, u);
            for (int i = 0; i < dofs.n_dofs; ++i)
                y1[i] = u[i] + 0.5 * dt * k1[i];
            k2 = rate(t + 0.5 * dt, y1);
            for (int i = 0; i < dofs.n_dofs; ++i)
                y1[i] = u[i] + 0.5 * dt * k2[i];
            k3 = rate(t + 0.5 * dt, y1);
            for (int i = 0; i < dofs.n_dofs; ++i) y1[i] = u[i] + dt * k3[i];
            k4 = rate(t + dt, y1);
            for (int i = 0; i < dofs.n_dofs; ++i)
                u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        traj.states.push_back(u);
    }
    return traj;
}

} // namespace capfem
