#pragma once

/// @file solver.hpp
/// @brief Conjugate gradients with optional diagonal preconditioning, plus a
///        dense LU direct solve used as the independent oracle path.

#include <cmath>
#include <string>
#include <vector>

#include "capfem/error.hpp"
#include "capfem/sparse.hpp"

namespace capfem {

struct SolverConfig {
    double tolerance = 1e-12; // relative residual target, in (0, 1)
    int max_iterations = 0;   // 0 means 10 * dimension
    bool diagonal_preconditioner = true;

    void validate() const {
        if (!(tolerance > 0.0) || !(tolerance < 1.0))
            throw Error(ErrorKind::invalid_argument,
                        "solver: tolerance must lie in (0, 1)");
        if (max_iterations < 0)
            throw Error(ErrorKind::invalid_argument,
                        "solver: max_iterations must be nonnegative");
    }
};

struct SolveResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0; // true relative residual ||b - Ax|| / ||b||
};

namespace detail {

inline double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_v(const std::vector<double>& a) {
    return std::sqrt(dot_v(a, a));
}

} // namespace detail

/// Preconditioned conjugate gradients for symmetric positive definite
/// systems. Converges when the true relative residual reaches the tolerance;
/// throws SolveFailure (carrying the best iterate and the residual history)
/// otherwise. Deterministic: no randomization, fixed evaluation order.
inline SolveResult cg_solve(const SparseMatrix& a, const std::vector<double>& b,
                            const SolverConfig& cfg = {},
                            const std::vector<double>* x0 = nullptr) {
    cfg.validate();
    const int n = a.n;
    if (static_cast<int>(b.size()) != n)
        throw Error(ErrorKind::invalid_argument,
                    "cg_solve: right-hand side size does not match the matrix");
    if (x0 && static_cast<int>(x0->size()) != n)
        throw Error(ErrorKind::invalid_argument,
                    "cg_solve: initial guess size does not match the matrix");
    for (double v : b)
        if (!std::isfinite(v))
            throw Error(ErrorKind::invalid_argument,
                        "cg_solve: right-hand side contains non-finite values");

    const double bnorm = detail::norm_v(b);
    if (bnorm == 0.0) return {std::vector<double>(n, 0.0), 0, 0.0};

    std::vector<double> inv_diag;
    if (cfg.diagonal_preconditioner) {
        inv_diag.resize(n);
        for (int i = 0; i < n; ++i) {
            double d = a.get(i, i);
            if (!(d > 0.0))
                throw Error(ErrorKind::solver,
                            "cg_solve: nonpositive diagonal entry at row " +
                                std::to_string(i) +
                                "; matrix is not positive definite",
                            i);
            inv_diag[i] = 1.0 / d;
        }
    }

    const int max_iter = cfg.max_iterations > 0 ? cfg.max_iterations : 10 * n;
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    std::vector<double> r(n), z(n), p(n), ap(n);
    a.multiply(x.data(), ap.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];

    std::vector<double> history;
    std::vector<double> best_x = x;
    double best_res = detail::norm_v(r) / bnorm;
    history.push_back(best_res);
    if (best_res <= cfg.tolerance)
        return {std::move(x), 0, best_res};

    auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        if (inv_diag.empty())
            zz = rr;
        else
            for (int i = 0; i < n; ++i) zz[i] = inv_diag[i] * rr[i];
    };
    precondition(r, z);
    p = z;
    double rz = detail::dot_v(r, z);

    int it = 0;
    while (it < max_iter) {
        ++it;
        a.multiply(p.data(), ap.data());
        double pap = detail::dot_v(p, ap);
        if (!(pap > 0.0) || !std::isfinite(pap))
            throw SolveFailure(
                "cg_solve: curvature p^T A p = " + std::to_string(pap) +
                    " at iteration " + std::to_string(it) +
                    "; matrix is not positive definite",
                std::move(best_x), std::move(history));
        double alpha = rz / pap;
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        double rel = detail::norm_v(r) / bnorm;
        history.push_back(rel);
        if (!std::isfinite(rel))
            throw SolveFailure("cg_solve: residual diverged to a non-finite "
                               "value at iteration " + std::to_string(it),
                               std::move(best_x), std::move(history));
        if (rel < best_res) {
            best_res = rel;
            best_x = x;
        }
        if (rel <= cfg.tolerance) {
            // recurrence residual reached the target; accept only if the true
            // residual agrees (guards against drift in long runs)
            a.multiply(x.data(), ap.data());
            double true_rel = 0.0;
            for (int i = 0; i < n; ++i) {
                double d = b[i] - ap[i];
                true_rel += d * d;
            }
            true_rel = std::sqrt(true_rel) / bnorm;
            if (true_rel <= cfg.tolerance * 4.0)
                return {std::move(x), it, true_rel};
            for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];
            precondition(r, z);
            p = z;
            rz = detail::dot_v(r, z);
            continue;
        }
        precondition(r, z);
        double rz_next = detail::dot_v(r, z);
        double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveFailure("cg_solve: no convergence within " +
                           std::to_string(max_iter) + " iterations (best " +
                           std::to_string(best_res) + ", target " +
                           std::to_string(cfg.tolerance) + ")",
                       std::move(best_x), std::move(history));
}

struct DenseMatrix {
    int n = 0;
    std::vector<double> a; // row-major

    explicit DenseMatrix(int n = 0) : n(n), a(static_cast<std::size_t>(n) * n, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

inline DenseMatrix to_dense(const SparseMatrix& s) {
    DenseMatrix d(s.n);
    for (int i = 0; i < s.n; ++i)
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k)
            d(i, s.col[k]) = s.val[k];
    return d;
}

/// Direct solve by LU with partial pivoting; the oracle path for desk-scale
/// systems (dimension capped at 2000). Throws on singular matrices.
inline std::vector<double> dense_solve(DenseMatrix a, std::vector<double> b) {
    const int n = a.n;
    if (n > 2000)
        throw Error(ErrorKind::invalid_argument,
                    "dense_solve: dimension " + std::to_string(n) +
                        " exceeds the 2000 cap");
    if (static_cast<int>(b.size()) != n)
        throw Error(ErrorKind::invalid_argument,
                    "dense_solve: right-hand side size does not match");
    std::vector<int> piv(n);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                p = i;
            }
        if (!(best > 0.0))
            throw Error(ErrorKind::solver, "dense_solve: singular matrix", k);
        piv[k] = p;
        if (p != k)
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
        for (int i = k + 1; i < n; ++i) {
            double m = a(i, k) / a(k, k);
            a(i, k) = m;
            for (int j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
        }
    }
    for (int k = 0; k < n; ++k) {
        if (piv[k] != k) std::swap(b[k], b[piv[k]]);
        for (int i = k + 1; i < n; ++i) b[i] -= a(i, k) * b[k];
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) b[i] -= a(i, j) * b[j];
        b[i] /= a(i, i);
    }
    return b;
}

} // namespace capfem
