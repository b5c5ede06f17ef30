#pragma once

/// @file sparse.hpp
/// @brief Compressed-sparse-row matrices with a fixed symmetric pattern.
///
/// Patterns are built once from an adjacency list; columns are strictly
/// increasing within each row. Assembly accumulates in a canonical order so
/// that A(i,j) and A(j,i) receive bit-identical sums.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "capfem/error.hpp"

namespace capfem {

struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr; // size n+1
    std::vector<int> col;     // strictly increasing per row
    std::vector<double> val;

    /// Builds the zero matrix with the union pattern of the given index pairs
    /// (both orientations are inserted; diagonals always present).
    static SparseMatrix from_pairs(int n,
                                   const std::vector<std::array<int, 2>>& pairs) {
        std::vector<std::vector<int>> adj(n);
        for (int i = 0; i < n; ++i) adj[i].push_back(i);
        for (const auto& p : pairs) {
            adj[p[0]].push_back(p[1]);
            adj[p[1]].push_back(p[0]);
        }
        SparseMatrix m;
        m.n = n;
        m.row_ptr.assign(n + 1, 0);
        for (int i = 0; i < n; ++i) {
            auto& row = adj[i];
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
            m.row_ptr[i + 1] = m.row_ptr[i] + static_cast<int>(row.size());
        }
        m.col.reserve(m.row_ptr[n]);
        for (int i = 0; i < n; ++i)
            m.col.insert(m.col.end(), adj[i].begin(), adj[i].end());
        m.val.assign(m.col.size(), 0.0);
        return m;
    }

    /// Reference into the stored pattern; missing entries are an error.
    double& at(int i, int j) {
        auto first = col.begin() + row_ptr[i];
        auto last = col.begin() + row_ptr[i + 1];
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j)
            throw Error(ErrorKind::invalid_argument,
                        "sparse: entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ") is outside the pattern");
        return val[it - col.begin()];
    }

    double get(int i, int j) const {
        auto first = col.begin() + row_ptr[i];
        auto last = col.begin() + row_ptr[i + 1];
        auto it = std::lower_bound(first, last, j);
        return (it == last || *it != j) ? 0.0 : val[it - col.begin()];
    }

    void multiply(const double* x, double* y) const {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                s += val[k] * x[col[k]];
            y[i] = s;
        }
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != n)
            throw Error(ErrorKind::invalid_argument,
                        "sparse: dimension mismatch in multiply");
        std::vector<double> y(n);
        multiply(x.data(), y.data());
        return y;
    }

    /// Exact (bitwise) symmetry of pattern and values.
    bool is_symmetric() const {
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                int j = col[k];
                if (j < i) continue;
                if (get(j, i) != val[k]) return false;
            }
        return true;
    }
};

/// x^T A y for vectors matching the matrix dimension.
inline double bilinear(const SparseMatrix& a, const std::vector<double>& x,
                       const std::vector<double>& y) {
    if (static_cast<int>(x.size()) != a.n ||
        static_cast<int>(y.size()) != a.n)
        throw Error(ErrorKind::invalid_argument,
                    "sparse: dimension mismatch in bilinear form");
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) {
        double row = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            row += a.val[k] * y[a.col[k]];
        s += x[i] * row;
    }
    return s;
}

/// A + c * B over a shared pattern (used for the time-step operator).
inline SparseMatrix add_scaled(const SparseMatrix& a, const SparseMatrix& b,
                               double c) {
    if (a.n != b.n || a.row_ptr != b.row_ptr || a.col != b.col)
        throw Error(ErrorKind::invalid_argument,
                    "sparse: add_scaled requires an identical pattern");
    SparseMatrix m = a;
    for (std::size_t k = 0; k < m.val.size(); ++k) m.val[k] += c * b.val[k];
    return m;
}

/// Matrix-market coordinate output (symmetric storage, lower triangle).
inline void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
    long nnz_lower = 0;
    for (int i = 0; i < a.n; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col[k] <= i) ++nnz_lower;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << a.n << " " << a.n << " " << nnz_lower << "\n";
    char buf[64];
    for (int i = 0; i < a.n; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            if (a.col[k] <= i) {
                std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1,
                              a.col[k] + 1, a.val[k]);
                out << buf;
            }
}

} // namespace capfem
