#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermelt {

// Sparse matrix in compressed-row storage with a fixed symmetric sparsity
// pattern. The pattern is built once from the mesh connectivity; assembly
// only writes into existing entries.
class CsrMatrix {
public:
    CsrMatrix() = default;

    // cols[i] lists the column indices of row i (need not be sorted or unique).
    static CsrMatrix from_pattern(int n, const std::vector<std::vector<int>>& cols) {
        CsrMatrix m;
        m.n_ = n;
        m.row_ptr_.assign(static_cast<size_t>(n) + 1, 0);
        std::vector<int> sorted;
        for (int i = 0; i < n; ++i) {
            sorted = cols[static_cast<size_t>(i)];
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            for (int c : sorted) {
                if (c < 0 || c >= n)
                    throw std::invalid_argument("CsrMatrix: column index out of range");
                m.col_idx_.push_back(c);
            }
            m.row_ptr_[static_cast<size_t>(i) + 1] = static_cast<int>(m.col_idx_.size());
        }
        m.val_.assign(m.col_idx_.size(), 0.0);
        return m;
    }

    int rows() const { return n_; }
    void set_zero() { std::fill(val_.begin(), val_.end(), 0.0); }

    double& at(int i, int j) {
        int k = find(i, j);
        if (k < 0)
            throw std::out_of_range("CsrMatrix: entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") not in pattern");
        return val_[static_cast<size_t>(k)];
    }

    double get(int i, int j) const {
        int k = find(i, j);
        return k < 0 ? 0.0 : val_[static_cast<size_t>(k)];
    }

    void add(int i, int j, double v) { at(i, j) += v; }

    int row_begin(int i) const { return row_ptr_[static_cast<size_t>(i)]; }
    int row_end(int i) const { return row_ptr_[static_cast<size_t>(i) + 1]; }
    int col(int k) const { return col_idx_[static_cast<size_t>(k)]; }
    double value(int k) const { return val_[static_cast<size_t>(k)]; }
    double& value(int k) { return val_[static_cast<size_t>(k)]; }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        assert(static_cast<int>(x.size()) == n_);
        y.assign(static_cast<size_t>(n_), 0.0);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int k = row_begin(i); k < row_end(i); ++k)
                s += val_[static_cast<size_t>(k)] * x[static_cast<size_t>(col(k))];
            y[static_cast<size_t>(i)] = s;
        }
    }

    // Largest |col - row| over stored entries; 1 means tridiagonal.
    int bandwidth() const {
        int b = 0;
        for (int i = 0; i < n_; ++i)
            for (int k = row_begin(i); k < row_end(i); ++k)
                b = std::max(b, std::abs(col(k) - i));
        return b;
    }

private:
    int find(int i, int j) const {
        int lo = row_begin(i), hi = row_end(i);
        auto first = col_idx_.begin() + lo;
        auto last = col_idx_.begin() + hi;
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return -1;
        return static_cast<int>(it - col_idx_.begin());
    }

    int n_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> val_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Direct solve for tridiagonal systems (Thomas algorithm). The matrix must
// have bandwidth <= 1; this is the 1D mesh case.
inline std::vector<double> solve_tridiagonal(const CsrMatrix& a, const std::vector<double>& rhs) {
    const int n = a.rows();
    if (a.bandwidth() > 1)
        throw std::invalid_argument("solve_tridiagonal: matrix is not tridiagonal");
    std::vector<double> c(static_cast<size_t>(n), 0.0);  // superdiagonal after elimination
    std::vector<double> d(static_cast<size_t>(n), 0.0);  // rhs after elimination
    double diag = a.get(0, 0);
    if (diag == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    c[0] = (n > 1 ? a.get(0, 1) : 0.0) / diag;
    d[0] = rhs[0] / diag;
    for (int i = 1; i < n; ++i) {
        const double lower = a.get(i, i - 1);
        const double denom = a.get(i, i) - lower * c[static_cast<size_t>(i) - 1];
        if (denom == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
        if (i + 1 < n) c[static_cast<size_t>(i)] = a.get(i, i + 1) / denom;
        d[static_cast<size_t>(i)] =
            (rhs[static_cast<size_t>(i)] - lower * d[static_cast<size_t>(i) - 1]) / denom;
    }
    std::vector<double> x(static_cast<size_t>(n));
    x[static_cast<size_t>(n) - 1] = d[static_cast<size_t>(n) - 1];
    for (int i = n - 2; i >= 0; --i)
        x[static_cast<size_t>(i)] =
            d[static_cast<size_t>(i)] - c[static_cast<size_t>(i)] * x[static_cast<size_t>(i) + 1];
    return x;
}

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  // final |r| / |b|
    bool converged = false;
};

// Conjugate gradients with Jacobi preconditioning, for the symmetric positive
// definite systems produced by the heat assembly on 3D meshes.
inline CgResult solve_cg_jacobi(const CsrMatrix& a, const std::vector<double>& b,
                                double rel_tol = 1e-10, int max_iterations = 20000) {
    const int n = a.rows();
    CgResult out;
    out.x.assign(static_cast<size_t>(n), 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    std::vector<double> inv_diag(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double d = a.get(i, i);
        if (d <= 0.0) throw std::runtime_error("solve_cg_jacobi: non-positive diagonal");
        inv_diag[static_cast<size_t>(i)] = 1.0 / d;
    }
    std::vector<double> r = b;
    std::vector<double> z(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
    std::vector<double> p = z;
    std::vector<double> ap(static_cast<size_t>(n));
    double rz = dot(r, z);
    for (int it = 0; it < max_iterations; ++it) {
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (pap <= 0.0) throw std::runtime_error("solve_cg_jacobi: matrix not positive definite");
        const double alpha = rz / pap;
        for (int i = 0; i < n; ++i) {
            out.x[static_cast<size_t>(i)] += alpha * p[static_cast<size_t>(i)];
            r[static_cast<size_t>(i)] -= alpha * ap[static_cast<size_t>(i)];
        }
        out.iterations = it + 1;
        out.residual = norm2(r) / bnorm;
        if (out.residual < rel_tol) {
            out.converged = true;
            return out;
        }
        for (int i = 0; i < n; ++i) z[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
    }
    return out;
}

}  // namespace thermelt
