#pragma once

// Dense row-major matrices, partial-pivoting LU and the handful of vector
// kernels used by the Newton and GMRES solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "csnewton/errors.hpp"

namespace csnewton {

using RVector = std::vector<double>;

[[nodiscard]] inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Scaled 2-norm; avoids overflow for large entries.
[[nodiscard]] inline double norm2(std::span<const double> a) {
    double scale = 0.0;
    double ssq = 1.0;
    for (double v : a) {
        if (v == 0.0) continue;
        const double av = std::abs(v);
        if (scale < av) {
            ssq = 1.0 + ssq * (scale / av) * (scale / av);
            scale = av;
        } else {
            ssq += (av / scale) * (av / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

[[nodiscard]] inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

[[nodiscard]] inline RVector difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch("difference: length mismatch");
    RVector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

[[nodiscard]] inline bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0) throw InvalidArgument("DenseMatrix: dimensions must be positive");
    }

    // Row-major initializer, e.g. DenseMatrix::from_rows({{1, 2}, {3, 4}}).
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        DenseMatrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw DimensionMismatch("DenseMatrix::from_rows: ragged rows");
            std::copy(row.begin(), row.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
            ++i;
        }
        return m;
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] double max_abs() const { return norm_inf(data_); }

    [[nodiscard]] RVector apply(std::span<const double> x) const {
        if (x.size() != cols_) throw DimensionMismatch("DenseMatrix::apply: length mismatch");
        RVector y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
        return y;
    }

    [[nodiscard]] DenseMatrix operator*(const DenseMatrix& b) const {
        if (cols_ != b.rows_) throw DimensionMismatch("DenseMatrix product: inner dimension mismatch");
        DenseMatrix c(rows_, b.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double aik = (*this)(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    RVector data_;
};

// P*A = L*U packed in one matrix; L has an implicit unit diagonal.
// perm[i] is the original row placed at position i.
struct LuFactors {
    DenseMatrix lu;
    std::vector<std::size_t> perm;
    int sign = 1;

    [[nodiscard]] std::size_t dim() const noexcept { return lu.rows(); }

    [[nodiscard]] DenseMatrix lower() const {
        const std::size_t n = dim();
        DenseMatrix l(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) l(i, j) = lu(i, j);
            l(i, i) = 1.0;
        }
        return l;
    }

    [[nodiscard]] DenseMatrix upper() const {
        const std::size_t n = dim();
        DenseMatrix u(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) u(i, j) = lu(i, j);
        return u;
    }

    // Rows of a reordered by the pivot permutation.
    [[nodiscard]] DenseMatrix permute_rows(const DenseMatrix& a) const {
        DenseMatrix p(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.rows(); ++i)
            std::copy(a.row(perm[i]).begin(), a.row(perm[i]).end(), p.row(i).begin());
        return p;
    }

    [[nodiscard]] double determinant() const {
        double d = sign;
        for (std::size_t i = 0; i < dim(); ++i) d *= lu(i, i);
        return d;
    }
};

inline constexpr double kSingularPivotRatio = 1e-14;

[[nodiscard]] inline LuFactors lu_factor(DenseMatrix a) {
    if (!a.square()) throw DimensionMismatch("lu_factor: matrix must be square");
    if (!all_finite(a.data())) throw InvalidArgument("lu_factor: non-finite entry");
    const std::size_t n = a.rows();
    const double threshold = kSingularPivotRatio * a.max_abs();

    LuFactors f{std::move(a), std::vector<std::size_t>(n), 1};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    DenseMatrix& m = f.lu;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                p = i;
            }
        }
        if (best == 0.0 || best < threshold) throw SingularMatrix(k);
        if (p != k) {
            std::swap_ranges(m.row(k).begin(), m.row(k).end(), m.row(p).begin());
            std::swap(f.perm[k], f.perm[p]);
            f.sign = -f.sign;
        }
        const double pivot = m(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = m(i, k) / pivot;
            m(i, k) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
        }
    }
    return f;
}

[[nodiscard]] inline RVector lu_solve(const LuFactors& f, std::span<const double> b) {
    const std::size_t n = f.dim();
    if (b.size() != n) throw DimensionMismatch("lu_solve: right-hand side length mismatch");
    RVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

}  // namespace csnewton
