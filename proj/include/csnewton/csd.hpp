#pragma once

// Complex-step derivative operators.
//
// For a function that is real on the real axis and analytic nearby,
//   f'(x) ~= Im f(x + i h) / h
// with an O(h^2) remainder and no subtractive cancellation, so h may be taken
// far below sqrt(eps). The vector forms are the Jacobian column formula
//   [J_h(x)]_ij = Im F_i(x + i h e_j) / h
// and the nonlinear directional operator
//   D_h F(x) v = Im F(x + i h v) / h,
// which costs one evaluation of F regardless of dimension.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csnewton/errors.hpp"
#include "csnewton/linalg.hpp"

namespace csnewton {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

inline constexpr double kDefaultComplexStep = 1e-10;

// The complex step h. Always positive and finite.
class CsStep {
public:
    constexpr CsStep() = default;
    explicit CsStep(double h) : h_(h) {
        if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("complex step must be positive and finite");
    }
    [[nodiscard]] constexpr double value() const noexcept { return h_; }

private:
    double h_ = kDefaultComplexStep;
};

[[nodiscard]] inline bool is_finite(Complex z) noexcept {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

[[nodiscard]] inline bool all_finite(std::span<const Complex> z) {
    for (const auto& v : z)
        if (!is_finite(v)) return false;
    return true;
}

[[nodiscard]] inline CVector embed(std::span<const double> x) {
    return CVector(x.begin(), x.end());
}

// Scalar function given through its analytic extension. Real evaluation goes
// through the same code path by embedding the real argument.
class AnalyticScalarFn {
public:
    using Eval = std::function<Complex(Complex)>;

    AnalyticScalarFn() = default;
    explicit AnalyticScalarFn(Eval eval) : eval_(std::move(eval)) {}

    [[nodiscard]] Complex operator()(Complex z) const { return eval_(z); }

    // f(x) for real x; throws NonFiniteEvaluation on NaN/Inf.
    [[nodiscard]] double real(double x) const {
        const Complex v = eval_(Complex(x, 0.0));
        if (!is_finite(v)) throw NonFiniteEvaluation("scalar function");
        return v.real();
    }

private:
    Eval eval_;
};

// F : C^n -> C^n, the analytic extension of a real system.
class AnalyticMap {
public:
    using Eval = std::function<void(std::span<const Complex>, std::span<Complex>)>;

    AnalyticMap() = default;
    AnalyticMap(std::size_t dim, Eval eval) : dim_(dim), eval_(std::move(eval)) {
        if (dim == 0) throw InvalidArgument("AnalyticMap: dimension must be positive");
    }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

    void operator()(std::span<const Complex> z, std::span<Complex> out) const {
        if (z.size() != dim_ || out.size() != dim_) throw DimensionMismatch("AnalyticMap: length mismatch");
        eval_(z, out);
    }

    [[nodiscard]] CVector operator()(std::span<const Complex> z) const {
        CVector out(dim_);
        (*this)(z, out);
        return out;
    }

    // F(x) for real x, via the complex evaluator.
    [[nodiscard]] RVector real(std::span<const double> x) const {
        const CVector z = embed(x);
        CVector out(dim_);
        (*this)(z, out);
        if (!all_finite(out)) throw NonFiniteEvaluation("system evaluation");
        RVector r(dim_);
        for (std::size_t i = 0; i < dim_; ++i) r[i] = out[i].real();
        return r;
    }

private:
    std::size_t dim_ = 0;
    Eval eval_;
};

// Im f(x + i h) / h
[[nodiscard]] inline double cs_derivative(const AnalyticScalarFn& f, double x, CsStep h = {}) {
    const Complex v = f(Complex(x, h.value()));
    if (!is_finite(v)) throw NonFiniteEvaluation("cs_derivative");
    return v.imag() / h.value();
}

// Column j is Im F(x + i h e_j) / h; n evaluations of F.
[[nodiscard]] inline DenseMatrix cs_jacobian(const AnalyticMap& F, std::span<const double> x, CsStep h = {}) {
    const std::size_t n = F.dim();
    if (x.size() != n) throw DimensionMismatch("cs_jacobian: x length does not match F.dim");
    DenseMatrix jac(n, n);
    CVector z = embed(x);
    CVector out(n);
    for (std::size_t j = 0; j < n; ++j) {
        z[j] = Complex(x[j], h.value());
        F(z, out);
        z[j] = Complex(x[j], 0.0);
        if (!all_finite(out)) throw NonFiniteEvaluation("cs_jacobian", j);
        for (std::size_t i = 0; i < n; ++i) jac(i, j) = out[i].imag() / h.value();
    }
    return jac;
}

// Im F(x + i h v) / h; one evaluation of F. Nonlinear in v.
[[nodiscard]] inline RVector cs_matvec(const AnalyticMap& F, std::span<const double> x,
                                       std::span<const double> v, CsStep h = {}) {
    const std::size_t n = F.dim();
    if (x.size() != n || v.size() != n) throw DimensionMismatch("cs_matvec: length mismatch");
    CVector z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = Complex(x[i], h.value() * v[i]);
    CVector out(n);
    F(z, out);
    if (!all_finite(out)) throw NonFiniteEvaluation("cs_matvec");
    RVector r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = out[i].imag() / h.value();
    return r;
}

}  // namespace csnewton
