#pragma once

// Complex-step Newton solvers.
//
//   scalar:    x_{k+1} = x_k - h f(x_k) / Im f(x_k + i h)
//   Jacobian:  J_h(x_k) u_k = F(x_k),      x_{k+1} = x_k - u_k
//   JFNK:      D_h F(x_k) u_k = F(x_k),    x_{k+1} = x_k - u_k
//
// The Jacobian variants (scalar and assembled J_h) converge linearly at a
// fixed h, approaching quadratic only as h -> 0. The Jacobian-free variant
// solves the nonlinear directional equation with restarted GMRES and keeps a
// quadratic rate at finite h.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "csnewton/csd.hpp"
#include "csnewton/errors.hpp"
#include "csnewton/krylov.hpp"
#include "csnewton/linalg.hpp"

namespace csnewton {

enum class ErrorNorm { Euclidean, Max };

struct NewtonConfig {
    CsStep h{};
    std::size_t max_iter = 100;
    double step_tol = 1e-12;
    std::optional<double> residual_tol;
    // When set, iteration stops on ||x_k - known_root|| <= step_tol and the
    // error history is recorded.
    std::optional<RVector> known_root;
    // Norm used by the stopping tests and the error history.
    ErrorNorm norm = ErrorNorm::Euclidean;
    GmresConfig inner{};

    void validate(std::size_t dim) const {
        if (max_iter == 0) throw InvalidArgument("NewtonConfig: max_iter must be positive");
        if (!(step_tol > 0.0) || !std::isfinite(step_tol)) throw InvalidArgument("NewtonConfig: step_tol must be positive");
        if (residual_tol && !(*residual_tol > 0.0)) throw InvalidArgument("NewtonConfig: residual_tol must be positive");
        if (known_root && known_root->size() != dim) throw DimensionMismatch("NewtonConfig: known_root length mismatch");
        inner.validate();
    }

    [[nodiscard]] double measure(std::span<const double> v) const {
        return norm == ErrorNorm::Max ? norm_inf(v) : norm2(v);
    }
};

struct SolveReport {
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<RVector> iterate_history;
    std::vector<double> error_history;
    std::vector<std::size_t> inner_iteration_counts;
    std::optional<double> rate_estimate;
    // Number of inner GMRES solves that stopped short of their tolerance.
    std::size_t inner_failures = 0;

    [[nodiscard]] const RVector& solution() const { return iterate_history.back(); }
    [[nodiscard]] bool inner_stagnated() const noexcept { return inner_failures > 0; }
    [[nodiscard]] std::size_t total_inner_iterations() const {
        std::size_t s = 0;
        for (auto c : inner_iteration_counts) s += c;
        return s;
    }
};

// log(e_K / e_{K-1}) / log(e_{K-1} / e_{K-2}) over the last three entries.
[[nodiscard]] inline double estimate_rate(std::span<const double> errors) {
    if (errors.size() < 3) throw InsufficientHistory("estimate_rate: need at least three error entries");
    const double e2 = errors[errors.size() - 3];
    const double e1 = errors[errors.size() - 2];
    const double e0 = errors[errors.size() - 1];
    if (!(e0 > 0.0) || !(e1 > 0.0) || !(e2 > 0.0)) throw DegenerateHistory("estimate_rate: non-positive error entry");
    const double num = e0 / e1;
    const double den = e1 / e2;
    if (num < 1e-300 || den < 1e-300 || std::abs(num - 1.0) < 1e-300 || std::abs(den - 1.0) < 1e-300)
        throw DegenerateHistory("estimate_rate: degenerate error ratio");
    return std::log(num) / std::log(den);
}

namespace detail {

inline std::optional<double> try_rate(std::span<const double> errors) {
    if (errors.size() < 3) return std::nullopt;
    try {
        return estimate_rate(errors);
    } catch (const DegenerateHistory&) {
        return std::nullopt;
    }
}

inline bool is_zero(std::span<const double> v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

// Shared outer loop of the system variants. step(x, Fx, report) returns u.
template <class StepFn>
SolveReport newton_loop(const AnalyticMap& F, std::span<const double> x0, const NewtonConfig& cfg, StepFn&& step) {
    const std::size_t n = F.dim();
    if (x0.size() != n) throw DimensionMismatch("newton: x0 length does not match F.dim");
    cfg.validate(n);

    SolveReport rep;
    RVector x(x0.begin(), x0.end());
    rep.iterate_history.push_back(x);

    auto record_error = [&]() -> bool {
        const double e = cfg.measure(difference(x, *cfg.known_root));
        rep.error_history.push_back(e);
        return e <= cfg.step_tol;
    };

    RVector fx = F.real(x);
    if (cfg.known_root) rep.converged = record_error();
    if (!rep.converged) rep.converged = is_zero(fx) || (cfg.residual_tol && cfg.measure(fx) <= *cfg.residual_tol);

    while (!rep.converged && rep.iterations < cfg.max_iter) {
        const RVector u = step(std::as_const(x), std::as_const(fx), rep);
        axpy(-1.0, u, x);
        ++rep.iterations;
        rep.iterate_history.push_back(x);

        if (cfg.known_root) {
            rep.converged = record_error();
        } else {
            rep.converged = cfg.measure(u) <= cfg.step_tol;
        }
        if (!rep.converged) {
            fx = F.real(x);
            rep.converged = is_zero(fx) || (cfg.residual_tol && cfg.measure(fx) <= *cfg.residual_tol);
        }
    }
    rep.rate_estimate = try_rate(rep.error_history);
    return rep;
}

}  // namespace detail

[[nodiscard]] inline SolveReport scalar_cs_newton(const AnalyticScalarFn& f, double x0, const NewtonConfig& cfg) {
    cfg.validate(1);
    const double h = cfg.h.value();
    const bool has_root = cfg.known_root.has_value();
    const double root = has_root ? (*cfg.known_root)[0] : 0.0;

    SolveReport rep;
    double x = x0;
    rep.iterate_history.push_back({x});

    auto record_error = [&]() -> bool {
        const double e = std::abs(x - root);
        rep.error_history.push_back(e);
        return e <= cfg.step_tol;
    };

    double fx = f.real(x);
    if (has_root) rep.converged = record_error();
    if (!rep.converged) rep.converged = fx == 0.0 || (cfg.residual_tol && std::abs(fx) <= *cfg.residual_tol);

    while (!rep.converged && rep.iterations < cfg.max_iter) {
        const Complex probe = f(Complex(x, h));
        if (!is_finite(probe)) throw NonFiniteEvaluation("scalar_cs_newton");
        if (std::abs(probe.imag()) / h < 1e-300) throw SingularDerivative("scalar_cs_newton: |Im f(x + ih)| / h < 1e-300");
        const double u = h * fx / probe.imag();
        x -= u;
        ++rep.iterations;
        rep.iterate_history.push_back({x});

        rep.converged = has_root ? record_error() : std::abs(u) <= cfg.step_tol;
        if (!rep.converged) {
            fx = f.real(x);
            rep.converged = fx == 0.0 || (cfg.residual_tol && std::abs(fx) <= *cfg.residual_tol);
        }
    }
    rep.rate_estimate = detail::try_rate(rep.error_history);
    return rep;
}

[[nodiscard]] inline SolveReport jacobian_cs_newton(const AnalyticMap& F, std::span<const double> x0,
                                                    const NewtonConfig& cfg) {
    return detail::newton_loop(F, x0, cfg, [&](const RVector& x, const RVector& fx, SolveReport&) {
        return lu_solve(lu_factor(cs_jacobian(F, x, cfg.h)), fx);
    });
}

[[nodiscard]] inline SolveReport jfnk_cs_newton(const AnalyticMap& F, std::span<const double> x0,
                                                const NewtonConfig& cfg) {
    const std::size_t n = F.dim();
    return detail::newton_loop(F, x0, cfg, [&](const RVector& x, const RVector& fx, SolveReport& rep) {
        const MatvecOracle oracle{n, [&](std::span<const double> v) { return cs_matvec(F, x, v, cfg.h); }};
        const RVector zero(n, 0.0);
        GmresResult inner = gmres_solve(oracle, fx, zero, cfg.inner);
        rep.inner_iteration_counts.push_back(inner.report.total_iterations);
        if (!inner.report.converged) ++rep.inner_failures;
        return std::move(inner.x);
    });
}

}  // namespace csnewton
