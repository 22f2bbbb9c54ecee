#pragma once

// Restarted GMRES over a black-box matrix-vector oracle.
//
// Arnoldi uses one pass of modified Gram-Schmidt and the small least-squares
// problem is reduced with Givens rotations. Every restart recomputes the true
// residual b - A(x) through the oracle, so an oracle that is only nearly
// linear (the complex-step product D_h F(x) v) is driven to tolerance on its
// actual values rather than on the Krylov estimate. Optional augmentation
// appends the last few cycle corrections to the search space (LGMRES).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "csnewton/errors.hpp"
#include "csnewton/linalg.hpp"

namespace csnewton {

struct MatvecOracle {
    std::size_t dim = 0;
    std::function<RVector(std::span<const double>)> apply;

    [[nodiscard]] RVector operator()(std::span<const double> v) const {
        RVector w = apply(v);
        if (w.size() != dim) throw DimensionMismatch("MatvecOracle: output length mismatch");
        if (!all_finite(w)) throw NonFiniteEvaluation("MatvecOracle");
        return w;
    }
};

[[nodiscard]] inline MatvecOracle dense_oracle(const DenseMatrix& a) {
    return {a.rows(), [&a](std::span<const double> v) { return a.apply(v); }};
}

struct GmresConfig {
    std::size_t restart_len = 30;
    std::size_t max_outer = 100;
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    std::size_t augment_dim = 0;

    void validate() const {
        if (restart_len == 0) throw InvalidArgument("GmresConfig: restart_len must be positive");
        if (max_outer == 0) throw InvalidArgument("GmresConfig: max_outer must be positive");
        if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) throw InvalidArgument("GmresConfig: rel_tol must be positive");
        if (!(abs_tol >= 0.0) || !std::isfinite(abs_tol)) throw InvalidArgument("GmresConfig: abs_tol must be >= 0");
    }
};

struct GmresReport {
    bool converged = false;
    bool stagnated = false;
    std::size_t total_iterations = 0;
    std::size_t cycles = 0;
    double final_residual_norm = 0.0;
    // True residual at the start of each cycle followed by the Givens
    // estimates of that cycle; cycle_starts indexes the true-residual entries.
    std::vector<double> residual_history;
    std::vector<std::size_t> cycle_starts;
};

struct GmresResult {
    RVector x;
    GmresReport report;
};

namespace detail {

// Relative progress below this over two consecutive cycles counts as stagnation.
inline constexpr double kStagnationRatio = 1e-14;
inline constexpr double kBreakdownRatio = 1e-13;

inline RVector residual(const MatvecOracle& a, std::span<const double> b, std::span<const double> x) {
    RVector r(b.begin(), b.end());
    if (std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; })) axpy(-1.0, a(x), r);
    return r;
}

}  // namespace detail

[[nodiscard]] inline GmresResult gmres_solve(const MatvecOracle& a, std::span<const double> b,
                                             std::span<const double> x0, const GmresConfig& cfg = {}) {
    cfg.validate();
    const std::size_t n = a.dim;
    if (b.size() != n || x0.size() != n) throw DimensionMismatch("gmres_solve: length mismatch");

    GmresResult res{RVector(x0.begin(), x0.end()), {}};
    GmresReport& rep = res.report;

    const double target = std::max(cfg.rel_tol * norm2(b), cfg.abs_tol);
    RVector r = detail::residual(a, b, res.x);
    double rnorm = norm2(r);
    rep.cycle_starts.push_back(0);
    rep.residual_history.push_back(rnorm);
    rep.final_residual_norm = rnorm;
    if (rnorm <= target) {
        rep.converged = true;
        return res;
    }

    RVector best_x = res.x;
    double best_norm = rnorm;
    std::size_t stalled_cycles = 0;
    std::deque<RVector> augment;  // most recent first, unit norm

    const std::size_t krylov_len = std::min(cfg.restart_len, n);

    for (std::size_t cycle = 0; cycle < cfg.max_outer; ++cycle) {
        const std::size_t m = krylov_len + augment.size();

        std::vector<RVector> basis;       // orthonormal V_0..V_m
        std::vector<RVector> directions;  // Z_j, equal to V_j for Krylov steps
        basis.reserve(m + 1);
        directions.reserve(m);
        // Upper Hessenberg stored by columns; hess[j] has j + 2 entries.
        std::vector<RVector> hess;
        RVector cs, sn;
        RVector g(m + 1, 0.0);
        g[0] = rnorm;

        basis.emplace_back(r);
        for (double& v : basis.back()) v /= rnorm;

        std::size_t steps = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const bool krylov_step = j < krylov_len;
            if (krylov_step) {
                directions.push_back(basis[j]);
            } else {
                directions.push_back(augment[j - krylov_len]);
            }
            RVector w = a(directions.back());
            const double w_before = norm2(w);

            RVector col(j + 2, 0.0);
            for (std::size_t i = 0; i <= j; ++i) {
                col[i] = dot(w, basis[i]);
                axpy(-col[i], basis[i], w);
            }
            const double hnext = norm2(w);
            col[j + 1] = hnext;
            const bool breakdown = hnext <= detail::kBreakdownRatio * w_before;

            for (std::size_t i = 0; i < j; ++i) {
                const double t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            const double denom = std::hypot(col[j], col[j + 1]);
            double c = 1.0;
            double s = 0.0;
            if (denom != 0.0) {
                c = col[j] / denom;
                s = col[j + 1] / denom;
            }
            cs.push_back(c);
            sn.push_back(s);
            col[j] = denom;
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] = c * g[j];
            hess.push_back(std::move(col));

            ++steps;
            ++rep.total_iterations;
            const double estimate = std::abs(g[j + 1]);
            rep.residual_history.push_back(estimate);

            if (breakdown || estimate <= target) break;
            for (double& v : w) v /= hnext;
            basis.emplace_back(std::move(w));
        }

        // Back substitution on the triangularized Hessenberg.
        RVector y(steps, 0.0);
        for (std::size_t i = steps; i-- > 0;) {
            double s = g[i];
            for (std::size_t k = i + 1; k < steps; ++k) s -= hess[k][i] * y[k];
            y[i] = hess[i][i] != 0.0 ? s / hess[i][i] : 0.0;
        }
        RVector dx(n, 0.0);
        for (std::size_t k = 0; k < steps; ++k) axpy(y[k], directions[k], dx);
        axpy(1.0, dx, res.x);

        if (cfg.augment_dim > 0) {
            const double dn = norm2(dx);
            if (dn > 0.0) {
                for (double& v : dx) v /= dn;
                augment.push_front(std::move(dx));
                if (augment.size() > cfg.augment_dim) augment.pop_back();
            }
        }

        ++rep.cycles;
        r = detail::residual(a, b, res.x);
        const double previous = rnorm;
        rnorm = norm2(r);
        rep.cycle_starts.push_back(rep.residual_history.size());
        rep.residual_history.push_back(rnorm);

        if (rnorm < best_norm) {
            best_norm = rnorm;
            best_x = res.x;
        }
        if (rnorm <= target) {
            rep.converged = true;
            rep.final_residual_norm = rnorm;
            return res;
        }
        stalled_cycles = (previous - rnorm) < detail::kStagnationRatio * previous ? stalled_cycles + 1 : 0;
        if (stalled_cycles >= 2) {
            rep.stagnated = true;
            break;
        }
    }

    res.x = std::move(best_x);
    rep.final_residual_norm = best_norm;
    return res;
}

}  // namespace csnewton
