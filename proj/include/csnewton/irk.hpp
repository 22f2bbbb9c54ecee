#pragma once

// Two-stage Gauss-Legendre Runge-Kutta (order 4, A-stable, symplectic).
// The stage equations
//   k_s = f(t + c_s dt, y + dt * sum_r a_sr k_r),  s = 1, 2
// are stacked into one 2n-dimensional system K = (k1, k2) and handed to the
// Jacobian-free complex-step Newton solver. Only the stage unknowns carry the
// complex step; time stays real.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csnewton/csd.hpp"
#include "csnewton/errors.hpp"
#include "csnewton/newton.hpp"

namespace csnewton {

struct ButcherTableau {
    std::array<std::array<double, 2>, 2> a{};
    std::array<double, 2> b{};
    std::array<double, 2> c{};
};

[[nodiscard]] inline ButcherTableau gauss_legendre_2() {
    const double r = std::sqrt(3.0) / 6.0;
    ButcherTableau t;
    t.a = {{{0.25, 0.25 - r}, {0.25 + r, 0.25}}};
    t.b = {0.5, 0.5};
    t.c = {0.5 - r, 0.5 + r};
    return t;
}

// y' = f(t, y). The right-hand side is evaluated on complex states so the
// stage residual can be complex-stepped.
struct OdeProblem {
    using Rhs = std::function<void(double t, std::span<const Complex> y, std::span<Complex> dydt)>;

    std::size_t dim = 0;
    Rhs rhs;
    double t0 = 0.0;
    double t_end = 0.0;
    RVector y0;
    double dt = 0.0;

    void validate() const {
        if (dim == 0) throw InvalidArgument("OdeProblem: dimension must be positive");
        if (y0.size() != dim) throw DimensionMismatch("OdeProblem: y0 length does not match dim");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("OdeProblem: dt must be positive");
        if (!(t_end > t0)) throw InvalidArgument("OdeProblem: t_end must exceed t0");
        if (!rhs) throw InvalidArgument("OdeProblem: missing right-hand side");
    }

    // Real-valued f(t, y) through the complex evaluator.
    [[nodiscard]] RVector eval(double t, std::span<const double> y) const {
        const CVector z = embed(y);
        CVector out(dim);
        rhs(t, z, out);
        if (!all_finite(out)) throw NonFiniteEvaluation("OdeProblem::eval");
        RVector r(dim);
        for (std::size_t i = 0; i < dim; ++i) r[i] = out[i].real();
        return r;
    }
};

struct IrkStepReport {
    bool converged = false;
    std::size_t newton_iterations = 0;
    std::vector<std::size_t> inner_iterations_per_newton;
    std::size_t inner_failures = 0;
    // Stacked (k1, k2), length 2n.
    RVector stage_values;

    [[nodiscard]] std::size_t max_inner_iterations() const {
        std::size_t m = 0;
        for (auto c : inner_iterations_per_newton) m = std::max(m, c);
        return m;
    }
};

struct IrkStepResult {
    RVector y;
    IrkStepReport report;
};

// times and states have equal length (initial state included); step_reports
// holds one entry per step.
struct Trajectory {
    std::vector<double> times;
    std::vector<RVector> states;
    std::vector<IrkStepReport> step_reports;
};

// F(K) = (f(t + c1 dt, y + dt(a11 k1 + a12 k2)) - k1,
//         f(t + c2 dt, y + dt(a21 k1 + a22 k2)) - k2)
[[nodiscard]] inline AnalyticMap irk_stage_residual(const OdeProblem& prob, double t, std::span<const double> y,
                                                    double dt, const ButcherTableau& tab = gauss_legendre_2()) {
    const std::size_t n = prob.dim;
    RVector base(y.begin(), y.end());
    return AnalyticMap(2 * n, [&prob, base = std::move(base), t, dt, tab, n](std::span<const Complex> k,
                                                                            std::span<Complex> out) {
        const auto k1 = k.subspan(0, n);
        const auto k2 = k.subspan(n, n);
        CVector stage(n);
        for (std::size_t s = 0; s < 2; ++s) {
            for (std::size_t i = 0; i < n; ++i)
                stage[i] = base[i] + dt * (tab.a[s][0] * k1[i] + tab.a[s][1] * k2[i]);
            const auto dst = out.subspan(s * n, n);
            prob.rhs(t + tab.c[s] * dt, stage, dst);
            const auto ks = s == 0 ? k1 : k2;
            for (std::size_t i = 0; i < n; ++i) dst[i] -= ks[i];
        }
    });
}

namespace detail {

inline IrkStepResult irk_step_impl(const OdeProblem& prob, double t, std::span<const double> y, double dt,
                                   const std::optional<RVector>& warm, const NewtonConfig& cfg) {
    const std::size_t n = prob.dim;
    if (y.size() != n) throw DimensionMismatch("irk_step: state length mismatch");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("irk_step: dt must be positive");

    RVector guess;
    if (warm) {
        if (warm->size() != 2 * n) throw DimensionMismatch("irk_step: warm stages must have length 2n");
        guess = *warm;
    } else {
        const RVector f0 = prob.eval(t, y);
        guess.reserve(2 * n);
        guess.insert(guess.end(), f0.begin(), f0.end());
        guess.insert(guess.end(), f0.begin(), f0.end());
    }

    const ButcherTableau tab = gauss_legendre_2();
    const AnalyticMap stages = irk_stage_residual(prob, t, y, dt, tab);
    SolveReport sr = jfnk_cs_newton(stages, guess, cfg);

    IrkStepResult res;
    res.report.converged = sr.converged;
    res.report.newton_iterations = sr.iterations;
    res.report.inner_iterations_per_newton = std::move(sr.inner_iteration_counts);
    res.report.inner_failures = sr.inner_failures;
    res.report.stage_values = sr.solution();

    const RVector& k = res.report.stage_values;
    res.y.assign(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) res.y[i] += dt * (tab.b[0] * k[i] + tab.b[1] * k[n + i]);
    return res;
}

}  // namespace detail

[[nodiscard]] inline IrkStepResult irk_step(const OdeProblem& prob, double t, std::span<const double> y, double dt,
                                            const std::optional<RVector>& warm, const NewtonConfig& cfg) {
    IrkStepResult res = detail::irk_step_impl(prob, t, y, dt, warm, cfg);
    if (!res.report.converged)
        throw StageSolveFailure(0, "Newton did not converge in " + std::to_string(res.report.newton_iterations) +
                                       " iterations");
    return res;
}

// Number of steps covering [t0, t_end]: an integer multiple of dt when the
// ratio is integral to within 1e-10 relative, otherwise one extra shortened step.
[[nodiscard]] inline std::size_t step_count(double t0, double t_end, double dt) {
    const double q = (t_end - t0) / dt;
    const double nearest = std::round(q);
    if (std::abs(q - nearest) <= 1e-10 * std::max(1.0, q)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(q));
}

// Called after every step with (step index, time, state); used for streaming output.
using StepObserver = std::function<void(std::size_t, double, std::span<const double>, const IrkStepReport&)>;

[[nodiscard]] inline Trajectory integrate(const OdeProblem& prob, const NewtonConfig& cfg,
                                          const StepObserver& observer = {}) {
    prob.validate();
    const std::size_t steps = step_count(prob.t0, prob.t_end, prob.dt);

    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.step_reports.reserve(steps);
    traj.times.push_back(prob.t0);
    traj.states.push_back(prob.y0);

    std::optional<RVector> warm;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = traj.times.back();
        const double t_next = s + 1 == steps ? prob.t_end : prob.t0 + static_cast<double>(s + 1) * prob.dt;
        IrkStepResult res = detail::irk_step_impl(prob, t, traj.states.back(), t_next - t, warm, cfg);
        if (!res.report.converged)
            throw StageSolveFailure(s, "Newton did not converge in " + std::to_string(res.report.newton_iterations) +
                                           " iterations");
        warm = res.report.stage_values;
        if (observer) observer(s, t_next, res.y, res.report);
        traj.times.push_back(t_next);
        traj.states.push_back(std::move(res.y));
        traj.step_reports.push_back(std::move(res.report));
    }
    return traj;
}

}  // namespace csnewton
