#pragma once

// Benchmark problems. Every evaluator is written once as a template over the
// scalar type and instantiated on std::complex<double>; real evaluation embeds
// the real argument with a zero imaginary part.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "csnewton/csd.hpp"
#include "csnewton/errors.hpp"
#include "csnewton/irk.hpp"
#include "csnewton/linalg.hpp"

namespace csnewton::problems {

// f(x) = x (e^{x/2} + 1); root x* = 0, f'(0) = 2.
template <class T>
[[nodiscard]] T scalar_test_value(T x) {
    using std::exp;
    return x * (exp(x / 2.0) + 1.0);
}

[[nodiscard]] inline AnalyticScalarFn scalar_test_fn() {
    return AnalyticScalarFn([](Complex z) { return scalar_test_value(z); });
}

// Two decoupled copies of the scalar test function; root (0, 0).
[[nodiscard]] inline AnalyticMap uncoupled_system() {
    return AnalyticMap(2, [](std::span<const Complex> z, std::span<Complex> out) {
        out[0] = scalar_test_value(z[0]);
        out[1] = scalar_test_value(z[1]);
    });
}

// The scalar test function as a one-dimensional system.
[[nodiscard]] inline AnalyticMap scalar_as_system() {
    return AnalyticMap(1, [](std::span<const Complex> z, std::span<Complex> out) { out[0] = scalar_test_value(z[0]); });
}

// y' = -50 (y - cos t), y(0) = 0.
[[nodiscard]] inline OdeProblem stiff_ode(double dt = 1e-2, double t_end = 3.0) {
    OdeProblem p;
    p.dim = 1;
    p.rhs = [](double t, std::span<const Complex> y, std::span<Complex> dydt) { dydt[0] = -50.0 * (y[0] - std::cos(t)); };
    p.t0 = 0.0;
    p.t_end = t_end;
    p.y0 = {0.0};
    p.dt = dt;
    return p;
}

// Closed-form solution of stiff_ode.
[[nodiscard]] inline double stiff_exact(double t) {
    return (2500.0 * std::cos(t) + 50.0 * std::sin(t) - 2500.0 * std::exp(-50.0 * t)) / 2501.0;
}

// Olsen peroxidase-oxidase model. beta is carried with the published
// parameter set but enters no equation; delta is the constant source in dX/dt.
struct OlsenParams {
    double alpha = 0.0912;
    double beta = 1.2121e-5;
    double delta = 1.2121e-5;
    double epsilon = 0.0037;
    double lambda = 18.5281;
    double kappa = 3.7963;
    double mu = 0.9697;
    double zeta = 0.9847;

    void validate() const {
        for (double v : {alpha, beta, delta, epsilon, lambda, kappa, mu, zeta})
            if (!(v > 0.0)) throw InvalidArgument("OlsenParams: all parameters must be positive");
    }
};

template <class T>
void olsen_rhs(const OlsenParams& p, std::span<const T> y, std::span<T> dydt) {
    const T& a = y[0];
    const T& b = y[1];
    const T& x = y[2];
    const T& w = y[3];
    const T aby = a * b * w;
    dydt[0] = p.mu - p.alpha * a - aby;
    dydt[1] = p.epsilon * (1.0 - b * x - aby);
    dydt[2] = p.lambda * (b * x - x * x + 3.0 * aby - p.zeta * x + p.delta);
    dydt[3] = p.kappa * p.lambda * (x * x - w - aby);
}

[[nodiscard]] inline OdeProblem olsen_system(const OlsenParams& params = {}, double dt = 0.01, double t_end = 10.0) {
    params.validate();
    OdeProblem p;
    p.dim = 4;
    p.rhs = [params](double, std::span<const Complex> y, std::span<Complex> dydt) { olsen_rhs(params, y, dydt); };
    p.t0 = 0.0;
    p.t_end = t_end;
    p.y0 = {1.0, 1.0, 1.0, 1.0};
    p.dt = dt;
    return p;
}

// --- discrete nonlinear Schroedinger lattice --------------------------------

struct DnlsParams {
    std::size_t N = 200;
    double omega = 0.1;
    // Soliton centre, 1-based site index.
    std::size_t n0 = 100;

    void validate() const {
        if (N == 0) throw InvalidArgument("DnlsParams: N must be positive");
        if (n0 < 1 || n0 > N) throw InvalidArgument("DnlsParams: n0 must lie in [1, N]");
        if (!std::isfinite(omega)) throw InvalidArgument("DnlsParams: omega must be finite");
    }
};

// u_n = R_n + i I_n on a periodic lattice of N sites.
struct LatticeState {
    RVector R;
    RVector I;

    [[nodiscard]] std::size_t size() const noexcept { return R.size(); }

    // Split a stacked (R_1..R_N, I_1..I_N) vector.
    static LatticeState from_stacked(std::span<const double> v) {
        if (v.size() % 2 != 0 || v.empty()) throw DimensionMismatch("LatticeState: stacked vector must have even length");
        const std::size_t n = v.size() / 2;
        return {RVector(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)),
                RVector(v.begin() + static_cast<std::ptrdiff_t>(n), v.end())};
    }

    [[nodiscard]] RVector stacked() const {
        RVector v(R);
        v.insert(v.end(), I.begin(), I.end());
        return v;
    }
};

namespace detail {
inline std::size_t next_site(std::size_t j, std::size_t n) { return j + 1 == n ? 0 : j + 1; }
inline std::size_t prev_site(std::size_t j, std::size_t n) { return j == 0 ? n - 1 : j - 1; }
}  // namespace detail

// X_j = -w x_j + (x_{j+1} - 2 x_j + x_{j-1}) + (x_j^2 + y_j^2) x_j, and Y_j
// likewise with x and y exchanged in the linear terms.
template <class T>
void dnls_steady_kernel(double omega, std::span<const T> z, std::span<T> out) {
    const std::size_t n = z.size() / 2;
    const auto x = z.subspan(0, n);
    const auto y = z.subspan(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jp = detail::next_site(j, n);
        const std::size_t jm = detail::prev_site(j, n);
        const T m = x[j] * x[j] + y[j] * y[j];
        out[j] = -omega * x[j] + (x[jp] - 2.0 * x[j] + x[jm]) + m * x[j];
        out[n + j] = -omega * y[j] + (y[jp] - 2.0 * y[j] + y[jm]) + m * y[j];
    }
}

[[nodiscard]] inline AnalyticMap dnls_steady_residual(const DnlsParams& p) {
    p.validate();
    const double omega = p.omega;
    return AnalyticMap(2 * p.N, [omega](std::span<const Complex> z, std::span<Complex> out) {
        dnls_steady_kernel<Complex>(omega, z, out);
    });
}

// R_n = I_n = sech^2(n - n0) / 2, n = 1..N.
[[nodiscard]] inline RVector dnls_initial_guess(const DnlsParams& p) {
    p.validate();
    RVector v(2 * p.N, 0.0);
    for (std::size_t j = 0; j < p.N; ++j) {
        const double d = static_cast<double>(j + 1) - static_cast<double>(p.n0);
        const double sech = 1.0 / std::cosh(d);  // cosh overflows to inf in the tails, giving 0
        v[j] = v[p.N + j] = 0.5 * sech * sech;
    }
    return v;
}

// dR_n/dt = -[I_{n+1} - 2 I_n + I_{n-1} + (R_n^2 + I_n^2) I_n]
// dI_n/dt =   R_{n+1} - 2 R_n + R_{n-1} + (R_n^2 + I_n^2) R_n
template <class T>
void dnls_evolution_kernel(std::span<const T> z, std::span<T> dz) {
    const std::size_t n = z.size() / 2;
    const auto r = z.subspan(0, n);
    const auto im = z.subspan(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jp = detail::next_site(j, n);
        const std::size_t jm = detail::prev_site(j, n);
        const T m = r[j] * r[j] + im[j] * im[j];
        dz[j] = -(im[jp] - 2.0 * im[j] + im[jm] + m * im[j]);
        dz[n + j] = r[jp] - 2.0 * r[j] + r[jm] + m * r[j];
    }
}

[[nodiscard]] inline OdeProblem dnls_evolution(const DnlsParams& p, std::span<const double> ground, double dt = 0.1,
                                               double t_end = 100.0) {
    p.validate();
    if (ground.size() != 2 * p.N) throw DimensionMismatch("dnls_evolution: ground state must have length 2N");
    OdeProblem prob;
    prob.dim = 2 * p.N;
    prob.rhs = [](double, std::span<const Complex> y, std::span<Complex> dydt) { dnls_evolution_kernel<Complex>(y, dydt); };
    prob.t0 = 0.0;
    prob.t_end = t_end;
    prob.y0.assign(ground.begin(), ground.end());
    prob.dt = dt;
    return prob;
}

// P = sum |u_n|^2
[[nodiscard]] inline double dnls_norm(const LatticeState& s) {
    if (s.R.size() != s.I.size()) throw DimensionMismatch("dnls_norm: R and I lengths differ");
    double p = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) p += s.R[j] * s.R[j] + s.I[j] * s.I[j];
    return p;
}

// H = -sum_{n=1..N} [ |u_n - u_{n-1}|^2 - |u_n|^4 / 2 ], with u_0 = u_N.
[[nodiscard]] inline double dnls_hamiltonian(const LatticeState& s) {
    if (s.R.size() != s.I.size()) throw DimensionMismatch("dnls_hamiltonian: R and I lengths differ");
    const std::size_t n = s.size();
    double h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jm = detail::prev_site(j, n);
        const double dr = s.R[j] - s.R[jm];
        const double di = s.I[j] - s.I[jm];
        const double m = s.R[j] * s.R[j] + s.I[j] * s.I[j];
        h -= dr * dr + di * di - 0.5 * m * m;
    }
    return h;
}

}  // namespace csnewton::problems
