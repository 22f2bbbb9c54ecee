#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "csnewton/newton.hpp"
#include "csnewton/problems.hpp"

using namespace csnewton;
using namespace csnewton::problems;

namespace {

RVector random_lattice(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RVector v(2 * n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Shift each half of a stacked lattice vector by m sites.
RVector rotate_sites(const RVector& v, std::size_t m) {
    const std::size_t n = v.size() / 2;
    RVector out(v.size());
    for (std::size_t j = 0; j < n; ++j) {
        out[(j + m) % n] = v[j];
        out[n + (j + m) % n] = v[n + j];
    }
    return out;
}

RVector real_kernel_residual(const DnlsParams& p, const RVector& v) {
    return dnls_steady_residual(p).real(v);
}

}  // namespace

TEST(ScalarProblem, Values) {
    const auto f = scalar_test_fn();
    EXPECT_EQ(f.real(0.0), 0.0);
    EXPECT_DOUBLE_EQ(f.real(2.5), 2.5 * (std::exp(1.25) + 1.0));
    EXPECT_NEAR(f(Complex(0.0, 1e-8)).imag(), 2e-8, 1e-22);
}

TEST(UncoupledSystem, Values) {
    const auto F = uncoupled_system();
    EXPECT_EQ(F.real(RVector{0.0, 0.0}), (RVector{0.0, 0.0}));
    const RVector v = F.real(RVector{2.5, 2.5});
    EXPECT_EQ(v[0], scalar_test_fn().real(2.5));
    EXPECT_EQ(v[1], v[0]);
}

TEST(Stiff, ExactSolutionSatisfiesOde) {
    EXPECT_EQ(stiff_exact(0.0), 0.0);
    for (double t : {0.01, 0.3, 1.7, 2.9}) {
        const double d = 1e-5;
        const double dy = (stiff_exact(t + d) - stiff_exact(t - d)) / (2 * d);
        EXPECT_NEAR(dy, -50.0 * (stiff_exact(t) - std::cos(t)), 1e-5);
    }
}

TEST(Olsen, RhsAtOnesAndZero) {
    const OlsenParams p;
    const OdeProblem prob = olsen_system(p);
    const RVector ones = prob.eval(0.0, RVector(4, 1.0));
    EXPECT_NEAR(ones[0], p.mu - p.alpha - 1.0, 1e-15);
    EXPECT_NEAR(ones[1], -p.epsilon, 1e-15);
    EXPECT_NEAR(ones[2], p.lambda * (3.0 - p.zeta + p.delta), 1e-13);
    EXPECT_NEAR(ones[3], -p.kappa * p.lambda, 1e-13);
    const RVector zero = prob.eval(0.0, RVector(4, 0.0));
    EXPECT_EQ(zero[0], p.mu);
    EXPECT_EQ(zero[1], p.epsilon);
    EXPECT_DOUBLE_EQ(zero[2], p.lambda * p.delta);
    EXPECT_EQ(zero[3], 0.0);
}

TEST(Olsen, ParamsValidated) {
    OlsenParams p;
    p.kappa = -1.0;
    EXPECT_THROW((void)olsen_system(p), InvalidArgument);
}

TEST(Dnls, ZeroAndPlaneWaveAreRoots) {
    DnlsParams p;
    p.N = 16;
    p.n0 = 8;
    EXPECT_EQ(real_kernel_residual(p, RVector(32, 0.0)), RVector(32, 0.0));
    RVector wave(32, 0.0);
    std::fill(wave.begin(), wave.begin() + 16, std::sqrt(p.omega));
    for (double r : real_kernel_residual(p, wave)) EXPECT_NEAR(r, 0.0, 1e-16);
}

TEST(Dnls, InitialGuessProfile) {
    const DnlsParams p;
    const RVector g = dnls_initial_guess(p);
    ASSERT_EQ(g.size(), 400u);
    EXPECT_EQ(g[p.n0 - 1], 0.5);
    EXPECT_EQ(g[p.N + p.n0 - 1], 0.5);
    EXPECT_LT(std::abs(g[p.n0 - 1 + 20]), 1e-16);
    EXPECT_LT(std::abs(g[p.n0 - 1 - 20]), 1e-16);
    for (double v : g) EXPECT_TRUE(std::isfinite(v));
}

TEST(Dnls, ResidualEquivariantUnderLatticeShift) {
    DnlsParams p;
    p.N = 23;
    p.n0 = 5;
    const RVector v = random_lattice(p.N, 3);
    const RVector base = real_kernel_residual(p, v);
    for (std::size_t m : {1u, 7u, 22u}) {
        const RVector shifted = real_kernel_residual(p, rotate_sites(v, m));
        const RVector expect = rotate_sites(base, m);
        for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(shifted[i], expect[i]) << m;
    }
}

TEST(Dnls, RealInputsGiveRealOutputs) {
    DnlsParams p;
    p.N = 10;
    p.n0 = 3;
    const RVector v = random_lattice(p.N, 8);
    const CVector out = dnls_steady_residual(p)(embed(v));
    for (const Complex& z : out) EXPECT_EQ(z.imag(), 0.0);
    const OdeProblem evo = dnls_evolution(p, v);
    CVector d(20);
    evo.rhs(0.0, embed(v), d);
    for (const Complex& z : d) EXPECT_EQ(z.imag(), 0.0);
}

TEST(Dnls, NormAndHamiltonianSmallCases) {
    LatticeState zero{RVector(6, 0.0), RVector(6, 0.0)};
    EXPECT_EQ(dnls_norm(zero), 0.0);
    EXPECT_EQ(dnls_hamiltonian(zero), 0.0);

    LatticeState single = zero;
    single.R[4] = 3.0;
    single.I[4] = 4.0;
    EXPECT_EQ(dnls_norm(single), 25.0);

    const double c_re = 0.3, c_im = -0.7;
    LatticeState constant{RVector(6, c_re), RVector(6, c_im)};
    const double m = c_re * c_re + c_im * c_im;
    EXPECT_NEAR(dnls_hamiltonian(constant), 6.0 * m * m / 2.0, 1e-15);
}

TEST(Dnls, GaugeInvariance) {
    const RVector v = random_lattice(50, 17);
    const LatticeState s = LatticeState::from_stacked(v);
    const double P = dnls_norm(s);
    const double H = dnls_hamiltonian(s);
    for (double theta : {0.3, 1.9, -2.4}) {
        LatticeState r = s;
        for (std::size_t j = 0; j < s.size(); ++j) {
            r.R[j] = s.R[j] * std::cos(theta) - s.I[j] * std::sin(theta);
            r.I[j] = s.R[j] * std::sin(theta) + s.I[j] * std::cos(theta);
        }
        EXPECT_NEAR(dnls_norm(r), P, 1e-13 * std::abs(P));
        EXPECT_NEAR(dnls_hamiltonian(r), H, 1e-13 * std::abs(H));
    }
}

TEST(Dnls, FlowConservesHamiltonianAndNorm) {
    // Directional derivative of H and P along the evolution field vanishes.
    DnlsParams p;
    p.N = 30;
    p.n0 = 15;
    const RVector v = random_lattice(p.N, 21);
    const OdeProblem evo = dnls_evolution(p, v);
    const RVector f = evo.eval(0.0, v);
    const double eps = 1e-6;
    RVector plus = v, minus = v;
    axpy(eps, f, plus);
    axpy(-eps, f, minus);
    const auto lp = LatticeState::from_stacked(plus);
    const auto lm = LatticeState::from_stacked(minus);
    const double dH = (dnls_hamiltonian(lp) - dnls_hamiltonian(lm)) / (2 * eps);
    const double dP = (dnls_norm(lp) - dnls_norm(lm)) / (2 * eps);
    EXPECT_NEAR(dH, 0.0, 1e-8);
    EXPECT_NEAR(dP, 0.0, 1e-8);
}

TEST(Dnls, GroundStateSolve) {
    NewtonConfig cfg;
    cfg.h = CsStep(0.05);
    cfg.step_tol = 1e-12;
    cfg.inner.rel_tol = 1e-6;
    const DnlsParams p;
    const SolveReport r = jfnk_cs_newton(dnls_steady_residual(p), dnls_initial_guess(p), cfg);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(static_cast<double>(r.iterations), 8.0, 2.0);
    const auto s = LatticeState::from_stacked(r.solution());
    EXPECT_NEAR(dnls_norm(s), 1.25217740220729, 1e-9);
    EXPECT_NEAR(dnls_hamiltonian(s), 0.041394478367519, 1e-9);
    EXPECT_LE(norm_inf(dnls_steady_residual(p).real(r.solution())), 1e-12);
}

TEST(Dnls, Validation) {
    DnlsParams p;
    p.N = 0;
    EXPECT_THROW((void)dnls_initial_guess(p), InvalidArgument);
    p.N = 10;
    p.n0 = 11;
    EXPECT_THROW((void)dnls_steady_residual(p), InvalidArgument);
    EXPECT_THROW((void)LatticeState::from_stacked(RVector(3, 0.0)), DimensionMismatch);
}
