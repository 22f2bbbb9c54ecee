#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "csnewton/csd.hpp"
#include "csnewton/problems.hpp"

using namespace csnewton;

namespace {

AnalyticScalarFn exp_fn() {
    return AnalyticScalarFn([](Complex z) { return std::exp(z); });
}


AnalyticMap linear_map(const DenseMatrix& a) {
    return AnalyticMap(a.rows(), [a](std::span<const Complex> z, std::span<Complex> out) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
            out[i] = 0.0;
            for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * z[j];
        }
    });
}

// A coupled nonlinear map for the column/matvec consistency checks.
AnalyticMap coupled_map() {
    return AnalyticMap(3, [](std::span<const Complex> z, std::span<Complex> out) {
        out[0] = std::sin(z[0]) * z[1] + z[2] * z[2];
        out[1] = std::exp(z[0] - z[2]) + z[1] * z[1] * z[1];
        out[2] = z[0] * z[1] * z[2] + std::cos(z[1]);
    });
}

}  // namespace

TEST(CsStep, RejectsNonPositiveAndNonFinite) {
    EXPECT_THROW(CsStep(0.0), InvalidArgument);
    EXPECT_THROW(CsStep(-1e-3), InvalidArgument);
    EXPECT_THROW(CsStep(std::numeric_limits<double>::infinity()), InvalidArgument);
    EXPECT_THROW(CsStep(std::nan("")), InvalidArgument);
    EXPECT_EQ(CsStep().value(), 1e-10);
}

TEST(CsDerivative, IdentityIsExact) {
    const AnalyticScalarFn id([](Complex z) { return z; });
    EXPECT_EQ(cs_derivative(id, 3.7, CsStep(0.5)), 1.0);
}

TEST(CsDerivative, ExpMatchesSinOverH) {
    // Im e^{ih} / h = sin(h) / h; frozen high-precision values.
    EXPECT_NEAR(cs_derivative(exp_fn(), 0.0, CsStep(1e-2)), 0.9999833334166665, 2.3e-16);
    EXPECT_NEAR(cs_derivative(exp_fn(), 0.0, CsStep(1e-3)), 0.9999998333333416, 2.3e-16);
    EXPECT_NEAR(cs_derivative(exp_fn(), 0.0, CsStep(1e-4)), 0.9999999983333333, 2.3e-16);
}

TEST(CsDerivative, CancellationFree) {
    for (double h : {1e-20, 1e-150}) EXPECT_NEAR(cs_derivative(exp_fn(), 0.0, CsStep(h)), 1.0, 1e-15) << h;
    // The forward difference collapses at the same step.
    const double h = 1e-20;
    EXPECT_EQ((std::exp(0.0 + h) - std::exp(0.0)) / h, 0.0);
}

TEST(CsDerivative, SecondOrderRemainderRatio) {
    for (double h : {1e-2, 1e-3, 1e-4}) {
        const double d = cs_derivative(exp_fn(), 0.0, CsStep(h));
        EXPECT_NEAR(std::abs(d - 1.0) / (h * h), 1.0 / 6.0, 0.01 / 6.0) << h;
    }
}

TEST(CsDerivative, QuadraticsExactWithinFourUlps) {
    // dyadic coefficients and power-of-two steps: every operation is exact
    const AnalyticScalarFn q([](Complex z) { return 0.75 * z * z - 1.5 * z + 2.0; });
    for (double h : {0x1p-990, 0x1p-60, 0x1p-10, 0.5, 1.0}) EXPECT_EQ(cs_derivative(q, 1.25, CsStep(h)), 0.375) << h;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    std::uniform_real_distribution<double> loghs(-300.0, 0.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double a = coef(rng), b = coef(rng), c = coef(rng), x = coef(rng);
        const double h = std::pow(10.0, loghs(rng));
        const AnalyticScalarFn p([=](Complex z) { return a * z * z + b * z + c; });
        const double exact = 2.0 * a * x + b;
        const double got = cs_derivative(p, x, CsStep(h));
        // ulps measured at the size of the terms, since 2ax + b may cancel
        const double ulp = std::numeric_limits<double>::epsilon() * (std::abs(2.0 * a * x) + std::abs(b));
        EXPECT_LE(std::abs(got - exact), 4.0 * ulp) << "a=" << a << " b=" << b << " x=" << x << " h=" << h;
    }
}

TEST(CsDerivative, NonFiniteThrows) {
    const AnalyticScalarFn bad([](Complex z) { return Complex(1.0, 0.0) / (z - z); });
    EXPECT_THROW((void)cs_derivative(bad, 1.0), NonFiniteEvaluation);
}

TEST(CsJacobian, LinearMapReturnsMatrix) {
    const DenseMatrix a = DenseMatrix::from_rows({{2.0, -1.5}, {0.25, 3.0}});
    for (double h : {1e-12, 1e-3, 1.0, 7.0}) {
        const DenseMatrix j = cs_jacobian(linear_map(a), std::vector<double>{0.3, -4.0}, CsStep(h));
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(j(r, c), a(r, c), 1e-15 * std::abs(a(r, c))) << h;
    }
}

TEST(CsJacobian, SystemAtOriginIsTwiceIdentity) {
    const DenseMatrix j = cs_jacobian(problems::uncoupled_system(), std::vector<double>{0.0, 0.0}, CsStep(1e-8));
    EXPECT_DOUBLE_EQ(j(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(j(1, 1), 2.0);
    EXPECT_EQ(j(0, 1), 0.0);
    EXPECT_EQ(j(1, 0), 0.0);
}

TEST(CsJacobian, SystemAtStartMatchesSymbolicDerivative) {
    const double d = std::exp(1.25) * (1.0 + 1.25) + 1.0;
    const DenseMatrix j = cs_jacobian(problems::uncoupled_system(), std::vector<double>{2.5, 2.5}, CsStep(1e-8));
    EXPECT_NEAR(j(0, 0), d, 1e-14 * d);
    EXPECT_NEAR(j(1, 1), d, 1e-14 * d);
    EXPECT_EQ(j(0, 1), 0.0);
}

TEST(CsJacobian, ReportsNonFiniteColumn) {
    const AnalyticMap F(2, [](std::span<const Complex> z, std::span<Complex> out) {
        out[0] = z[0];
        out[1] = std::log(z[1].imag() != 0.0 ? Complex(0.0, 0.0) : Complex(1.0, 0.0));
    });
    try {
        (void)cs_jacobian(F, std::vector<double>{1.0, 1.0}, CsStep(1e-3));
        FAIL() << "expected NonFiniteEvaluation";
    } catch (const NonFiniteEvaluation& e) {
        ASSERT_TRUE(e.column().has_value());
        EXPECT_EQ(*e.column(), 1u);
    }
}

TEST(CsMatvec, ZeroDirectionGivesZero) {
    const RVector w = cs_matvec(coupled_map(), std::vector<double>{0.4, -1.1, 2.0}, std::vector<double>(3, 0.0), CsStep(0.3));
    for (double v : w) EXPECT_EQ(v, 0.0);
}

TEST(CsMatvec, LinearMapGivesMatrixProduct) {
    const DenseMatrix a = DenseMatrix::from_rows({{1.0, 2.0}, {-3.0, 0.5}});
    const std::vector<double> v{0.7, -1.3};
    const RVector expect = a.apply(v);
    for (double h : {1e-8, 0.5, 3.0}) {
        const RVector w = cs_matvec(linear_map(a), std::vector<double>{5.0, 6.0}, v, CsStep(h));
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(w[i], expect[i], 1e-14) << h;
    }
}

TEST(CsMatvec, RemainderShrinksQuadratically) {
    // D F(1,1) (1,0) = (e^{1/2}(1 + 1/2) + 1, 0)
    const double exact = std::exp(0.5) * 1.5 + 1.0;
    const auto err = [&](double h) {
        const RVector w = cs_matvec(problems::uncoupled_system(), std::vector<double>{1.0, 1.0},
                                    std::vector<double>{1.0, 0.0}, CsStep(h));
        EXPECT_EQ(w[1], 0.0);
        return std::abs(w[0] - exact);
    };
    const double ratio = err(1e-2) / err(1e-3);
    EXPECT_NEAR(ratio, 100.0, 1.0);
}

TEST(CsMatvec, ColumnsMatchJacobianBitwise) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const AnalyticMap F = coupled_map();
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> x{u(rng), u(rng), u(rng)};
        const CsStep h(std::pow(10.0, -u(rng) * 4.0 - 8.0));
        const DenseMatrix j = cs_jacobian(F, x, h);
        for (std::size_t c = 0; c < 3; ++c) {
            std::vector<double> e(3, 0.0);
            e[c] = 1.0;
            const RVector col = cs_matvec(F, x, e, h);
            for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(col[r], j(r, c));
        }
    }
}

TEST(AnalyticMap, RealEvaluationAndDimensionChecks) {
    const AnalyticMap F = problems::uncoupled_system();
    EXPECT_THROW((void)F.real(std::vector<double>{1.0}), DimensionMismatch);
    const RVector r = F.real(std::vector<double>{0.0, 2.5});
    EXPECT_EQ(r[0], 0.0);
    EXPECT_DOUBLE_EQ(r[1], 2.5 * (std::exp(1.25) + 1.0));
}
