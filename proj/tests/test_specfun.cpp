#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "afscale/specfun.hpp"

namespace {

using namespace afscale;

// Independent oracle: integrate e^-t / t on [x, inf) directly.
double e1_by_quadrature(double x) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([](double t) { return std::exp(-t) / t; }, x,
                                std::numeric_limits<double>::infinity(), 1e-14);
}

double erfc_by_quadrature(double x) {
    boost::math::quadrature::exp_sinh<double> integrator;
    const double tail = integrator.integrate([](double t) { return std::exp(-t * t); }, x,
                                             std::numeric_limits<double>::infinity(), 1e-14);
    return 2.0 / std::sqrt(std::numbers::pi) * tail;
}

double relerr(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(ExpIntegralE1, MatchesQuadratureOracleAtOne) {
    const double oracle = e1_by_quadrature(1.0);
    EXPECT_NEAR(oracle, 0.21938393439552, 1e-13);
    EXPECT_LT(relerr(exp_integral_e1(1.0), oracle), 1e-12);
}

TEST(ExpIntegralE1, MatchesQuadratureOracleAcrossRegimes) {
    for (double x : {1e-3, 0.1, 0.5, 0.999, 1.001, 2.0, 5.0, 20.0, 60.0}) {
        EXPECT_LT(relerr(exp_integral_e1(x), e1_by_quadrature(x)), 1e-12) << "x = " << x;
    }
}

TEST(ExpIntegralE1, SmallArgumentFollowsLogDivergence) {
    // Truncated series oracle: -gamma - ln x + x - x^2/4.
    const double x = 1e-8;
    const double oracle = -std::numbers::egamma - std::log(x) + x - x * x / 4.0;
    EXPECT_LT(relerr(exp_integral_e1(x), oracle), 1e-7);
    EXPECT_LT(relerr(exp_integral_e1(x), -std::numbers::egamma - std::log(x)), 1e-7);
}

TEST(ExpIntegralE1, LargeArgumentAsymptotics) {
    const double ratio = exp_integral_e1(50.0) * 50.0 * std::exp(50.0);
    EXPECT_GT(ratio, 0.96);
    EXPECT_LT(ratio, 1.0);
}

TEST(ExpIntegralE1, RejectsNonPositive) {
    EXPECT_THROW(exp_integral_e1(0.0), DomainError);
    EXPECT_THROW(exp_integral_e1(-1.0), DomainError);
    EXPECT_THROW(scaled_e1(0.0), DomainError);
    EXPECT_THROW(scaled_e1(-3.0), DomainError);
    EXPECT_THROW(exp_integral_e1(std::nan("")), DomainError);
}

TEST(ExpIntegralE1, BudgetValidation) {
    EXPECT_THROW(exp_integral_e1(1.0, AccuracyBudget{1e-3, 100}), ParameterError);
    EXPECT_THROW(exp_integral_e1(1.0, AccuracyBudget{1e-12, 10}), ParameterError);
    EXPECT_NO_THROW(exp_integral_e1(1.0, kMachinePrecision));
}

TEST(ScaledE1, ValueAtOne) {
    EXPECT_NEAR(scaled_e1(1.0), std::exp(1.0) * 0.21938393439552, 1e-12);
    EXPECT_NEAR(scaled_e1(1.0), 0.59634736, 1e-8);
}

TEST(ScaledE1, HugeArgumentWithoutOverflow) {
    const double x = 1e6;
    const double expected = 1.0 / x - 1.0 / (x * x);
    EXPECT_LT(relerr(scaled_e1(x), expected), 1e-9);
    EXPECT_TRUE(std::isfinite(scaled_e1(1e8)));
    EXPECT_LT(relerr(scaled_e1(1e8), 1e-8), 1e-7);
}

TEST(ScaledE1, ConsistentWithProductAtSmallX) {
    const double x = 0.1666667;
    EXPECT_LT(relerr(scaled_e1(x), std::exp(x) * exp_integral_e1(x)), 1e-14);
}

TEST(ScaledE1, AgreesWithProductOverRepresentableRange) {
    for (double x = 1e-6; x <= 700.0; x *= 1.37) {
        const double s = scaled_e1(x);
        EXPECT_LE(std::abs(s - std::exp(x) * exp_integral_e1(x)) / s, 1e-10) << "x = " << x;
    }
}

TEST(ScaledE1, AgreesWithBoostExpint) {
    for (double x = 1e-5; x <= 600.0; x *= 1.9) {
        EXPECT_LT(relerr(exp_integral_e1(x), boost::math::expint(1, x)), 1e-12) << "x = " << x;
    }
}

TEST(Erfc, KnownValues) {
    EXPECT_EQ(afscale::erfc(0.0), 1.0);
    const double oracle = erfc_by_quadrature(1.0);
    EXPECT_NEAR(oracle, 0.157299207050, 1e-12);
    EXPECT_LT(relerr(afscale::erfc(1.0), oracle), 1e-12);
    EXPECT_LE(afscale::erfc(10.0), std::exp(-100.0));
    EXPECT_GT(afscale::erfc(10.0), 0.0);
}

TEST(Erfc, RejectsNegative) { EXPECT_THROW(afscale::erfc(-0.5), DomainError); }

TEST(Monotonicity, E1AndErfcStrictlyDecrease) {
    double prev_e1 = std::numeric_limits<double>::infinity();
    double prev_erfc = 2.0;
    for (double x = 1e-4; x < 25.0; x *= 1.21) {
        const double e = exp_integral_e1(x);
        const double c = afscale::erfc(x);
        EXPECT_LT(e, prev_e1) << x;
        EXPECT_LT(c, prev_erfc) << x;
        prev_e1 = e;
        prev_erfc = c;
    }
}

TEST(Bracketing, E1BetweenStandardBounds) {
    for (double x = 10.0; x < 700.0; x *= 1.13) {
        const double e = exp_integral_e1(x);
        EXPECT_LT(std::exp(-x) / (x + 1.0), e) << x;
        EXPECT_LT(e, std::exp(-x) / x) << x;
    }
}

}  // namespace
