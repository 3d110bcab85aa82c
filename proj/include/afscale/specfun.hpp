#pragma once

// Special functions used by the closed-form expected-distortion expressions:
// the exponential integral E1, its exponentially scaled form e^x E1(x), and erfc.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "afscale/errors.hpp"

namespace afscale {

/// Convergence budget for the series/continued-fraction evaluators.
struct AccuracyBudget {
    double rel_tol = 1e-12;
    int max_terms = 500;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-6)) {
            throw ParameterError("AccuracyBudget.rel_tol must lie in (0, 1e-6]");
        }
        if (max_terms < 50) {
            throw ParameterError("AccuracyBudget.max_terms must be >= 50");
        }
    }
};

/// Full double precision; used where E1 values feed cancellation-prone sums.
inline constexpr AccuracyBudget kMachinePrecision{std::numeric_limits<double>::epsilon(), 1000};

namespace detail {

inline constexpr double kTinyFloor = 1e-300;

// Both expansions converge slowly near x = 1, where the last correction
// understates the remaining error; stop two decades below the target.
inline double stopping_tolerance(const AccuracyBudget& budget) {
    return std::max(budget.rel_tol * 1e-2, std::numeric_limits<double>::epsilon());
}

inline void require_positive(double x, const char* fn) {
    if (!(x > 0.0)) {
        throw DomainError(std::string(fn) + ": argument must be > 0, got " + std::to_string(x));
    }
}

// E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!), used for x <= 1.
inline double e1_series(double x, const AccuracyBudget& budget) {
    double sum = 0.0;
    double term = 1.0;  // (-x)^k / k!
    const double tol = stopping_tolerance(budget);
    for (int k = 1; k <= budget.max_terms; ++k) {
        term *= -x / k;
        const double contrib = term / k;
        sum += contrib;
        if (std::abs(contrib) <= tol * std::abs(sum) + kTinyFloor) {
            return -std::numbers::egamma - std::log(x) - sum;
        }
    }
    throw NumericalError("exp_integral_e1: power series did not converge", x);
}

// Modified Lentz evaluation of the continued fraction
//   e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))
// which yields the scaled value directly, for x > 1.
inline double e1_scaled_continued_fraction(double x, const AccuracyBudget& budget) {
    constexpr double fpmin = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    double b = x + 1.0;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    const double tol = stopping_tolerance(budget);
    for (int i = 1; i <= budget.max_terms; ++i) {
        const double a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) <= tol) {
            return h;
        }
    }
    throw NumericalError("scaled_e1: continued fraction did not converge", x);
}

}  // namespace detail

/// Exponential integral E1(x) = int_x^inf e^-t / t dt for x > 0.
inline double exp_integral_e1(double x, const AccuracyBudget& budget = {}) {
    detail::require_positive(x, "exp_integral_e1");
    budget.validate();
    if (x <= 1.0) {
        return detail::e1_series(x, budget);
    }
    // e^-x underflows past ~745; the product then correctly rounds to 0.
    return detail::e1_scaled_continued_fraction(x, budget) * std::exp(-x);
}

/// e^x E1(x) without overflow; behaves like 1/x - 1/x^2 + ... for large x.
inline double scaled_e1(double x, const AccuracyBudget& budget = {}) {
    detail::require_positive(x, "scaled_e1");
    budget.validate();
    if (x <= 1.0) {
        return std::exp(x) * detail::e1_series(x, budget);
    }
    return detail::e1_scaled_continued_fraction(x, budget);
}

/// Complementary error function on x >= 0.
inline double erfc(double x) {
    if (!(x >= 0.0)) {
        throw DomainError("erfc: argument must be >= 0, got " + std::to_string(x));
    }
    return std::erfc(x);
}

}  // namespace afscale
