#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "afscale/errors.hpp"
#include "afscale/model.hpp"

namespace afscale {

struct QuadratureOptions {
    double rel_tol = 1e-10;
    std::size_t max_refinements = 15;
};

/// Adaptive double-exponential quadrature on a finite interval; tolerates
/// integrable endpoint singularities. Throws NumericalError when the error
/// estimate exceeds rel_tol relative to the L1 norm of the integrand.
template <class F>
double integrate_finite(F&& f, double lo, double hi, const QuadratureOptions& opts = {}) {
    if (!(hi > lo)) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> engine(opts.max_refinements);
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    // Ask for more than we promise; the level-difference estimate is pessimistic.
    const double request = std::max(opts.rel_tol * 1e-2, 4 * std::numeric_limits<double>::epsilon());
    double result = 0.0;
    try {
        result = engine.integrate(f, lo, hi, request, &error, &l1, &levels);
    } catch (const std::exception& e) {
        throw NumericalError(std::string("quadrature failed: ") + e.what(), error);
    }
    if (!std::isfinite(result) || error > opts.rel_tol * std::max(l1, 1e-300)) {
        throw NumericalError("quadrature did not reach the requested accuracy", error);
    }
    return result;
}

/// Double-exponential quadrature on [lo, inf) for exponentially decaying integrands.
template <class F>
double integrate_upper_tail(F&& f, double lo, const QuadratureOptions& opts = {}) {
    thread_local boost::math::quadrature::exp_sinh<double> engine(opts.max_refinements);
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double request = std::max(opts.rel_tol * 1e-2, 4 * std::numeric_limits<double>::epsilon());
    double result = 0.0;
    try {
        result = engine.integrate([&](double t) { return f(lo + t); }, request, &error, &l1, &levels);
    } catch (const std::exception& e) {
        throw NumericalError(std::string("quadrature failed: ") + e.what(), error);
    }
    if (!std::isfinite(result) || error > opts.rel_tol * std::max(l1, 1e-300)) {
        throw NumericalError("quadrature did not reach the requested accuracy", error);
    }
    return result;
}

/// E[f(g_max); g_max >= x_lo] for g_max the max of M exponential(lambda) gains.
/// Evaluated over u = (1 - e^{-lambda x})^M in (F(x_lo), 1), where the density
/// becomes the Jacobian and the integrand is smooth in the interior. When x_lo is
/// past the median, u crowds against 1 and loses resolution, so the tail is
/// integrated in x against the density instead.
template <class F>
double gmax_expectation(F&& f, double lambda, double m, double x_lo = 0.0, const QuadratureOptions& opts = {}) {
    const double u_lo = gmax_cdf(x_lo, lambda, m);
    if (u_lo <= 0.5) {
        auto integrand = [&](double u) { return f(gmax_quantile(u, lambda, m)); };
        return integrate_finite(integrand, u_lo, 1.0, opts);
    }
    auto integrand = [&](double x) {
        if (!std::isfinite(x)) return 0.0;
        const double log_pdf = std::log(m * lambda) + (m - 1.0) * log1mexp(-lambda * x) - lambda * x;
        return f(x) * std::exp(log_pdf);
    };
    return integrate_upper_tail(integrand, x_lo, opts);
}

}  // namespace afscale
