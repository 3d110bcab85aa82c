#pragma once

// Optimal power allocation (water-filling) for the diversity and ALOHA schemes,
// and threshold selection for ALOHA with constant or jointly optimized power.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "afscale/analysis.hpp"
#include "afscale/errors.hpp"
#include "afscale/model.hpp"
#include "afscale/quadrature.hpp"
#include "afscale/specfun.hpp"
#include "afscale/waterfill.hpp"

namespace afscale {

struct WaterFillSolution {
    double nu = 0.0;
    double cutoff = 0.0;               ///< b^2 nu (diversity) or max(T, b^2 nu) (ALOHA)
    double constraint_residual = 0.0;  ///< achieved power minus budget
    double relative_residual = 0.0;    ///< |residual| / budget
    double inactive_probability = 0.0; ///< diversity: P(g_max < b^2 nu)
    double expected_distortion = 0.0;
};

struct ThresholdSolution {
    double t_star = 0.0;
    double expected_distortion = 0.0;
    std::optional<WaterFillSolution> joint;
    std::vector<double> local_minima;  ///< interior local minima seen on the scan grid
    double curvature = 0.0;            ///< central-difference d^2 E[D] / dT^2 at t_star
    bool second_order_ok = false;
};

inline constexpr double kNuLowest = 1e-15;
inline constexpr double kNuHighest = 1e12;
inline constexpr double kMaxRelativeResidual = 1e-8;

namespace detail {

// Root of a strictly decreasing f on [lo_min, hi_max], bracketed by decade
// expansion from `guess` and refined with TOMS 748.
template <class F>
double solve_decreasing(F&& f, double guess, double lo_min, double hi_max, const char* what) {
    guess = std::clamp(guess, lo_min, hi_max);
    double lo = guess;
    double hi = guess;
    double f_lo = f(guess);
    double f_hi = f_lo;
    if (f_lo == 0.0) return guess;
    if (f_lo > 0.0) {
        while (f_hi > 0.0) {
            lo = hi;
            f_lo = f_hi;
            if (hi >= hi_max) throw NumericalError(std::string(what) + ": bracket not found below upper limit", f_hi);
            hi = std::min(hi * 10.0, hi_max);
            f_hi = f(hi);
        }
    } else {
        while (f_lo < 0.0) {
            hi = lo;
            f_hi = f_lo;
            if (lo <= lo_min) throw NumericalError(std::string(what) + ": bracket not found above lower limit", f_lo);
            lo = std::max(lo / 10.0, lo_min);
            f_lo = f(lo);
        }
    }
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    boost::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                     boost::math::tools::eps_tolerance<double>(46), max_iter);
    return 0.5 * (r.first + r.second);
}

inline void require_budget(double budget, const char* fn) {
    if (!(budget > 0.0) || !std::isfinite(budget)) throw ParameterError(std::string(fn) + ": budget must be > 0");
}

inline void check_residual(WaterFillSolution& s, double budget, const char* fn) {
    s.relative_residual = std::abs(s.constraint_residual) / budget;
    if (!(s.relative_residual <= kMaxRelativeResidual)) {
        throw NumericalError(std::string(fn) + ": power constraint not met", s.relative_residual);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Diversity scheme

/// E[alpha^2] under water-filling with multiplier nu, alpha^2 evaluated at g_max.
inline double diversity_power_usage(const NetworkParams& p, std::uint64_t m, double nu) {
    const double b = DerivedConstants::from(p).b_shift;
    const double cutoff = b * b * nu;
    return gmax_expectation(
        [nu, b](double x) { return std::isinf(x) ? 0.0 : std::max(0.0, 1.0 / std::sqrt(x * nu) - b / x); },
        p.lambda, double(m), cutoff);
}

/// Multiplier nu meeting E[alpha^2] = budget, with budget = P/(sigma_theta2+sigma_v2).
inline WaterFillSolution solve_nu_diversity(const NetworkParams& p, std::uint64_t m, double budget) {
    detail::require_budget(budget, "solve_nu_diversity");
    if (m < 1) throw DomainError("solve_nu_diversity: M >= 1 required");
    const auto k = DerivedConstants::from(p);
    const double guess = p.lambda / std::log(std::max<double>(double(m), 3.0));
    const double nu = detail::solve_decreasing(
        [&](double v) { return diversity_power_usage(p, m, v) - budget; }, guess, kNuLowest, kNuHighest,
        "solve_nu_diversity");

    WaterFillSolution s;
    s.nu = nu;
    s.cutoff = k.b_shift * k.b_shift * nu;
    s.constraint_residual = diversity_power_usage(p, m, nu) - budget;
    detail::check_residual(s, budget, "solve_nu_diversity");
    s.inactive_probability = gmax_cdf(s.cutoff, p.lambda, double(m));

    // a (1 - F0) + a c sqrt(nu) E[g^{-1/2}; g >= cutoff] + sigma_theta2 F0
    const double tail = gmax_expectation([](double x) { return std::isinf(x) ? 0.0 : 1.0 / std::sqrt(x); },
                                         p.lambda, double(m), s.cutoff);
    const double f0 = s.inactive_probability;
    s.expected_distortion =
        k.a_limit * (1.0 - f0) + k.a_limit * k.c_coeff * std::sqrt(nu) * tail + p.sigma_theta2 * f0;
    return s;
}

inline double expected_distortion_diversity_optimal(const NetworkParams& p, std::uint64_t m, double budget) {
    return solve_nu_diversity(p, m, budget).expected_distortion;
}

// ---------------------------------------------------------------------------
// Channel-aware ALOHA

/// Per-sensor E[alpha^2; g > T] under water-filling:
///   sqrt(lambda pi / nu) erfc(sqrt(lambda a)) - b lambda E1(lambda a),  a = max(T, b^2 nu).
inline double aloha_power_usage(const NetworkParams& p, double threshold, double nu) {
    const double b = DerivedConstants::from(p).b_shift;
    const double a = std::max(threshold, b * b * nu);
    const double z = p.lambda * a;
    return std::sqrt(p.lambda * std::numbers::pi / nu) * erfc(std::sqrt(z)) -
           b * p.lambda * exp_integral_e1(z, kMachinePrecision);
}

namespace detail {

// E[D] for ALOHA with threshold T under water-filling nu (general-T form).
inline double aloha_optimal_distortion(const NetworkParams& p, std::uint64_t m, double threshold, double nu) {
    const auto k = DerivedConstants::from(p);
    const double a = std::max(threshold, k.b_shift * k.b_shift * nu);
    const double pt = std::exp(-p.lambda * threshold);
    const double pa = std::exp(-p.lambda * a);
    const double q = pow1m(pt, double(m - 1));
    const double s = double(m) * pt * q;
    const double active = k.a_limit * pa +
                          k.a_limit * k.c_coeff * std::sqrt(nu * p.lambda * std::numbers::pi) *
                              erfc(std::sqrt(p.lambda * a)) +
                          p.sigma_theta2 * (pt - pa);
    return p.sigma_theta2 * (1.0 - s) + double(m) * q * active;
}

}  // namespace detail

/// Multiplier nu for ALOHA with threshold T and per-sensor budget P/(M(sigma_theta2+sigma_v2)).
/// When the cutoff is T the constraint is solved in closed form; otherwise by root search
/// over nu > T/b^2.
inline WaterFillSolution solve_nu_aloha(const NetworkParams& p, std::uint64_t m, double threshold,
                                        double per_sensor_budget) {
    detail::require_budget(per_sensor_budget, "solve_nu_aloha");
    if (!(threshold >= 0.0)) throw DomainError("solve_nu_aloha: T >= 0 required");
    if (m < 1) throw DomainError("solve_nu_aloha: M >= 1 required");
    const auto k = DerivedConstants::from(p);
    const double b2 = k.b_shift * k.b_shift;

    std::optional<double> nu;
    if (threshold > 0.0) {
        const double z = p.lambda * threshold;
        const double amp = std::sqrt(p.lambda * std::numbers::pi) * erfc(std::sqrt(z));
        const double offset = k.b_shift * p.lambda * exp_integral_e1(z, kMachinePrecision);
        const double closed = std::pow(amp / (per_sensor_budget + offset), 2);
        if (b2 * closed <= threshold) nu = closed;
    }
    if (!nu) {
        const double lo = std::max(threshold / b2, kNuLowest);
        const double guess = std::max(lo, p.lambda / std::log(std::max<double>(double(m), 3.0)));
        nu = detail::solve_decreasing([&](double v) { return aloha_power_usage(p, threshold, v) - per_sensor_budget; },
                                      guess, lo, kNuHighest, "solve_nu_aloha");
    }

    WaterFillSolution s;
    s.nu = *nu;
    s.cutoff = std::max(threshold, b2 * s.nu);
    s.constraint_residual = aloha_power_usage(p, threshold, s.nu) - per_sensor_budget;
    detail::check_residual(s, per_sensor_budget, "solve_nu_aloha");
    s.inactive_probability = -std::expm1(-p.lambda * s.cutoff);
    s.expected_distortion = detail::aloha_optimal_distortion(p, m, threshold, s.nu);
    return s;
}

/// E[D] for ALOHA at threshold T under water-filling with total normalized budget.
inline double expected_distortion_aloha_optimal(const NetworkParams& p, std::uint64_t m, double threshold,
                                                double budget) {
    detail::require_budget(budget, "expected_distortion_aloha_optimal");
    return solve_nu_aloha(p, m, threshold, budget / double(m)).expected_distortion;
}

/// E[D] for ALOHA at threshold T with constant power normalized to alpha^2 = budget e^{lambda T} / M,
/// so that the average total power equals the budget for every T.
inline double expected_distortion_aloha_threshold(const NetworkParams& p, std::uint64_t m, double threshold,
                                                  double budget = 1.0) {
    if (!(threshold >= 0.0)) throw DomainError("expected_distortion_aloha_threshold: T >= 0 required");
    if (m < 1) throw DomainError("expected_distortion_aloha_threshold: M >= 1 required");
    const auto k = DerivedConstants::from(p);
    const double md = double(m);
    const double pt = std::exp(-p.lambda * threshold);
    const double q = pow1m(pt, md - 1.0);
    // sigma_n2 M e^{-lambda T} / (budget (sigma_theta2 + sigma_v2))
    const double shift = k.b_shift * md * pt / budget;
    // exp(lambda shift) E1(lambda (shift + T)) = e^{-lambda T} * scaled_e1(lambda (shift + T))
    const double z = p.lambda * (shift + threshold);
    if (!(z > 0.0)) return p.sigma_theta2;
    const double e1_term = pt * scaled_e1(z, kMachinePrecision);
    const double bracket = pt + k.c_coeff * md * pt / budget * p.lambda * e1_term;
    return p.sigma_theta2 * (1.0 - md * pt * q) + md * q * k.a_limit * bracket;
}

// ---------------------------------------------------------------------------
// Threshold line search

namespace detail {

inline constexpr int kThresholdGridPoints = 200;
inline constexpr double kGridLowFraction = 0.05;
inline constexpr double kGridHighFraction = 3.0;
inline constexpr double kGridCeilingFraction = 10.0;
inline constexpr double kGoldenTolerance = 1e-6;

template <class F>
double golden_section(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

// Coarse scan on (0.05, 3] ln(M)/lambda, extended toward 10 ln(M)/lambda while the
// minimum sits on the upper edge, then golden-section refinement.
inline ThresholdSolution minimize_over_threshold(const std::function<double(double)>& objective, double lambda,
                                                 std::uint64_t m) {
    const double scale = std::log(double(m)) / lambda;
    const double lo = kGridLowFraction * scale;
    const double step = (kGridHighFraction - kGridLowFraction) * scale / (kThresholdGridPoints - 1);
    std::vector<double> ts;
    std::vector<double> fs;
    for (int i = 0; i < kThresholdGridPoints; ++i) {
        ts.push_back(lo + step * i);
        fs.push_back(objective(ts.back()));
    }
    auto argmin = [&] { return std::size_t(std::min_element(fs.begin(), fs.end()) - fs.begin()); };
    std::size_t best = argmin();
    while (best + 1 == ts.size() && ts.back() + step <= kGridCeilingFraction * scale) {
        ts.push_back(ts.back() + step);
        fs.push_back(objective(ts.back()));
        best = argmin();
    }

    ThresholdSolution sol;
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
        if (fs[i] < fs[i - 1] && fs[i] <= fs[i + 1]) sol.local_minima.push_back(ts[i]);
    }

    const double left = best == 0 ? 1e-9 * scale : ts[best - 1];
    const double right = best + 1 == ts.size() ? ts[best] : ts[best + 1];
    double t_star = golden_section(objective, left, right, kGoldenTolerance);
    double f_star = objective(t_star);
    if (fs[best] < f_star) {
        t_star = ts[best];
        f_star = fs[best];
    }
    sol.t_star = t_star;
    sol.expected_distortion = f_star;

    const double h = 1e-4 * t_star;
    sol.curvature = (objective(t_star + h) - 2.0 * f_star + objective(t_star - h)) / (h * h);
    sol.second_order_ok = sol.curvature > 0.0;
    return sol;
}

}  // namespace detail

/// T* minimizing E[D] under constant power normalized to the budget.
inline ThresholdSolution optimize_threshold_constant_power(const NetworkParams& p, std::uint64_t m,
                                                           double budget = 1.0) {
    if (m < 2) throw DomainError("optimize_threshold_constant_power: M >= 2 required");
    detail::require_budget(budget, "optimize_threshold_constant_power");
    return detail::minimize_over_threshold(
        [&](double t) { return expected_distortion_aloha_threshold(p, m, t, budget); }, p.lambda, m);
}

/// Joint threshold and water-filling power: outer line search over T, exact inner nu per T.
inline ThresholdSolution optimize_threshold_joint(const NetworkParams& p, std::uint64_t m, double budget) {
    if (m < 2) throw DomainError("optimize_threshold_joint: M >= 2 required");
    detail::require_budget(budget, "optimize_threshold_joint");
    const double per_sensor = budget / double(m);
    auto sol = detail::minimize_over_threshold(
        [&](double t) { return solve_nu_aloha(p, m, t, per_sensor).expected_distortion; }, p.lambda, m);
    sol.joint = solve_nu_aloha(p, m, sol.t_star, per_sensor);
    return sol;
}

// ---------------------------------------------------------------------------
// Large-M sandwich at the optimal threshold

/// Where E[D](T*) sits relative to the ALOHA limit and the constant-power law:
/// lower_limit <= E (1 + epsilon) and E <= upper (1 + epsilon), with epsilon minimal.
struct SandwichReport {
    double lower_limit;
    double upper;
    double expected_distortion;
    double epsilon;
};

inline SandwichReport threshold_sandwich(const NetworkParams& p, std::uint64_t m, double expected_distortion) {
    const auto law = asymptotic_aloha(p, m);
    SandwichReport r{law.limit_value, law.value, expected_distortion, 0.0};
    r.epsilon = std::max({0.0, r.lower_limit / expected_distortion - 1.0, expected_distortion / r.upper - 1.0});
    return r;
}

}  // namespace afscale
