#pragma once

// Closed-form and quadrature expected distortions, the large-M scaling laws of
// the four access schemes, and bounds for heterogeneous networks.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "afscale/errors.hpp"
#include "afscale/model.hpp"
#include "afscale/quadrature.hpp"
#include "afscale/specfun.hpp"

namespace afscale {

enum class DecayRate { InvLogM, InvM };

/// One point of a large-M expected-distortion curve.
struct AsymptoticCurve {
    double limit_value;  ///< E[D] as M -> infinity
    double value;        ///< full asymptotic expression at this M
    DecayRate decay_rate;
};

// ---------------------------------------------------------------------------
// Moments of g_max

/// Largest M accepted by the alternating binomial sum; beyond this the sign
/// cancellation eats more digits than double precision can spare.
inline constexpr std::uint64_t kExactSumMaxSensors = 15;

/// E[1/(g_max + b)] as the exact alternating binomial sum of scaled E1 terms.
inline double gmax_inverse_moment_exact_sum(double lambda, double b, std::uint64_t m) {
    if (m < 1 || m > kExactSumMaxSensors) {
        throw DomainError("gmax_inverse_moment_exact_sum: requires 1 <= M <= 15; use quadrature");
    }
    if (!(lambda > 0.0 && b > 0.0)) throw DomainError("gmax_inverse_moment_exact_sum: lambda, b must be > 0");
    double sum = 0.0;
    double binom = 1.0;  // C(M-1, k)
    for (std::uint64_t k = 0; k < m; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double z = lambda * static_cast<double>(k + 1) * b;
        sum += sign * binom * scaled_e1(z, kMachinePrecision);
        binom = binom * static_cast<double>(m - 1 - k) / static_cast<double>(k + 1);
    }
    return static_cast<double>(m) * lambda * sum;
}

/// E[1/(g_max + b)] by quadrature; valid for any M.
inline double gmax_inverse_moment_quadrature(double lambda, double b, std::uint64_t m) {
    if (!(lambda > 0.0 && b > 0.0) || m < 1) {
        throw DomainError("gmax_inverse_moment_quadrature: lambda, b > 0 and M >= 1 required");
    }
    return gmax_expectation([b](double x) { return std::isinf(x) ? 0.0 : 1.0 / (x + b); }, lambda,
                            static_cast<double>(m));
}

/// E[g_max^{-p}] for p in {1/2, 1}. The p = 1 moment diverges for M = 1.
inline double gmax_negative_moment(double lambda, std::uint64_t m, double p) {
    if (!(lambda > 0.0) || m < 1) throw DomainError("gmax_negative_moment: lambda > 0 and M >= 1 required");
    const double md = static_cast<double>(m);
    if (p == 0.5) {
        return gmax_expectation([](double x) { return std::isinf(x) ? 0.0 : 1.0 / std::sqrt(x); }, lambda, md);
    }
    if (p == 1.0) {
        if (m == 1) throw DomainError("gmax_negative_moment: E[1/g] diverges for M = 1");
        return gmax_expectation([](double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }, lambda, md);
    }
    throw DomainError("gmax_negative_moment: only exponents 1/2 and 1 are supported");
}

// ---------------------------------------------------------------------------
// Scaling laws

namespace detail {

inline void require_m(std::uint64_t m, std::uint64_t min, const char* fn) {
    if (m < min) throw DomainError(std::string(fn) + ": M too small");
}

// a (1 + c lambda_eff / ln M) for a given sensor noise variance.
inline double diversity_law(double sigma_theta2, double sigma2, double sigma_n2, double lambda_eff,
                            double log_m) {
    const double total = sigma_theta2 + sigma2;
    const double a = sigma_theta2 * sigma2 / total;
    const double c = sigma_n2 * sigma_theta2 / (sigma2 * total);
    return a * (1.0 + c * lambda_eff / log_m);
}

inline double aloha_weight(double sigma_theta2, double diversity_value) {
    const double inv_e = std::exp(-1.0);
    return sigma_theta2 * (1.0 - inv_e) + inv_e * diversity_value;
}

// Limit and 1/M term of the orthogonal law for rate lambda_eff.
inline double orthogonal_law(double sigma_theta2, double sigma2, double sigma_n2, double lambda_eff, double m) {
    const double limit = 1.0 / (1.0 / sigma_theta2 + 1.0 / (lambda_eff * sigma_n2));
    return limit + 2.0 * sigma2 / (m * lambda_eff * lambda_eff * sigma_n2 * sigma_n2) * limit * limit;
}

}  // namespace detail

/// Diversity: a (1 + c lambda / ln M), converging to a at rate 1/ln M.
inline AsymptoticCurve asymptotic_diversity(const NetworkParams& p, std::uint64_t m) {
    detail::require_m(m, 2, "asymptotic_diversity");
    const auto k = DerivedConstants::from(p);
    return {k.a_limit, detail::diversity_law(p.sigma_theta2, p.sigma_v2, p.sigma_n2, p.lambda, std::log(double(m))),
            DecayRate::InvLogM};
}

/// Channel-aware ALOHA: sigma_theta2 (1 - 1/e) + (1/e) * diversity law.
inline AsymptoticCurve asymptotic_aloha(const NetworkParams& p, std::uint64_t m) {
    const auto div = asymptotic_diversity(p, m);
    return {detail::aloha_weight(p.sigma_theta2, div.limit_value), detail::aloha_weight(p.sigma_theta2, div.value),
            DecayRate::InvLogM};
}

/// First two moments of a single channel gain; exponential(lambda) by default.
struct GainMoments {
    double mean;       ///< E[g]
    double mean_sqrt;  ///< E[sqrt(g)]

    static GainMoments exponential(double lambda) {
        return {1.0 / lambda, 0.5 * std::sqrt(std::numbers::pi / lambda)};
    }
};

/// Coherent MAC with alpha_i = 1/sqrt(M): (sigma_v2 E[g] + sigma_n2) / (M E[sqrt g]^2).
inline AsymptoticCurve asymptotic_mac(const NetworkParams& p, std::uint64_t m, const GainMoments& g) {
    detail::require_m(m, 1, "asymptotic_mac");
    const double value = (p.sigma_v2 * g.mean + p.sigma_n2) / (double(m) * g.mean_sqrt * g.mean_sqrt);
    return {0.0, value, DecayRate::InvM};
}

inline AsymptoticCurve asymptotic_mac(const NetworkParams& p, std::uint64_t m) {
    return asymptotic_mac(p, m, GainMoments::exponential(p.lambda));
}

/// Orthogonal access with alpha_i = 1/sqrt(M): L + 2 sigma_v2 L^2 / (M lambda^2 sigma_n2^2).
inline AsymptoticCurve asymptotic_orthogonal(const NetworkParams& p, std::uint64_t m) {
    detail::require_m(m, 1, "asymptotic_orthogonal");
    const double limit = 1.0 / (1.0 / p.sigma_theta2 + 1.0 / (p.lambda * p.sigma_n2));
    return {limit, detail::orthogonal_law(p.sigma_theta2, p.sigma_v2, p.sigma_n2, p.lambda, double(m)),
            DecayRate::InvM};
}

// ---------------------------------------------------------------------------
// Exact finite-M expectations

/// Diversity scheme with constant alpha2: a (1 + (c/alpha2) E[1/(g_max + b/alpha2)]).
inline double quadrature_expected_distortion_diversity(const NetworkParams& p, std::uint64_t m,
                                                       double alpha2 = 1.0) {
    if (m < 1) throw DomainError("quadrature_expected_distortion_diversity: M >= 1 required");
    if (!(alpha2 > 0.0)) return p.sigma_theta2;
    const auto k = DerivedConstants::from(p);
    const double moment = gmax_inverse_moment_quadrature(p.lambda, k.b_shift / alpha2, m);
    return k.a_limit * (1.0 + k.c_coeff / alpha2 * moment);
}

/// Probability that exactly one of M sensors exceeds the threshold.
inline double aloha_success_probability(double lambda, std::uint64_t m, double threshold) {
    const double q = std::exp(-lambda * threshold);
    return double(m) * q * pow1m(q, double(m - 1));
}

/// ALOHA with threshold T and constant alpha2 for the transmitter, in closed form:
///   sigma_theta2 (1 - s) + s a (1 + (c lambda / alpha2) e^z E1(z)),  z = lambda (b/alpha2 + T)
/// where s is the single-transmitter probability.
inline double quadrature_expected_distortion_aloha(const NetworkParams& p, std::uint64_t m, double threshold,
                                                  double alpha2 = 1.0) {
    if (!(threshold >= 0.0)) throw DomainError("quadrature_expected_distortion_aloha: T >= 0 required");
    if (m < 1) throw DomainError("quadrature_expected_distortion_aloha: M >= 1 required");
    if (!(alpha2 > 0.0)) return p.sigma_theta2;
    const double s = aloha_success_probability(p.lambda, m, threshold);
    if (s == 0.0) return p.sigma_theta2;
    const auto k = DerivedConstants::from(p);
    const double z = p.lambda * (k.b_shift / alpha2 + threshold);
    const double conditional = k.a_limit * (1.0 + k.c_coeff * p.lambda / alpha2 * scaled_e1(z, kMachinePrecision));
    return p.sigma_theta2 * (1.0 - s) + s * conditional;
}

// ---------------------------------------------------------------------------
// Heterogeneous-network bounds

enum class BoundKind {
    NoiseVariance,  ///< sigma_i^2 in [sigma_min2, sigma_max2], i.i.d. fading
    FadingScale,    ///< g_i = mu_i h_i, h_i ~ Exp(1), identical sensor noise
    Both,
};

/// Lower/upper expected-distortion bounds at finite M, obtained by dropping the
/// (1 + o(1)) factors of the asymptotic bounds; indicative only at finite M.
struct BoundPair {
    double lower;
    double upper;
    double lower_limit;  ///< lower bound as M -> infinity
    double upper_limit;  ///< upper bound as M -> infinity
    bool shares_limit;   ///< both bounds converge to the same value
    bool asymptotic_only = true;
};

inline BoundPair asymptotic_bounds(Scheme scheme, const NetworkParams& p, const AsymmetricRanges& r, BoundKind kind,
                                   std::uint64_t m) {
    r.validate();
    if (m < 2) throw DomainError("asymptotic_bounds: M >= 2 required");
    const bool use_sigma = kind != BoundKind::FadingScale;
    const bool use_mu = kind != BoundKind::NoiseVariance;
    // Smaller noise and larger fading scale give less distortion.
    const double s_lo = use_sigma ? r.sigma_min2 : p.sigma_v2;
    const double s_hi = use_sigma ? r.sigma_max2 : p.sigma_v2;
    // With fading scale factors the base gain is Exp(1); mu acts as 1/lambda.
    const double rate_lo_bound = use_mu ? 1.0 / r.mu_max : p.lambda;  // rate used in the lower bound
    const double rate_hi_bound = use_mu ? 1.0 / r.mu_min : p.lambda;  // rate used in the upper bound
    const double md = double(m);
    const double log_m = std::log(md);
    constexpr double kFarM = 1e300;

    BoundPair out{};
    switch (scheme) {
        case Scheme::Diversity:
        case Scheme::Aloha: {
            auto law = [&](double s2, double rate, double lm) {
                const double d = detail::diversity_law(p.sigma_theta2, s2, p.sigma_n2, rate, lm);
                return scheme == Scheme::Aloha ? detail::aloha_weight(p.sigma_theta2, d) : d;
            };
            out.lower = law(s_lo, rate_lo_bound, log_m);
            out.upper = law(s_hi, rate_hi_bound, log_m);
            out.lower_limit = law(s_lo, rate_lo_bound, HUGE_VAL);
            out.upper_limit = law(s_hi, rate_hi_bound, HUGE_VAL);
            break;
        }
        case Scheme::Mac: {
            // E[g] and E[sqrt g]^2 scale with mu; numerator and denominator take opposite ends.
            const auto h = use_mu ? GainMoments::exponential(1.0) : GainMoments::exponential(p.lambda);
            const double mu_lo = use_mu ? r.mu_min : 1.0;
            const double mu_hi = use_mu ? r.mu_max : 1.0;
            auto law = [&](double s2, double mu_num, double mu_den, double mm) {
                return (s2 * mu_num * h.mean + p.sigma_n2) / (mm * mu_den * h.mean_sqrt * h.mean_sqrt);
            };
            out.lower = law(s_lo, mu_lo, mu_hi, md);
            out.upper = law(s_hi, mu_hi, mu_lo, md);
            out.lower_limit = 0.0;
            out.upper_limit = 0.0;
            break;
        }
        case Scheme::Orthogonal: {
            out.lower = detail::orthogonal_law(p.sigma_theta2, s_lo, p.sigma_n2, rate_lo_bound, md);
            out.upper = detail::orthogonal_law(p.sigma_theta2, s_hi, p.sigma_n2, rate_hi_bound, md);
            out.lower_limit = detail::orthogonal_law(p.sigma_theta2, s_lo, p.sigma_n2, rate_lo_bound, kFarM);
            out.upper_limit = detail::orthogonal_law(p.sigma_theta2, s_hi, p.sigma_n2, rate_hi_bound, kFarM);
            break;
        }
    }
    out.shares_limit = std::abs(out.upper_limit - out.lower_limit) <= 1e-12 * std::max(1.0, std::abs(out.upper_limit));
    return out;
}

}  // namespace afscale
