#pragma once

// Per-realization LMMSE distortion at the fusion center for each access scheme.

#include <cmath>
#include <span>

#include "afscale/errors.hpp"
#include "afscale/model.hpp"

namespace afscale {

enum class AlohaEvent { NotApplicable, NoneTransmitted, Collision, Success };

struct TrialOutcome {
    double distortion = 0.0;
    AlohaEvent aloha_event = AlohaEvent::NotApplicable;
};

/// Single sensor with gain g and amplification alpha2 reaching the fusion center.
/// Evaluated in the factored form a (1 + c / (g alpha2 + b)).
inline double distortion_diversity(double gmax, double alpha2, const NetworkParams& p) {
    const double signal = gmax * alpha2;
    if (!(signal > 0.0)) return p.sigma_theta2;
    if (!std::isfinite(signal)) return DerivedConstants::from(p).a_limit;
    const auto k = DerivedConstants::from(p);
    return k.a_limit * (1.0 + k.c_coeff / (signal + k.b_shift));
}

inline TrialOutcome distortion_aloha(const AlohaDraw& draw, double alpha2, const NetworkParams& p) {
    if (draw.exceedances == 0) return {p.sigma_theta2, AlohaEvent::NoneTransmitted};
    if (draw.exceedances >= 2) return {p.sigma_theta2, AlohaEvent::Collision};
    return {distortion_diversity(draw.transmitter_gain, alpha2, p), AlohaEvent::Success};
}

namespace detail {

inline void require_same_size(std::span<const double> gains, std::span<const double> a,
                              std::span<const double> s, const char* fn) {
    if (gains.empty()) throw DomainError(std::string(fn) + ": empty gains vector");
    if (a.size() != gains.size() || s.size() != gains.size()) {
        throw DomainError(std::string(fn) + ": per-sensor vectors must match the gains length");
    }
}

}  // namespace detail

/// Coherent multi-access with per-sensor alpha_i^2 and noise variances sigma_i^2.
inline double distortion_mac(std::span<const double> gains, std::span<const double> alpha2,
                             std::span<const double> sigma2, double sigma_theta2, double sigma_n2) {
    detail::require_same_size(gains, alpha2, sigma2, "distortion_mac");
    double noise = sigma_n2;
    double coherent = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        noise += gains[i] * alpha2[i] * sigma2[i];
        coherent += std::sqrt(gains[i] * alpha2[i]);
    }
    const double denom = noise + sigma_theta2 * coherent * coherent;
    if (!(denom > 0.0)) return sigma_theta2;
    return sigma_theta2 * noise / denom;
}

/// Symmetric coherent multi-access with common alpha^2.
inline double distortion_mac(std::span<const double> gains, double alpha2_common, const NetworkParams& p) {
    if (gains.empty()) throw DomainError("distortion_mac: empty gains vector");
    double sum_g = 0.0;
    double sum_sqrt_g = 0.0;
    for (double g : gains) {
        sum_g += g;
        sum_sqrt_g += std::sqrt(g);
    }
    const double noise = alpha2_common * p.sigma_v2 * sum_g + p.sigma_n2;
    const double coherent2 = alpha2_common * sum_sqrt_g * sum_sqrt_g;
    const double denom = noise + p.sigma_theta2 * coherent2;
    if (!(denom > 0.0)) return p.sigma_theta2;
    return p.sigma_theta2 * noise / denom;
}

/// Orthogonal channels with per-sensor alpha_i^2 and noise variances sigma_i^2.
inline double distortion_orthogonal(std::span<const double> gains, std::span<const double> alpha2,
                                    std::span<const double> sigma2, double sigma_theta2, double sigma_n2) {
    detail::require_same_size(gains, alpha2, sigma2, "distortion_orthogonal");
    double info = 1.0 / sigma_theta2;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        const double s = gains[i] * alpha2[i];
        if (s > 0.0) info += s / (s * sigma2[i] + sigma_n2);
    }
    return 1.0 / info;
}

/// Symmetric orthogonal access with common alpha^2.
inline double distortion_orthogonal(std::span<const double> gains, double alpha2_common, const NetworkParams& p) {
    if (gains.empty()) throw DomainError("distortion_orthogonal: empty gains vector");
    if (!(alpha2_common > 0.0)) return p.sigma_theta2;
    double info = 1.0 / p.sigma_theta2;
    for (double g : gains) {
        const double s = g * alpha2_common;
        info += s / (s * p.sigma_v2 + p.sigma_n2);
    }
    return 1.0 / info;
}

}  // namespace afscale
