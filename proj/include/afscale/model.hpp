#pragma once

// System parameters, access schemes, power policies and channel-gain sampling.
// Channel power gains are i.i.d. exponential with rate lambda (Rayleigh fading).

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "afscale/errors.hpp"
#include "afscale/rng.hpp"

namespace afscale {

/// Symmetric network: identical sensor noise and i.i.d. fading across sensors.
struct NetworkParams {
    double sigma_theta2 = 1.0;   ///< source variance
    double sigma_v2 = 0.2;       ///< sensor measurement-noise variance
    double sigma_n2 = 0.1;       ///< receiver noise variance
    double lambda = 2.0;         ///< fading rate; gains have mean 1/lambda
    std::uint64_t num_sensors = 1;
    double power_budget = 1.2;   ///< average total transmit power P

    /// The setting used throughout the numerical studies, with P/(sigma_theta2+sigma_v2) = 1.
    static NetworkParams p0(std::uint64_t m = 1) {
        NetworkParams p;
        p.num_sensors = m;
        return p;
    }

    NetworkParams with_sensors(std::uint64_t m) const {
        NetworkParams p = *this;
        p.num_sensors = m;
        return p;
    }

    /// P / (sigma_theta2 + sigma_v2): the bound on E[alpha^2] summed over sensors.
    double normalized_budget() const { return power_budget / (sigma_theta2 + sigma_v2); }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ParameterError(std::string("NetworkParams.") + name + " must be finite and > 0");
            }
        };
        positive(sigma_theta2, "sigma_theta2");
        positive(sigma_v2, "sigma_v2");
        positive(sigma_n2, "sigma_n2");
        positive(lambda, "lambda");
        positive(power_budget, "power_budget");
        if (num_sensors < 1) {
            throw ParameterError("NetworkParams.num_sensors must be >= 1");
        }
    }
};

/// Constants that factor every diversity/ALOHA distortion:
///   D(g) = a_limit * (1 + c_coeff / (g alpha^2 + b_shift)).
struct DerivedConstants {
    double a_limit;  ///< sigma_theta2 sigma_v2 / (sigma_theta2 + sigma_v2), single-sensor floor
    double b_shift;  ///< sigma_n2 / (sigma_theta2 + sigma_v2)
    double c_coeff;  ///< sigma_n2 sigma_theta2 / (sigma_v2 (sigma_theta2 + sigma_v2))

    static DerivedConstants from(const NetworkParams& p) {
        const double total = p.sigma_theta2 + p.sigma_v2;
        return {p.sigma_theta2 * p.sigma_v2 / total, p.sigma_n2 / total,
                p.sigma_n2 * p.sigma_theta2 / (p.sigma_v2 * total)};
    }
};

/// Ranges for heterogeneous sensor noise variances and fading scale factors g_i = mu_i h_i.
struct AsymmetricRanges {
    double sigma_min2;
    double sigma_max2;
    double mu_min;
    double mu_max;

    void validate() const {
        if (!(sigma_min2 > 0.0 && sigma_min2 <= sigma_max2 && std::isfinite(sigma_max2))) {
            throw DomainError("AsymmetricRanges: require 0 < sigma_min2 <= sigma_max2 < inf");
        }
        if (!(mu_min > 0.0 && mu_min <= mu_max && std::isfinite(mu_max))) {
            throw DomainError("AsymmetricRanges: require 0 < mu_min <= mu_max < inf");
        }
    }
};

enum class Scheme { Diversity, Aloha, Mac, Orthogonal };

inline std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::Diversity: return "diversity";
        case Scheme::Aloha: return "aloha";
        case Scheme::Mac: return "mac";
        case Scheme::Orthogonal: return "orthogonal";
    }
    return "unknown";
}

inline std::optional<Scheme> parse_scheme(std::string_view s) {
    if (s == "diversity") return Scheme::Diversity;
    if (s == "aloha") return Scheme::Aloha;
    if (s == "mac") return Scheme::Mac;
    if (s == "orthogonal") return Scheme::Orthogonal;
    return std::nullopt;
}

/// Access scheme plus, for ALOHA, the transmission threshold (defaults to ln(M)/lambda).
struct SchemeConfig {
    Scheme scheme = Scheme::Diversity;
    std::optional<double> threshold;
};

enum class PolicyKind {
    ConstantDiversity,            ///< alpha^2 = budget for the selected sensor
    ConstantAloha,                ///< alpha^2 = budget for a transmitting sensor
    ConstantSqrtM,                ///< alpha^2 = budget / M for every sensor
    ConstantThresholdNormalized,  ///< alpha^2 = budget e^{lambda T} / M
    WaterFilling,                 ///< alpha^2 = sqrt(1/(g nu)) - b/g above the cutoff
};

/// Amplification policy. `budget` is the normalized budget P/(sigma_theta2+sigma_v2)
/// scaling the constant policies; water-filling carries its budget through nu.
struct PowerPolicy {
    PolicyKind kind = PolicyKind::ConstantDiversity;
    double nu = 0.0;
    double budget = 1.0;

    static PowerPolicy constant(PolicyKind k, double budget = 1.0) { return {k, 0.0, budget}; }
    static PowerPolicy water_filling(double nu) { return {PolicyKind::WaterFilling, nu, 1.0}; }
};

// ---------------------------------------------------------------------------
// Numerically careful helpers

/// log(1 - e^x) for x < 0.
inline double log1mexp(double x) {
    return x > -0.6931471805599453 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

/// (1 - p)^n for p in [0, 1]; exact 1 for n = 0.
inline double pow1m(double p, double n) {
    if (n == 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    return std::exp(n * std::log1p(-p));
}

// ---------------------------------------------------------------------------
// Sampling

/// Threshold giving each sensor transmission probability 1/M.
inline double default_threshold(double lambda, std::uint64_t m) {
    if (m <= 1) return 0.0;
    return std::log(static_cast<double>(m)) / lambda;
}

/// M independent exponential(lambda) gains.
inline std::vector<double> sample_gains(const NetworkParams& p, TrialRng& rng) {
    std::vector<double> gains(p.num_sensors);
    for (auto& g : gains) g = rng.exponential(p.lambda);
    return gains;
}

/// Inverse CDF of max of M exponentials: F(x) = (1 - e^{-lambda x})^M.
/// Accepts u in (0, 1]; u = 1 maps to +inf.
inline double gmax_quantile(double u, double lambda, double m) {
    const double y = std::log(u) / m;  // ln(1 - e^{-lambda x})
    if (y == 0.0) return HUGE_VAL;
    return -log1mexp(y) / lambda;
}

/// CDF of the max of M exponentials.
inline double gmax_cdf(double x, double lambda, double m) {
    if (x <= 0.0) return 0.0;
    return std::exp(m * log1mexp(-lambda * x));
}

/// One draw of max(g_1..g_M) in O(1).
inline double sample_gmax(const NetworkParams& p, TrialRng& rng) {
    return gmax_quantile(rng.uniform_open(), p.lambda, static_cast<double>(p.num_sensors));
}

/// Result of one ALOHA slot: how many sensors exceeded the threshold, and the
/// gain of the transmitter when exactly one did.
struct AlohaDraw {
    std::uint64_t exceedances = 0;
    double transmitter_gain = 0.0;
};

/// K ~ Binomial(M, e^{-lambda T}); when K = 1 the gain is T + Exp(lambda) by memorylessness.
inline AlohaDraw sample_aloha_trial_sparse(const NetworkParams& p, double threshold, TrialRng& rng) {
    const double q = std::exp(-p.lambda * threshold);
    std::binomial_distribution<std::uint64_t> binom(p.num_sensors, q);
    AlohaDraw d;
    d.exceedances = binom(rng);
    if (d.exceedances == 1) d.transmitter_gain = threshold + rng.exponential(p.lambda);
    return d;
}

/// Dense reference path: sample every gain and threshold them.
inline AlohaDraw sample_aloha_trial_dense(const NetworkParams& p, double threshold, TrialRng& rng) {
    AlohaDraw d;
    for (std::uint64_t i = 0; i < p.num_sensors; ++i) {
        const double g = rng.exponential(p.lambda);
        if (g > threshold) {
            if (++d.exceedances == 1) d.transmitter_gain = g;
        }
    }
    if (d.exceedances != 1) d.transmitter_gain = 0.0;
    return d;
}

}  // namespace afscale
