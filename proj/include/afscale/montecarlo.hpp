#pragma once

// Monte Carlo estimation of E[D]. Trials are grouped into fixed-size blocks; each
// block is accumulated independently and blocks are merged in index order, so the
// estimate is bit-identical for any number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "afscale/distortion.hpp"
#include "afscale/errors.hpp"
#include "afscale/model.hpp"
#include "afscale/rng.hpp"
#include "afscale/waterfill.hpp"

namespace afscale {

inline constexpr std::uint64_t kDefaultTrials = 100000;
inline constexpr std::uint64_t kMinTrials = 100;

/// Streaming mean / sum of squared deviations (Welford), mergeable (Chan et al.).
class MomentAccumulator {
public:
    void add(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / double(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const MomentAccumulator& other) {
        if (other.count_ == 0) return;
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double n = double(count_ + other.count_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * double(other.count_) / n;
        m2_ += other.m2_ + delta * delta * double(count_) * double(other.count_) / n;
        count_ += other.count_;
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double sample_variance() const { return count_ > 1 ? m2_ / double(count_ - 1) : 0.0; }
    double standard_error() const { return count_ > 0 ? std::sqrt(sample_variance() / double(count_)) : 0.0; }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct AlohaEventCounts {
    std::uint64_t none = 0;
    std::uint64_t collision = 0;
    std::uint64_t success = 0;
};

struct DistortionEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    RngSeed seed;
    SchemeConfig scheme;
    AlohaEventCounts aloha_events;  ///< zero unless the scheme is ALOHA
};

struct MonteCarloOptions {
    unsigned workers = 0;  ///< 0: hardware concurrency
    std::uint64_t block_size = 1024;
};

namespace detail {

struct BlockResult {
    MomentAccumulator moments;
    AlohaEventCounts events;
};

// Resolved per-scheme evaluation; constant policies collapse to a fixed alpha^2.
struct TrialPlan {
    Scheme scheme;
    NetworkParams params;
    double threshold = 0.0;
    double alpha2 = 0.0;
    bool water_filling = false;
    double nu = 0.0;
    double b_shift = 0.0;
};

inline TrialPlan make_plan(const SchemeConfig& cfg, const NetworkParams& p, const PowerPolicy& policy) {
    TrialPlan plan{cfg.scheme, p};
    plan.b_shift = DerivedConstants::from(p).b_shift;
    const double md = double(p.num_sensors);
    if (policy.kind == PolicyKind::WaterFilling) {
        if (!(policy.nu > 0.0)) throw ParameterError("water-filling policy requires nu > 0");
        if (cfg.scheme == Scheme::Mac || cfg.scheme == Scheme::Orthogonal) {
            throw ParameterError("water-filling is defined only for the diversity and ALOHA schemes");
        }
        plan.water_filling = true;
        plan.nu = policy.nu;
    } else if (!(policy.budget > 0.0)) {
        throw ParameterError("constant policy requires a positive budget");
    }
    if (cfg.scheme == Scheme::Aloha) {
        plan.threshold = cfg.threshold.value_or(default_threshold(p.lambda, p.num_sensors));
        if (!(plan.threshold >= 0.0)) throw ParameterError("ALOHA threshold must be >= 0");
    }
    if (plan.water_filling) return plan;

    auto reject = [&] {
        throw ParameterError("power policy is not applicable to the " + std::string(to_string(cfg.scheme)) +
                             " scheme");
    };
    switch (cfg.scheme) {
        case Scheme::Diversity:
            if (policy.kind != PolicyKind::ConstantDiversity) reject();
            plan.alpha2 = policy.budget;
            break;
        case Scheme::Aloha:
            if (policy.kind == PolicyKind::ConstantAloha) {
                plan.alpha2 = policy.budget;
            } else if (policy.kind == PolicyKind::ConstantThresholdNormalized) {
                plan.alpha2 = policy.budget * std::exp(p.lambda * plan.threshold) / md;
            } else {
                reject();
            }
            break;
        case Scheme::Mac:
        case Scheme::Orthogonal:
            if (policy.kind != PolicyKind::ConstantSqrtM) reject();
            plan.alpha2 = policy.budget / md;
            break;
    }
    return plan;
}

inline TrialOutcome run_trial(const TrialPlan& plan, TrialRng& rng) {
    const auto& p = plan.params;
    switch (plan.scheme) {
        case Scheme::Diversity: {
            const double g = sample_gmax(p, rng);
            const double a2 = plan.water_filling ? waterfill_alpha2(g, plan.nu, plan.b_shift) : plan.alpha2;
            return {distortion_diversity(g, a2, p), AlohaEvent::NotApplicable};
        }
        case Scheme::Aloha: {
            const auto draw = sample_aloha_trial_sparse(p, plan.threshold, rng);
            const double a2 = plan.water_filling ? waterfill_alpha2(draw.transmitter_gain, plan.nu, plan.b_shift)
                                                 : plan.alpha2;
            return distortion_aloha(draw, a2, p);
        }
        case Scheme::Mac: {
            const auto gains = sample_gains(p, rng);
            return {distortion_mac(gains, plan.alpha2, p), AlohaEvent::NotApplicable};
        }
        case Scheme::Orthogonal: {
            const auto gains = sample_gains(p, rng);
            return {distortion_orthogonal(gains, plan.alpha2, p), AlohaEvent::NotApplicable};
        }
    }
    return {};
}

inline BlockResult run_block(const TrialPlan& plan, RngSeed seed, std::uint64_t first, std::uint64_t last) {
    BlockResult r;
    for (std::uint64_t i = first; i < last; ++i) {
        TrialRng rng(seed, i);
        const auto out = run_trial(plan, rng);
        r.moments.add(out.distortion);
        switch (out.aloha_event) {
            case AlohaEvent::NoneTransmitted: ++r.events.none; break;
            case AlohaEvent::Collision: ++r.events.collision; break;
            case AlohaEvent::Success: ++r.events.success; break;
            case AlohaEvent::NotApplicable: break;
        }
    }
    return r;
}

}  // namespace detail

/// Sample-mean estimate of E[D] for the given scheme and power policy.
inline DistortionEstimate estimate_expected_distortion(const SchemeConfig& scheme, const NetworkParams& params,
                                                       const PowerPolicy& policy, std::uint64_t trials, RngSeed seed,
                                                       const MonteCarloOptions& opts = {}) {
    params.validate();
    if (trials < kMinTrials) throw ParameterError("estimate_expected_distortion: at least 100 trials required");
    const auto plan = detail::make_plan(scheme, params, policy);

    const std::uint64_t block = std::max<std::uint64_t>(1, opts.block_size);
    const std::uint64_t n_blocks = (trials + block - 1) / block;
    std::vector<detail::BlockResult> blocks(n_blocks);

    unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = unsigned(std::min<std::uint64_t>(workers, n_blocks));
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        for (std::uint64_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) {
            blocks[b] = detail::run_block(plan, seed, b * block, std::min(trials, (b + 1) * block));
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    MomentAccumulator total;
    AlohaEventCounts events;
    for (const auto& b : blocks) {
        total.merge(b.moments);
        events.none += b.events.none;
        events.collision += b.events.collision;
        events.success += b.events.success;
    }
    DistortionEstimate est;
    est.mean = total.mean();
    est.std_error = total.standard_error();
    est.trials = total.count();
    est.seed = seed;
    est.scheme = scheme;
    est.aloha_events = events;
    return est;
}

}  // namespace afscale
