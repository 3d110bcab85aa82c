#pragma once

// Trial-indexed random streams. Every Monte Carlo trial owns a generator keyed by
// (seed, trial index), so a trial's draws never depend on how trials are scheduled.

#include <cmath>
#include <cstdint>
#include <limits>

namespace afscale {

/// Strong type for the user-facing experiment seed.
struct RngSeed {
    std::uint64_t value = 0;

    friend bool operator==(RngSeed, RngSeed) = default;
};

/// SplitMix64 finalizer; bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent child seed, e.g. one per sensor count in a sweep.
constexpr RngSeed derive_seed(RngSeed parent, std::uint64_t key) noexcept {
    return RngSeed{mix64(mix64(parent.value) ^ (key + 0x9e3779b97f4a7c15ULL))};
}

/// xoshiro256** seeded through SplitMix64 from (seed, stream index).
/// Satisfies UniformRandomBitGenerator.
class TrialRng {
public:
    using result_type = std::uint64_t;

    TrialRng(RngSeed seed, std::uint64_t stream) noexcept {
        std::uint64_t x = mix64(mix64(seed.value) ^ mix64(stream + 0x632be59bd9b4e019ULL));
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            word = mix64(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1); never returns exactly 0 or 1.
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential draw with the given rate; strictly positive.
    double exponential(double rate) noexcept { return -std::log(uniform_open()) / rate; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

}  // namespace afscale
