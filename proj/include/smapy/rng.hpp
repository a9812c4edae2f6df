#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace smapy {

// Counter-based splittable PRNG.
//
// Draw i of stream s under root seed r is
//     mix64(key + (i+1) * GAMMA),   key = mix64(r ^ mix64(s * GAMMA))
// where mix64 is the SplitMix64 finalizer (Steele/Lea/Vigna) and
// GAMMA = 0x9e3779b97f4a7c15.  Every random draw in the project flows from
// one root seed through named (seed, stream) pairs, so any run can be
// reproduced from the seed alone, on any platform, in any language.
class SplitRng {
public:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed ^ mix64(stream * kGamma))) {}

    /// Child generator for an independent named stream of the same seed.
    SplitRng split(std::uint64_t stream) const {
        SplitRng child(0, 0);
        child.key_ = mix64(key_ ^ mix64(stream * kGamma));
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).  Multiply-high mapping (Lemire); the bias
    /// for n << 2^64 is negligible and the mapping is fixed by definition.
    std::uint64_t next_below(std::uint64_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller; consumes exactly two draws per call.
    double next_normal() {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// In-place Fisher-Yates shuffle, high index down.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Named streams.  Keep stable: they are part of the reproducibility contract.
namespace rng_stream {
inline constexpr std::uint64_t kSynth = 1;
inline constexpr std::uint64_t kFolds = 2;
inline constexpr std::uint64_t kFitShuffleBase = 100;  // + epoch index
inline constexpr std::uint64_t kTrainSeedBase = 1000;  // + fold index
}  // namespace rng_stream

/// Shuffled index order for training pass `epoch` of `n` rows under `seed`.
/// Shared by the engine's online pass and the standalone baselines so both
/// consume observations in the identical order.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed,
                                                 std::uint64_t epoch = 0) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    SplitRng rng(seed, rng_stream::kFitShuffleBase + epoch);
    rng.shuffle(idx);
    return idx;
}

}  // namespace smapy
