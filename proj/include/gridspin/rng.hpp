// Counter-based random number streams.
//
// Every draw is a pure function of (stream key, counter), so a sample can be
// generated at any index without sequential state. Trace sweeps can therefore
// run on any number of workers, in any order, and produce identical series.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gridspin::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Order-dependent key combiner; used to derive per-stream keys.
inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return mix(a ^ (mix(b) + kGolden + (a << 6) + (a >> 2)));
}

// A keyed stream with random access by counter.
class Stream {
  public:
    Stream() = default;
    explicit Stream(std::uint64_t key) : key_(key) {}

    std::uint64_t key() const { return key_; }

    std::uint64_t bits(std::uint64_t i) const {
        return mix(key_ + (i + 1) * kGolden);
    }

    // Uniform double in [0, 1).
    double uniform01(std::uint64_t i) const {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; draw i consumes counters 2i and 2i+1.
    double gaussian(std::uint64_t i) const {
        const double u1 = 1.0 - uniform01(2 * i); // (0, 1], keeps log() finite
        const double u2 = uniform01(2 * i + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t key_ = 0;
};

// Deterministic stream key for a (trace, channel, node) triple.
inline Stream stream_for(std::uint64_t master_seed, std::uint64_t trace_id,
                         std::uint64_t channel, std::uint64_t node) {
    std::uint64_t k = mix(master_seed);
    k = combine(k, trace_id);
    k = combine(k, channel);
    k = combine(k, node);
    return Stream{k};
}

} // namespace gridspin::rng
