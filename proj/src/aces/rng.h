#ifndef ACES_RNG_H
#define ACES_RNG_H

#include <cmath>
#include <cstdint>

namespace aces {

// Counter-based splittable RNG.  Every stream is identified by a 64-bit key;
// outputs are a pure function of (key, counter), so independently keyed
// streams can be consumed in any order while remaining reproducible.
//
// The output function is two rounds of the SplitMix64 finaliser over the
// keyed counter, which is statistically solid for Monte Carlo use.
struct CounterRng {
    uint64_t key = 0;
    uint64_t ctr = 0;

    static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ull;

    static uint64_t mix(uint64_t v) {
        v ^= v >> 30;
        v *= 0xbf58476d1ce4e5b9ull;
        v ^= v >> 27;
        v *= 0x94d049bb133111ebull;
        v ^= v >> 31;
        return v;
    }

    explicit CounterRng(uint64_t key_ = 0) : key(key_) {}

    // Derive an independent stream key from this stream's key and a tag.
    static uint64_t derive(uint64_t key, uint64_t tag) {
        return mix(key + kGamma * (tag + 1));
    }

    uint64_t next() { return mix(mix(key + kGamma * ++ctr)); }

    // Uniform in [0, 1).
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) without modulo bias worth worrying about
    // for bound << 2^64 (Lemire's multiply-shift reduction).
    uint64_t uniform_int(uint64_t bound) {
        return (uint64_t)(((__uint128_t)next() * bound) >> 64);
    }

    // Standard normal via Box-Muller; one value per call, no caching so that
    // draw counts stay predictable.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }
};

}  // namespace aces

#endif
