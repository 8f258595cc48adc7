#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace bliss {

// splitmix64 finalizer, used to derive independent seed streams from one
// user-facing seed.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, std::string_view purpose) {
    uint64_t h = mix64(seed);
    for (char c : purpose) h = mix64(h ^ static_cast<uint64_t>(static_cast<uint8_t>(c)));
    return h;
}

inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    return mix64(mix64(seed) ^ index);
}

inline uint64_t derive_seed(uint64_t seed, std::string_view purpose, uint64_t index) {
    return derive_seed(derive_seed(seed, purpose), index);
}

// Deterministic RNG. mt19937_64 is fully specified by the standard and all
// mappings below are hand-rolled, so identical seeds give identical draws on
// every platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform integer in [0, n), unbiased via rejection
    uint64_t uniform_u64(uint64_t n) {
        const uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    // inclusive range
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform_u64(static_cast<uint64_t>(hi - lo) + 1));
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform_real() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; second deviate discarded to keep the
    // object stateless between calls
    double normal() {
        double u1 = 1.0 - uniform_real();
        double u2 = uniform_real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace bliss
