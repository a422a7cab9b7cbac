#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mitodet {

// FNV-1a, used to fold string ids (image names, patch ids) into seeds.
constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state);

// Folds an arbitrary list of keys into one 64-bit seed. Every piece of
// pipeline randomness derives its seed this way from the master seed plus
// stable per-item keys (image id hash, tile origin, candidate index, ...) so
// results do not depend on scheduling or worker count.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> keys);

// Deterministic RNG with hand-rolled samplers. The samplers avoid
// std::uniform_*_distribution on purpose: their output is
// implementation-defined, and serialized artifacts (bootstraps, TTA draws)
// must replay identically.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Single Gaussian draw via Box-Muller; always consumes exactly two
    // uniforms so the stream position is call-count deterministic.
    double gaussian(double mean, double sigma);

private:
    std::mt19937_64 engine_;
};

}  // namespace mitodet
