#include "mitodet/rng.hpp"

#include <cmath>
#include <numbers>

namespace mitodet {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t state = 0x6d69746f64657431ull;
    std::uint64_t h = 0;
    for (std::uint64_t k : keys) {
        state ^= k;
        h = splitmix64(state);
    }
    return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return r % n;
}

double Rng::gaussian(double mean, double sigma) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double mag = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * mag * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mitodet
