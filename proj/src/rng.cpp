#include "pvhc/rng.hpp"

#include <cmath>
#include <numbers>

namespace pvhc {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Rng Rng::substream(std::uint64_t seed, std::string_view tag, std::uint64_t a, std::uint64_t b) {
    std::uint64_t state = seed;
    std::uint64_t s0 = splitmix64(state);
    state ^= fnv1a(tag);
    std::uint64_t s1 = splitmix64(state);
    state ^= a * 0x9e3779b97f4a7c15ULL + 1;
    std::uint64_t s2 = splitmix64(state);
    state ^= b * 0xd1b54a32d192ed03ULL + 1;
    std::uint64_t s3 = splitmix64(state);
    return Rng(s0 ^ (s1 * 3) ^ (s2 * 5) ^ (s3 * 7));
}

double Rng::uniform() {
    // 53-bit mantissa from the top bits.
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_u64(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    // Box-Muller, one value per call; u1 bounded away from 0.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
}

}  // namespace pvhc
