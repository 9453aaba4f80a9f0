#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pvhc {

// Deterministic RNG with named substreams. Every random draw in the toolkit
// flows from one study seed through substreams keyed by (tag, a, b), so
// results do not depend on scheduling or evaluation order. All transforms
// (uniform, normal, lognormal, shuffle) are hand-rolled on top of
// mt19937_64 because the standard <random> distributions are
// implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng substream(std::uint64_t seed, std::string_view tag,
                         std::uint64_t a = 0, std::uint64_t b = 0);

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased uniform integer in [0, n).
    std::uint64_t uniform_u64(std::uint64_t n);

    // Standard normal via Box-Muller (deterministic, no cached spare).
    double normal();
    double lognormal(double mu, double sigma);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_u64(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace pvhc
