#ifndef BISECT_BAYES_RANDOM_HPP
#define BISECT_BAYES_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace bisect_bayes {

/// SplitMix64 output function. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a path of
/// indices, e.g. derive_seed(master, cell, replication). The derivation is
/// a left fold: s <- mix64(s ^ mix64(index)), starting from mix64(master).
/// Distinct paths give unrelated seeds and the result does not depend on the
/// order in which streams are created, so parallel workers can derive their
/// own streams.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix64(master);
    for (std::uint64_t index : path) {
        s = mix64(s ^ mix64(index));
    }
    return s;
}

/// Seeded pseudo-random source. The engine is std::mt19937_64; conversions
/// to doubles and bounded integers are done here rather than through the
/// <random> distributions so that streams are bit-identical across standard
/// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % bound;
    }

    bool bernoulli(double prob) { return uniform() < prob; }

private:
    std::mt19937_64 engine_;
};

}  // namespace bisect_bayes

#endif  // BISECT_BAYES_RANDOM_HPP
