#ifndef PULEARN_CORE_RNG_HPP
#define PULEARN_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

// Seed derivation and portable draws.
//
// Every random decision in the library is taken from a stream whose seed is
// derived from (base seed, counters...) by a stateless mixing function, so the
// outcome never depends on which worker thread performs the work or in what
// order. The draw helpers below avoid the std:: distributions because their
// output is implementation-defined; std::mt19937_64 itself is fully specified.

namespace pulearn::rng {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a child seed from a base seed and a list of counters.
constexpr std::uint64_t derive(std::uint64_t base, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = mix64(base);
    for (std::uint64_t key : keys) {
        h = mix64(h ^ mix64(key + 0x632be59bd9b4e019ULL));
    }
    return h;
}

// Uniform draw on the open interval (0, 1) from 64 random bits.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Counter-based uniform: the value depends only on (seed, counter).
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t counter) noexcept {
    return to_open_unit(derive(seed, {counter}));
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    double uniform() { return to_open_unit(engine_()); }

    // Uniform integer in [0, bound) by rejection, bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pulearn::rng

#endif
