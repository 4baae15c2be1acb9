/**
 * @file rng.hpp
 * @brief Counter-based random streams with keyed seed derivation.
 *
 * Every random object in the library is drawn from a CounterRng whose key is
 * derived from a master seed and a task index, so streams never couple and
 * can be generated in any order. All distributions are implemented here
 * rather than taken from <random>, whose distributions are not specified
 * bit-for-bit across standard libraries.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace fnlab::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(master ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Output n of the stream is mix64(key + n * golden); satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(CounterRng& g) noexcept { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform on {0, ..., n-1}, unbiased by rejection.
inline std::uint64_t uniform_index(CounterRng& g, std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = g();
    while (x >= limit) x = g();
    return x % n;
}

/// Standard normal via Box-Muller (one draw per call; the sine branch is discarded).
inline double gaussian(CounterRng& g) noexcept {
    double u1 = 0.0;
    do {
        u1 = uniform01(g);
    } while (u1 <= 0.0);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Standard complex Gaussian, E|z|^2 = 1.
inline std::complex<double> complex_gaussian(CounterRng& g) noexcept {
    const double re = gaussian(g);
    const double im = gaussian(g);
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

template <class T>
void shuffle(std::vector<T>& v, CounterRng& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace fnlab::rng
