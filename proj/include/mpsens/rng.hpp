#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace mpsens {

/// SplitMix64 output finalizer (Stafford variant 13). Bijective on 64 bits.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
}

/// Order-sensitive combination of two 64-bit words.
[[nodiscard]] constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(h ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (h << 6U) + (h >> 2U)));
}

/// Independent random streams used by one circuit realization. Keeping gates,
/// measurement coins and measurement outcomes on separate streams makes a p = 0
/// monitored run consume exactly the same gate sequence as a unitary run.
enum class StreamRole : std::uint64_t { gates = 1, measurement_coins = 2, measurement_outcomes = 3, tensors = 4 };

[[nodiscard]] std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t realization, StreamRole role) noexcept;

/// Counter-based generator: the n-th output is mix64(key + (n + 1) * gamma),
/// i.e. SplitMix64 with an explicit, seekable counter. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    CounterRng() = default;
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * gamma);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11U) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; each call consumes two raw outputs.
    double normal() noexcept;

    /// Complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal() noexcept;

    bool bernoulli(double p) noexcept { return uniform() < p; }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  private:
    static constexpr std::uint64_t gamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t                  key_     = 0;
    std::uint64_t                  counter_ = 0;
};

struct RealizationStreams {
    CounterRng gates;
    CounterRng coins;
    CounterRng outcomes;

    static RealizationStreams make(std::uint64_t seed, std::uint64_t realization) noexcept;
};

} // namespace mpsens
