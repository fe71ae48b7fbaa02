#include "mpsens/rng.hpp"

#include <cmath>
#include <numbers>

namespace mpsens {

std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t realization, StreamRole role) noexcept {
    return hash_combine(hash_combine(mix64(seed), realization), static_cast<std::uint64_t>(role));
}

double CounterRng::normal() noexcept {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::complex<double> CounterRng::complex_normal() noexcept {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

RealizationStreams RealizationStreams::make(std::uint64_t seed, std::uint64_t realization) noexcept {
    return {CounterRng(derive_stream_key(seed, realization, StreamRole::gates)),
            CounterRng(derive_stream_key(seed, realization, StreamRole::measurement_coins)),
            CounterRng(derive_stream_key(seed, realization, StreamRole::measurement_outcomes))};
}

} // namespace mpsens
