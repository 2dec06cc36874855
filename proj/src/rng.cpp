#include "gmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace gmc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t counter_hash(std::uint64_t key, std::uint64_t stream, std::uint64_t counter) {
    return splitmix64(splitmix64(splitmix64(key) ^ stream) + counter);
}

double uniform01(std::uint64_t key, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(counter_hash(key, stream, counter) >> 11) * 0x1.0p-53;
}

double uniform_noise(std::uint64_t key, std::uint64_t stream, std::uint64_t counter,
                     double half_width) {
    if (half_width == 0.0) return 0.0;
    return half_width * (2.0 * uniform01(key, stream, counter) - 1.0);
}

double CounterRng::normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
}

double CounterRng::exponential() {
    double u = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    return -std::log(u);
}

}  // namespace gmc
