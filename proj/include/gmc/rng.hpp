#pragma once

#include <cstdint>

namespace gmc {

// Counter-based generator: every draw is a pure function of
// (key, stream, counter), hashed with the SplitMix64 finalizer. No state is
// carried between draws, so results do not depend on evaluation order,
// threading or platform.
namespace rng_stream {
constexpr std::uint64_t hierarchy_noise = 1;
constexpr std::uint64_t segmentation_noise = 2;
constexpr std::uint64_t synth = 3;
constexpr std::uint64_t folds = 4;
constexpr std::uint64_t smoothness = 5;
}  // namespace rng_stream

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t counter_hash(std::uint64_t key, std::uint64_t stream, std::uint64_t counter);

// Uniform on [0, 1) with 53 random bits.
double uniform01(std::uint64_t key, std::uint64_t stream, std::uint64_t counter);
// Uniform on [-half_width, half_width].
double uniform_noise(std::uint64_t key, std::uint64_t stream, std::uint64_t counter,
                     double half_width);

// Sequential convenience wrapper around the counter hash.
class CounterRng {
public:
    CounterRng(std::uint64_t key, std::uint64_t stream) : key_(key), stream_(stream) {}

    std::uint64_t next_u64() { return counter_hash(key_, stream_, counter_++); }
    double uniform() { return uniform01(key_, stream_, counter_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Box-Muller; consumes two counters per call.
    double normal();
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p) { return uniform() < p; }
    double exponential();

private:
    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace gmc
