#pragma once

#include <cstdint>
#include <random>

namespace wqm {

// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream seed for one Monte Carlo trial:
//   s = splitmix64(splitmix64(splitmix64(seed) ^ n) ^ trial)
// Trials are independent of scheduling order.
constexpr std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t n,
                                           std::uint64_t trial) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ n) ^ trial);
}

/// Seeded generator. Every probabilistic choice in the library consumes
/// draws from one of these, so a run is replayable from its seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution; portable across stdlibs.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace wqm
