#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace retrial {

// SplitMix64 finalizer; used to derive independent replication seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream) {
    return splitmix64(base_seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Seedable 64-bit generator. Uniform and exponential variates are computed
/// here rather than by <random> distributions, so streams match across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0,1), on a 2^-53 grid.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

private:
    std::mt19937_64 engine_;
};

}  // namespace retrial
