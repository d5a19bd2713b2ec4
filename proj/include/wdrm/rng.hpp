#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace wdrm {

// SplitMix64 (Steele, Lea, Flood 2014): the k-th output is a fixed bijective
// mix of seed + k * golden-gamma, so streams are reproducible across platforms
// and any draw can be addressed directly by its counter.
class SplitMix64 {
public:
    static constexpr std::string_view algorithm = "splitmix64";
    static constexpr std::uint64_t gamma = 0x9E3779B97F4A7C15ULL;

    explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Output number k (k >= 1) of the stream.
    std::uint64_t at(std::uint64_t k) const { return mix(seed_ + k * gamma); }

    std::uint64_t next() { return at(++counter_); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// n draws from uniform[lo, hi), in generation order.
inline std::vector<double> uniform_samples(std::size_t n, double lo, double hi, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> out(n);
    for (double& x : out) x = lo + (hi - lo) * rng.uniform();
    return out;
}

}  // namespace wdrm
