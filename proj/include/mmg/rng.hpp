#pragma once

#include <cstdint>
#include <random>

namespace mmg {

/// Seeded random stream owned by a single game run.
///
/// Built on std::mt19937_64, whose raw output sequence is fixed by the C++
/// standard. All mappings to coins, bounded integers and reals are done here
/// rather than through <random> distributions, which are implementation
/// defined, so a seed reproduces the same draws on every toolchain.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Seed of the index-th sub-stream of a master seed. Distinct indices give
    /// unrelated streams; adding runs never changes earlier ones.
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;
    static RngStream derive(std::uint64_t master, std::uint64_t index) {
        return RngStream(derive_seed(master, index));
    }

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Fair coin from the top bit of one draw.
    bool coin() { return (engine_() >> 63) != 0; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double low, double high) { return low + (high - low) * uniform01(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mmg
