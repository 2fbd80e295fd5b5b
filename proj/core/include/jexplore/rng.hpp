#pragma once

#include <cstdint>

namespace jexplore {

/// splitmix64 stream seeded directly with the user seed.
///
/// This generator is part of the reproducibility contract: seeded sampling
/// must be byte-identical across implementations, so both the raw stream and
/// the bounded draw below are pinned down exactly.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, bound) by rejection over raw 64-bit outputs:
    /// with t = 2^64 mod bound, outputs below t are discarded and the first
    /// u >= t yields u % bound. Requires bound >= 1. Always consumes at
    /// least one output, even for bound == 1.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            const std::uint64_t u = next();
            if (u >= threshold) {
                return u % bound;
            }
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace jexplore
