#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace heavytail {

/**
 * Counter-based Philox4x32-10 generator.
 *
 * Output block b of stream s under key k is a pure function of (k, s, b), so a
 * replication can be regenerated on any thread without touching shared state.
 * Satisfies UniformRandomBitGenerator; feeds the <random> distributions.
 */
class PhiloxEngine {
public:
    using result_type = std::uint32_t;
    using block_type = std::array<std::uint32_t, 4>;

    PhiloxEngine(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (index_ == 4) {
            buffer_ = block(key_, {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                   static_cast<std::uint32_t>(stream_),
                                   static_cast<std::uint32_t>(stream_ >> 32)});
            ++block_;
            index_ = 0;
        }
        return buffer_[index_++];
    }

    std::uint64_t blocks_used() const noexcept { return block_; }

    /// The raw bijection: ten Philox rounds of counter under key.
    static block_type block(std::array<std::uint32_t, 2> key, block_type ctr) noexcept
    {
        constexpr std::uint32_t m0 = 0xD2511F53u;
        constexpr std::uint32_t m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u;
        constexpr std::uint32_t w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += w0;
                key[1] += w1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    block_type buffer_{};
    int index_ = 4;
};

/// SplitMix64 finalizer; used to derive independent keys from composite ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t salt) noexcept
{
    return mix64(seed ^ mix64(salt));
}

} // namespace heavytail
