#pragma once

#include <cstdint>

namespace l2m3 {

// 64-bit linear congruential generator (Knuth's MMIX constants):
//
//     state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
//
// The initial state is the seed itself. Every draw advances the state once
// and reads from the high bits only:
//
//     uniform()    = (state' >> 11) * 2^-53            in [0, 1)
//     bounded(n)   = ((state' >> 32) * n) >> 32        in [0, n), n < 2^32
//
// Splits and the degradation mock are defined in terms of this stream so
// other implementations can reproduce them bit for bit.
class Lcg64 {
public:
    static constexpr std::uint64_t multiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t increment  = 1442695040888963407ULL;

    explicit constexpr Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ = state_ * multiplier + increment;
        return state_;
    }

    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr std::uint32_t bounded(std::uint32_t n) noexcept {
        return static_cast<std::uint32_t>(((next() >> 32) * n) >> 32);
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

} // namespace l2m3
