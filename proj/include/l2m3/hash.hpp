#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace l2m3 {

inline constexpr std::uint64_t fnv1a64_offset = 14695981039346656037ULL;
inline constexpr std::uint64_t fnv1a64_prime  = 1099511628211ULL;

// FNV-1a over the raw bytes of `bytes`.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = fnv1a64_offset) noexcept {
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= fnv1a64_prime;
    }
    return h;
}

// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

} // namespace l2m3
