#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace l2m3::backends {

// Keeps each whitespace-separated token independently when the next
// Lcg64(seed).uniform() draw is below `retention`; one draw per token, in
// order. Kept tokens are joined with a single space. retention == 1 returns
// the text unchanged. Throws InvalidArgument unless 0 < retention <= 1.
std::string degrade(std::string_view text, double retention, std::uint64_t seed);

// Per-call seed for the degrading mocks:
//     seed ^ fnv1a64(source + "\x1f" + target + "\x1f" + text)
std::uint64_t derive_seed(std::uint64_t seed, std::string_view source, std::string_view target,
                          std::string_view text);

} // namespace l2m3::backends
