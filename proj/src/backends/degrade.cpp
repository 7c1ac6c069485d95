#include "l2m3/backends/degrade.hpp"

#include "l2m3/error.hpp"
#include "l2m3/hash.hpp"
#include "l2m3/prng.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::backends {

std::string degrade(std::string_view text, double retention, std::uint64_t seed) {
    if (!(retention > 0.0 && retention <= 1.0)) {
        throw Error(Errc::InvalidArgument, "retention must lie in (0, 1]");
    }
    if (retention == 1.0) {
        return std::string(text);
    }
    const auto d = unicode::decode(text);
    Lcg64 rng(seed);
    std::string out;
    std::size_t i = 0;
    while (i < d.cps.size()) {
        while (i < d.cps.size() && unicode::is_space(d.cps[i])) {
            ++i;
        }
        if (i == d.cps.size()) {
            break;
        }
        const auto begin = i;
        while (i < d.cps.size() && !unicode::is_space(d.cps[i])) {
            ++i;
        }
        if (rng.uniform() < retention) {
            if (!out.empty()) {
                out += ' ';
            }
            out.append(text.substr(d.offsets[begin], d.offsets[i] - d.offsets[begin]));
        }
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view source, std::string_view target,
                          std::string_view text) {
    std::string key;
    key.reserve(source.size() + target.size() + text.size() + 2);
    key += source;
    key += '\x1f';
    key += target;
    key += '\x1f';
    key += text;
    return seed ^ fnv1a64(key);
}

} // namespace l2m3::backends
