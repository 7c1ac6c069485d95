#include "l2m3/metrics/tokenize.hpp"

#include "l2m3/unicode.hpp"

namespace l2m3::metrics {

TokenizedSegment tokenize(std::string_view text) {
    const auto d = unicode::decode(text);
    TokenizedSegment out;
    std::size_t i = 0;
    const std::size_t n = d.cps.size();
    while (i < n) {
        while (i < n && unicode::is_space(d.cps[i])) {
            ++i;
        }
        std::size_t b = i;
        while (i < n && !unicode::is_space(d.cps[i])) {
            ++i;
        }
        std::size_t e = i;
        if (b == e) {
            break;
        }
        std::vector<std::string> tail;
        while (b < e && unicode::is_punct(d.cps[b])) {
            out.push_back(unicode::encode(std::u32string(1, unicode::to_lower(d.cps[b]))));
            ++b;
        }
        while (e > b && unicode::is_punct(d.cps[e - 1])) {
            tail.push_back(unicode::encode(std::u32string(1, unicode::to_lower(d.cps[e - 1]))));
            --e;
        }
        if (b < e) {
            std::u32string word(d.cps.begin() + static_cast<std::ptrdiff_t>(b),
                                d.cps.begin() + static_cast<std::ptrdiff_t>(e));
            for (auto & c : word) {
                c = unicode::to_lower(c);
            }
            out.push_back(unicode::encode(word));
        }
        out.insert(out.end(), tail.rbegin(), tail.rend());
    }
    return out;
}

} // namespace l2m3::metrics
