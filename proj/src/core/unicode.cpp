#include "l2m3/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace l2m3::unicode {

Decoded decode(std::string_view bytes) {
    Decoded d;
    d.cps.reserve(bytes.size());
    d.offsets.reserve(bytes.size() + 1);
    const auto * s = reinterpret_cast<const uint8_t *>(bytes.data());
    const int32_t n = static_cast<int32_t>(bytes.size());
    int32_t i = 0;
    while (i < n) {
        d.offsets.push_back(static_cast<std::size_t>(i));
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(s, i, n, c);
        if (c < 0) {
            c = 0xFFFD;
            i = start + 1;
        }
        d.cps.push_back(static_cast<char32_t>(c));
    }
    d.offsets.push_back(bytes.size());
    return d;
}

void append_utf8(std::string & out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) {
        append_utf8(out, c);
    }
    return out;
}

std::size_t length(std::string_view bytes) {
    return decode(bytes).cps.size();
}

char32_t to_lower(char32_t cp) {
    return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
}

char32_t fold(char32_t cp) {
    return static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT));
}

std::string lowercase(std::string_view bytes) {
    auto d = decode(bytes);
    for (auto & c : d.cps) {
        c = to_lower(c);
    }
    return encode(d.cps);
}

bool is_space(char32_t cp) {
    return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

bool is_punct(char32_t cp) {
    return u_ispunct(static_cast<UChar32>(cp));
}

bool is_word_char(char32_t cp) {
    const auto c = static_cast<UChar32>(cp);
    if (u_isalnum(c)) {
        return true;
    }
    switch (u_charType(c)) {
        case U_NON_SPACING_MARK:
        case U_COMBINING_SPACING_MARK:
        case U_ENCLOSING_MARK:
            return true;
        default:
            return cp == 0x200C || cp == 0x200D;
    }
}

bool is_blank(std::string_view bytes) {
    for (char32_t c : decode(bytes).cps) {
        if (!is_space(c)) {
            return false;
        }
    }
    return true;
}

std::string_view trim(std::string_view bytes) {
    auto d = decode(bytes);
    std::size_t b = 0;
    std::size_t e = d.cps.size();
    while (b < e && is_space(d.cps[b])) {
        ++b;
    }
    while (e > b && is_space(d.cps[e - 1])) {
        --e;
    }
    return bytes.substr(d.offsets[b], d.offsets[e] - d.offsets[b]);
}

std::size_t find_folded(std::u32string_view haystack, std::u32string_view needle, std::size_t from) {
    if (needle.empty() || needle.size() > haystack.size()) {
        return npos;
    }
    for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
        std::size_t k = 0;
        while (k < needle.size() && fold(haystack[i + k]) == fold(needle[k])) {
            ++k;
        }
        if (k == needle.size()) {
            return i;
        }
    }
    return npos;
}

bool contains_folded(std::string_view haystack, std::string_view needle) {
    return find_folded(decode(haystack).cps, decode(needle).cps) != npos;
}

bool at_word_boundaries(std::u32string_view text, std::size_t begin, std::size_t end) {
    const bool left = begin == 0 || !is_word_char(text[begin - 1]);
    const bool right = end >= text.size() || !is_word_char(text[end]);
    return left && right;
}

} // namespace l2m3::unicode
