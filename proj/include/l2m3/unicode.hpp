#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace l2m3::unicode {

// Decoded view of a UTF-8 string: one entry per code point plus the byte
// offset where it starts. offsets has one extra trailing entry == bytes.size().
// Ill-formed bytes decode to U+FFFD one byte at a time.
struct Decoded {
    std::u32string cps;
    std::vector<std::size_t> offsets;
};

Decoded decode(std::string_view bytes);
void append_utf8(std::string & out, char32_t cp);
std::string encode(std::u32string_view cps);

std::size_t length(std::string_view bytes);

char32_t to_lower(char32_t cp);
char32_t fold(char32_t cp);
std::string lowercase(std::string_view bytes);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
// Letters, digits, combining marks and joiners: the characters a word is made of.
bool is_word_char(char32_t cp);

bool is_blank(std::string_view bytes);
std::string_view trim(std::string_view bytes);

// Case-insensitive (simple case folding) search over code points. Returns the
// code point index of the first match at or after `from`, or npos.
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);
std::size_t find_folded(std::u32string_view haystack, std::u32string_view needle, std::size_t from = 0);

bool contains_folded(std::string_view haystack, std::string_view needle);

// True when the match [begin, end) in `text` has non-word characters (or the
// string edge) on both sides.
bool at_word_boundaries(std::u32string_view text, std::size_t begin, std::size_t end);

} // namespace l2m3::unicode
