#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace l2m3::metrics {

using TokenizedSegment = std::vector<std::string>;

// Lowercase (Unicode simple mapping), split on whitespace, then peel every
// leading and trailing punctuation character (general category P*) off each
// chunk as a token of its own. "Fever, (high)." -> fever , ( high ) .
TokenizedSegment tokenize(std::string_view text);

} // namespace l2m3::metrics
