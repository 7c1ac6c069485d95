#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "l2m3/metrics/tokenize.hpp"

namespace l2m3::metrics {

struct BleuScore {
    double score = 0.0;  // [0, 100]
    // Clipped precision per order 1..4; orders without candidate n-grams are
    // reported as 0 and left out of the geometric mean.
    std::array<double, 4> precisions{};
    std::array<std::size_t, 4> matches{};
    std::array<std::size_t, 4> totals{};
    std::size_t orders_used = 0;
    double brevity_penalty = 1.0;
    std::size_t candidate_len = 0;
    std::size_t reference_len = 0;
};

// Corpus BLEU without smoothing. Clipping uses the maximum count of each
// n-gram over a segment's references; the effective reference length per
// segment is the one closest to the candidate (ties go to the shorter);
// BP = exp(1 - r/c) when c < r, else 1. Any used order with zero matches
// gives score 0, as does an empty candidate side.
// Throws EmptyCorpus, LengthMismatch, InvalidArgument (empty reference list
// or max_n outside 1..4).
BleuScore bleu(const std::vector<TokenizedSegment> & candidates,
               const std::vector<std::vector<TokenizedSegment>> & references, std::size_t max_n = 4);

// Per-sentence variant for report detail: add-one smoothing on orders >= 2.
// Never used for corpus-level numbers.
BleuScore sentence_bleu(const TokenizedSegment & candidate, const std::vector<TokenizedSegment> & references,
                        std::size_t max_n = 4);

} // namespace l2m3::metrics
