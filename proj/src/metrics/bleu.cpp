#include "l2m3/metrics/bleu.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

#include "l2m3/error.hpp"

namespace l2m3::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenizedSegment & tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

std::size_t closest_reference_length(std::size_t c, const std::vector<TokenizedSegment> & refs) {
    std::size_t best = refs.front().size();
    for (const auto & r : refs) {
        const auto d = r.size() > c ? r.size() - c : c - r.size();
        const auto best_d = best > c ? best - c : c - best;
        if (d < best_d || (d == best_d && r.size() < best)) {
            best = r.size();
        }
    }
    return best;
}

void accumulate(BleuScore & s, const TokenizedSegment & cand, const std::vector<TokenizedSegment> & refs,
                std::size_t max_n) {
    s.candidate_len += cand.size();
    s.reference_len += closest_reference_length(cand.size(), refs);
    for (std::size_t n = 1; n <= max_n; ++n) {
        NgramCounts max_ref;
        for (const auto & r : refs) {
            for (const auto & [gram, count] : count_ngrams(r, n)) {
                auto & slot = max_ref[gram];
                slot = std::max(slot, count);
            }
        }
        for (const auto & [gram, count] : count_ngrams(cand, n)) {
            auto it = max_ref.find(gram);
            s.matches[n - 1] += it == max_ref.end() ? 0 : std::min(count, it->second);
            s.totals[n - 1] += count;
        }
    }
}

double brevity_penalty(std::size_t c, std::size_t r) {
    if (c == 0) {
        return r == 0 ? 1.0 : 0.0;
    }
    return c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
}

// smooth_from: first order (1-based) that receives add-one smoothing.
void finish(BleuScore & s, std::size_t max_n, std::size_t smooth_from) {
    s.brevity_penalty = brevity_penalty(s.candidate_len, s.reference_len);
    double log_sum = 0.0;
    bool zero = s.candidate_len == 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto m = s.matches[n - 1];
        const auto t = s.totals[n - 1];
        if (t == 0) {
            continue;
        }
        ++s.orders_used;
        const double p = n >= smooth_from ? static_cast<double>(m + 1) / static_cast<double>(t + 1)
                                          : static_cast<double>(m) / static_cast<double>(t);
        s.precisions[n - 1] = p;
        if (p == 0.0) {
            zero = true;
        } else {
            log_sum += std::log(p);
        }
    }
    if (zero || s.orders_used == 0) {
        s.score = 0.0;
        return;
    }
    s.score = 100.0 * s.brevity_penalty * std::exp(log_sum / static_cast<double>(s.orders_used));
}

void check_max_n(std::size_t max_n) {
    if (max_n < 1 || max_n > 4) {
        throw Error(Errc::InvalidArgument, "BLEU order must be between 1 and 4");
    }
}

} // namespace

BleuScore bleu(const std::vector<TokenizedSegment> & candidates,
               const std::vector<std::vector<TokenizedSegment>> & references, std::size_t max_n) {
    check_max_n(max_n);
    if (candidates.empty()) {
        throw Error(Errc::EmptyCorpus, "BLEU needs at least one segment");
    }
    if (candidates.size() != references.size()) {
        throw Error(Errc::LengthMismatch, std::to_string(candidates.size()) + " candidates vs " +
                                              std::to_string(references.size()) + " reference sets");
    }
    BleuScore s;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (references[i].empty()) {
            throw Error(Errc::InvalidArgument, "segment " + std::to_string(i) + " has no reference");
        }
        accumulate(s, candidates[i], references[i], max_n);
    }
    finish(s, max_n, max_n + 1);
    return s;
}

BleuScore sentence_bleu(const TokenizedSegment & candidate, const std::vector<TokenizedSegment> & references,
                        std::size_t max_n) {
    check_max_n(max_n);
    if (references.empty()) {
        throw Error(Errc::InvalidArgument, "sentence BLEU needs a reference");
    }
    BleuScore s;
    accumulate(s, candidate, references, max_n);
    finish(s, max_n, 2);
    return s;
}

} // namespace l2m3::metrics
