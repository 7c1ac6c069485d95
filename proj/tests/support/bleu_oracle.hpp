#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace test_support {

// Brute-force corpus BLEU: every n-gram of every order is enumerated as a
// joined string and counted with linear scans; no shared code with the
// library.
inline double brute_force_bleu(const std::vector<std::vector<std::string>> & cands,
                               const std::vector<std::vector<std::vector<std::string>>> & refs) {
    auto grams = [](const std::vector<std::string> & toks, std::size_t n) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i + n <= toks.size(); ++i) {
            std::string g;
            for (std::size_t k = 0; k < n; ++k) g += toks[i + k] + '\x01';
            out.push_back(g);
        }
        return out;
    };
    auto count_of = [](const std::vector<std::string> & v, const std::string & g) {
        return static_cast<long>(std::count(v.begin(), v.end(), g));
    };
    long c_len = 0, r_len = 0;
    std::vector<long> match(5, 0), total(5, 0);
    for (std::size_t s = 0; s < cands.size(); ++s) {
        const auto & c = cands[s];
        c_len += static_cast<long>(c.size());
        long best_r = -1, best_d = 0;
        for (const auto & r : refs[s]) {
            long d = std::labs(static_cast<long>(r.size()) - static_cast<long>(c.size()));
            if (best_r < 0 || d < best_d || (d == best_d && static_cast<long>(r.size()) < best_r)) {
                best_r = static_cast<long>(r.size());
                best_d = d;
            }
        }
        r_len += best_r;
        for (std::size_t n = 1; n <= 4; ++n) {
            auto cg = grams(c, n);
            total[n] += static_cast<long>(cg.size());
            std::vector<std::string> seen;
            for (const auto & g : cg) {
                if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
                seen.push_back(g);
                long max_ref = 0;
                for (const auto & r : refs[s]) max_ref = std::max(max_ref, count_of(grams(r, n), g));
                match[n] += std::min(count_of(cg, g), max_ref);
            }
        }
    }
    if (c_len == 0) return 0.0;
    double log_sum = 0.0;
    int used = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        if (total[n] == 0) continue;
        if (match[n] == 0) return 0.0;
        log_sum += std::log(static_cast<double>(match[n]) / static_cast<double>(total[n]));
        ++used;
    }
    if (used == 0) return 0.0;
    double bp = c_len >= r_len ? 1.0 : std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len));
    return 100.0 * bp * std::exp(log_sum / used);
}

} // namespace test_support
