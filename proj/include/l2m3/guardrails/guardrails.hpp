#pragma once

#include <cstddef>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "l2m3/backends/backend.hpp"

namespace l2m3::guardrails {

enum class Decision { Allow, Block, Clarify };

std::string_view decision_name(Decision d);

namespace rules {
inline constexpr std::string_view none       = "none";
inline constexpr std::string_view ill_formed = "ill_formed";
inline constexpr std::string_view jailbreak  = "jailbreak";
inline constexpr std::string_view off_topic  = "off_topic";
inline constexpr std::string_view blocklist  = "blocklist";
inline constexpr std::string_view too_long   = "too_long";
} // namespace rules

struct Verdict {
    Decision decision = Decision::Allow;
    std::string rule_id{rules::none};
    std::string reason;

    bool allowed() const noexcept { return decision == Decision::Allow; }
    bool operator==(const Verdict &) const = default;

    static Verdict allow() { return {}; }
};

nlohmann::json to_json(const Verdict & v);
Verdict verdict_from_json(const nlohmann::json & j);

struct GuardrailConfig {
    // Case-insensitive substrings; entries starting with "re:" are
    // case-insensitive ECMAScript regexes.
    std::vector<std::string> jailbreak_patterns;
    // Case-insensitive whole-word phrases.
    std::vector<std::string> topic_keywords;
    std::vector<std::string> topic_centroid_texts;
    double topic_threshold = 0.35;
    std::size_t min_query_chars = 3;
    // Case-insensitive substrings.
    std::vector<std::string> output_blocklist;
    std::size_t max_output_chars = 4000;

    // Throws InvalidConfig on out-of-range values or a bad regex.
    void validate() const;

    static GuardrailConfig from_json(const nlohmann::json & j);
    // The configuration shipped as config/guardrails.json.
    static GuardrailConfig defaults();
    static GuardrailConfig load(const std::string & path);
    nlohmann::json to_json() const;
};

// A loaded configuration: patterns compiled and centroid texts embedded once.
// Immutable afterwards, so checks can run from any number of threads.
class Guardrails {
public:
    // Throws InvalidConfig, or EmbedderUnavailable when centroids cannot be
    // embedded.
    Guardrails(GuardrailConfig cfg, const backends::Embedder * embedder);

    // First hit wins: ill_formed (shorter than min_query_chars code points or
    // whitespace only) -> CLARIFY; jailbreak pattern -> BLOCK; topic keyword
    // or max centroid cosine >= threshold -> ALLOW; otherwise CLARIFY
    // off_topic. Throws EmbedderUnavailable only when the embedding check is
    // reached and the embedder fails.
    Verdict check_input(std::string_view text_en, const backends::Embedder * embedder) const;

    // blocklist phrase -> BLOCK; longer than max_output_chars -> BLOCK
    // too_long; else ALLOW.
    Verdict check_output(std::string_view text_en) const;

    const GuardrailConfig & config() const noexcept { return cfg_; }

private:
    struct Pattern {
        std::string text;
        bool is_regex = false;
        std::regex regex;
    };

    GuardrailConfig cfg_;
    std::vector<Pattern> jailbreak_;
    std::vector<backends::EmbeddingVector> centroids_;
};

} // namespace l2m3::guardrails
