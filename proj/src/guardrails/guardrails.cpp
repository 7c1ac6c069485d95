#include "l2m3/guardrails/guardrails.hpp"

#include <fstream>

#include "default_config.hpp"
#include "l2m3/error.hpp"
#include "l2m3/metrics/scores.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::guardrails {

using nlohmann::json;

std::string_view decision_name(Decision d) {
    switch (d) {
        case Decision::Allow:   return "ALLOW";
        case Decision::Block:   return "BLOCK";
        case Decision::Clarify: return "CLARIFY";
    }
    return "ALLOW";
}

json to_json(const Verdict & v) {
    return {{"decision", decision_name(v.decision)}, {"rule_id", v.rule_id}, {"reason", v.reason}};
}

Verdict verdict_from_json(const json & j) {
    Verdict v;
    const auto d = j.at("decision").get<std::string>();
    if (d == "ALLOW") {
        v.decision = Decision::Allow;
    } else if (d == "BLOCK") {
        v.decision = Decision::Block;
    } else if (d == "CLARIFY") {
        v.decision = Decision::Clarify;
    } else {
        throw Error(Errc::InvalidArgument, "unknown guardrail decision '" + d + "'");
    }
    v.rule_id = j.at("rule_id").get<std::string>();
    v.reason = j.value("reason", std::string());
    return v;
}

void GuardrailConfig::validate() const {
    if (!(topic_threshold >= -1.0 && topic_threshold <= 1.0)) {
        throw Error(Errc::InvalidConfig, "topic_threshold must lie in [-1, 1]");
    }
    if (min_query_chars < 1) {
        throw Error(Errc::InvalidConfig, "min_query_chars must be at least 1");
    }
    for (const auto * list : {&jailbreak_patterns, &topic_keywords, &output_blocklist}) {
        for (const auto & p : *list) {
            if (p.empty()) {
                throw Error(Errc::InvalidConfig, "empty pattern in guardrail config");
            }
        }
    }
}

GuardrailConfig GuardrailConfig::from_json(const json & j) {
    GuardrailConfig c;
    try {
        c.jailbreak_patterns = j.value("jailbreak_patterns", std::vector<std::string>{});
        c.topic_keywords = j.value("topic_keywords", std::vector<std::string>{});
        c.topic_centroid_texts = j.value("topic_centroid_texts", std::vector<std::string>{});
        c.topic_threshold = j.value("topic_threshold", 0.35);
        c.min_query_chars = j.value("min_query_chars", std::size_t{3});
        c.output_blocklist = j.value("output_blocklist", std::vector<std::string>{});
        c.max_output_chars = j.value("max_output_chars", std::size_t{4000});
    } catch (const json::exception & e) {
        throw Error(Errc::InvalidConfig, std::string("bad guardrail config: ") + e.what());
    }
    c.validate();
    return c;
}

GuardrailConfig GuardrailConfig::defaults() {
    return from_json(json::parse(detail::default_config_json));
}

GuardrailConfig GuardrailConfig::load(const std::string & path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open guardrail config " + path);
    }
    try {
        json j;
        in >> j;
        return from_json(j);
    } catch (const json::exception & e) {
        throw Error(Errc::InvalidConfig, path + ": " + e.what());
    }
}

json GuardrailConfig::to_json() const {
    return {{"jailbreak_patterns", jailbreak_patterns}, {"topic_keywords", topic_keywords},
            {"topic_centroid_texts", topic_centroid_texts}, {"topic_threshold", topic_threshold},
            {"min_query_chars", min_query_chars}, {"output_blocklist", output_blocklist},
            {"max_output_chars", max_output_chars}};
}

Guardrails::Guardrails(GuardrailConfig cfg, const backends::Embedder * embedder) : cfg_(std::move(cfg)) {
    cfg_.validate();
    for (const auto & p : cfg_.jailbreak_patterns) {
        Pattern pat;
        if (p.rfind("re:", 0) == 0) {
            pat.is_regex = true;
            pat.text = p.substr(3);
            try {
                pat.regex = std::regex(pat.text, std::regex::ECMAScript | std::regex::icase);
            } catch (const std::regex_error & e) {
                throw Error(Errc::InvalidConfig, "bad jailbreak regex '" + pat.text + "': " + e.what());
            }
        } else {
            pat.text = p;
        }
        jailbreak_.push_back(std::move(pat));
    }
    if (!cfg_.topic_centroid_texts.empty()) {
        if (embedder == nullptr) {
            throw Error(Errc::EmbedderUnavailable, "topic centroids configured but no embedder given");
        }
        try {
            for (const auto & t : cfg_.topic_centroid_texts) {
                centroids_.push_back(embedder->embed(t));
            }
        } catch (const Error & e) {
            throw Error(Errc::EmbedderUnavailable, std::string("embedding topic centroids: ") + e.what());
        }
    }
}

Verdict Guardrails::check_input(std::string_view text_en, const backends::Embedder * embedder) const {
    const auto decoded = unicode::decode(text_en);
    if (decoded.cps.size() < cfg_.min_query_chars || unicode::is_blank(text_en)) {
        return {Decision::Clarify, std::string(rules::ill_formed),
                "query is shorter than " + std::to_string(cfg_.min_query_chars) + " characters or blank"};
    }
    for (const auto & p : jailbreak_) {
        const bool hit = p.is_regex ? std::regex_search(text_en.begin(), text_en.end(), p.regex)
                                    : unicode::find_folded(decoded.cps, unicode::decode(p.text).cps) != unicode::npos;
        if (hit) {
            return {Decision::Block, std::string(rules::jailbreak), "matched jailbreak pattern '" + p.text + "'"};
        }
    }
    for (const auto & k : cfg_.topic_keywords) {
        const auto key = unicode::decode(k).cps;
        for (auto pos = unicode::find_folded(decoded.cps, key); pos != unicode::npos;
             pos = unicode::find_folded(decoded.cps, key, pos + 1)) {
            if (unicode::at_word_boundaries(decoded.cps, pos, pos + key.size())) {
                return Verdict::allow();
            }
        }
    }
    if (!centroids_.empty()) {
        if (embedder == nullptr) {
            throw Error(Errc::EmbedderUnavailable, "topicality check needs an embedder");
        }
        backends::EmbeddingVector v;
        try {
            v = embedder->embed(text_en);
        } catch (const Error & e) {
            throw Error(Errc::EmbedderUnavailable, e.what());
        }
        double best = -1.0;
        for (const auto & c : centroids_) {
            best = std::max(best, metrics::semantic_similarity(v, c));
        }
        if (best >= cfg_.topic_threshold) {
            return Verdict::allow();
        }
        return {Decision::Clarify, std::string(rules::off_topic),
                "no topic keyword and best centroid similarity " + std::to_string(best) + " is below " +
                    std::to_string(cfg_.topic_threshold)};
    }
    return {Decision::Clarify, std::string(rules::off_topic), "no topic keyword matched"};
}

Verdict Guardrails::check_output(std::string_view text_en) const {
    const auto decoded = unicode::decode(text_en);
    for (const auto & phrase : cfg_.output_blocklist) {
        if (unicode::find_folded(decoded.cps, unicode::decode(phrase).cps) != unicode::npos) {
            return {Decision::Block, std::string(rules::blocklist), "output contains blocked phrase '" + phrase + "'"};
        }
    }
    if (decoded.cps.size() > cfg_.max_output_chars) {
        return {Decision::Block, std::string(rules::too_long),
                "output has " + std::to_string(decoded.cps.size()) + " characters, limit is " +
                    std::to_string(cfg_.max_output_chars)};
    }
    return Verdict::allow();
}

} // namespace l2m3::guardrails
