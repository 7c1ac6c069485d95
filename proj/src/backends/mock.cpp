#include "l2m3/backends/mock.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "l2m3/backends/degrade.hpp"
#include "l2m3/error.hpp"
#include "l2m3/hash.hpp"
#include "l2m3/metrics/tokenize.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::backends {

namespace {

nlohmann::json load_json(const std::string & path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open " + path);
    }
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception & e) {
        throw Error(Errc::InvalidConfig, path + ": " + e.what());
    }
}

const corpus::Message & last_user_message(const ChatRequest & req) {
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
        if (corpus::is_user_role(it->role)) {
            return *it;
        }
    }
    return req.messages.back();
}

std::string format_retention(double r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

} // namespace

GlossaryTranslator::GlossaryTranslator(std::map<PairKey, corpus::Glossary> tables, Limits limits)
    : Translator(limits), tables_(std::move(tables)) {}

GlossaryTranslator GlossaryTranslator::from_json(const nlohmann::json & j, Limits limits) {
    std::map<PairKey, corpus::Glossary> tables;
    if (!j.contains("pairs") || !j["pairs"].is_object()) {
        throw Error(Errc::InvalidConfig, "glossary translator config needs a \"pairs\" object");
    }
    for (const auto & [key, value] : j["pairs"].items()) {
        const auto dash = key.find('-');
        if (dash == std::string::npos) {
            throw Error(Errc::InvalidConfig, "pair key '" + key + "' is not of the form src-tgt");
        }
        tables.emplace(PairKey{LanguageCode(key.substr(0, dash)), LanguageCode(key.substr(dash + 1))},
                       corpus::Glossary::from_json(value));
    }
    return GlossaryTranslator(std::move(tables), limits);
}

GlossaryTranslator GlossaryTranslator::load(const std::string & path, Limits limits) {
    return from_json(load_json(path), limits);
}

std::string GlossaryTranslator::translate_impl(const TranslationRequest & req) const {
    auto it = tables_.find({req.source_lang, req.target_lang});
    if (it == tables_.end()) {
        throw Error(Errc::UnsupportedLanguagePair,
                    "no phrase table for " + req.source_lang.str() + " -> " + req.target_lang.str());
    }
    return corpus::post_edit(req.text, it->second);
}

DegradingTranslator::DegradingTranslator(double retention, std::uint64_t seed, Limits limits)
    : Translator(limits), retention_(retention), seed_(seed) {
    if (!(retention > 0.0 && retention <= 1.0)) {
        throw Error(Errc::InvalidConfig, "retention must lie in (0, 1]");
    }
}

std::string DegradingTranslator::id() const {
    return "mock:degrade:" + format_retention(retention_) + ":" + std::to_string(seed_);
}

std::string DegradingTranslator::translate_impl(const TranslationRequest & req) const {
    return degrade(req.text, retention_,
                   derive_seed(seed_, req.source_lang.str(), req.target_lang.str(), req.text));
}

std::string UnavailableTranslator::translate_impl(const TranslationRequest &) const {
    throw Error(Errc::BackendUnavailable, "translator is unavailable");
}

std::string normalize_query(std::string_view text) {
    const auto d = unicode::decode(text);
    std::u32string out;
    bool pending_space = false;
    for (char32_t c : d.cps) {
        if (unicode::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(U' ');
            pending_space = false;
        }
        out.push_back(unicode::to_lower(c));
    }
    while (!out.empty() && (unicode::is_punct(out.back()) || unicode::is_space(out.back()))) {
        out.pop_back();
    }
    return unicode::encode(out);
}

ScriptedChat::ScriptedChat(const std::map<std::string, std::string> & script, Limits limits)
    : ChatBackend(limits) {
    for (const auto & [query, answer] : script) {
        if (answer.empty()) {
            throw Error(Errc::InvalidConfig, "scripted answer for '" + query + "' is empty");
        }
        if (!script_.emplace(normalize_query(query), answer).second) {
            throw Error(Errc::InvalidConfig, "scripted query '" + query + "' collides after normalization");
        }
    }
}

ScriptedChat ScriptedChat::from_json(const nlohmann::json & j, Limits limits) {
    if (!j.is_object()) {
        throw Error(Errc::InvalidConfig, "script must be a JSON object of query -> answer");
    }
    std::map<std::string, std::string> script;
    for (const auto & [query, answer] : j.items()) {
        if (!answer.is_string()) {
            throw Error(Errc::InvalidConfig, "scripted answer for '" + query + "' is not a string");
        }
        script.emplace(query, answer.get<std::string>());
    }
    return ScriptedChat(script, limits);
}

ScriptedChat ScriptedChat::load(const std::string & path, Limits limits) {
    return from_json(load_json(path), limits);
}

std::string ScriptedChat::chat_impl(const ChatRequest & req) const {
    auto it = script_.find(normalize_query(last_user_message(req).content));
    return it == script_.end() ? std::string(scripted_fallback) : it->second;
}

EchoChat::EchoChat(double retention, std::uint64_t seed, Limits limits)
    : ChatBackend(limits), retention_(retention), seed_(seed) {
    if (!(retention > 0.0 && retention <= 1.0)) {
        throw Error(Errc::InvalidConfig, "retention must lie in (0, 1]");
    }
}

std::string EchoChat::id() const {
    return retention_ == 1.0 ? "mock:echo" : "mock:degrade-echo:" + format_retention(retention_) + ":" +
                                                 std::to_string(seed_);
}

std::string EchoChat::chat_impl(const ChatRequest & req) const {
    const auto & text = last_user_message(req).content;
    auto out = degrade(text, retention_, derive_seed(seed_, "chat", "chat", text));
    return out.empty() ? std::string(scripted_fallback) : out;
}

std::string UnavailableChat::chat_impl(const ChatRequest &) const {
    throw Error(Errc::BackendUnavailable, "chat backend is unavailable");
}

EmbeddingVector HashEmbedder::embed_impl(std::string_view text) const {
    EmbeddingVector v;
    v.values.assign(dimension, 0.0);
    for (const auto & token : metrics::tokenize(text)) {
        v.values[fnv1a64(token) % dimension] += 1.0;
    }
    double norm = 0.0;
    for (double x : v.values) {
        norm += x * x;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double & x : v.values) {
            x /= norm;
        }
    }
    return v;
}

EmbeddingVector UnavailableEmbedder::embed_impl(std::string_view) const {
    throw Error(Errc::BackendUnavailable, "embedder is unavailable");
}

} // namespace l2m3::backends
