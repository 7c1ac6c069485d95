#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "l2m3/backends/backend.hpp"
#include "l2m3/corpus/glossary.hpp"
#include "json.hpp"

namespace l2m3::backends {

// Returns the text unchanged, for any language pair including source == target.
class IdentityTranslator final : public Translator {
public:
    using Translator::Translator;
    std::string id() const override { return "mock:identity"; }

protected:
    bool accepts_same_language() const override { return true; }
    std::string translate_impl(const TranslationRequest & req) const override { return req.text; }
};

// Phrase-table translator: applies the glossary registered for the requested
// (source, target) pair via corpus::post_edit. Unknown pairs are rejected.
class GlossaryTranslator final : public Translator {
public:
    using PairKey = std::pair<LanguageCode, LanguageCode>;

    explicit GlossaryTranslator(std::map<PairKey, corpus::Glossary> tables, Limits limits = {});

    // {"pairs": {"te-en": <glossary json>, ...}}
    static GlossaryTranslator from_json(const nlohmann::json & j, Limits limits = {});
    static GlossaryTranslator load(const std::string & path, Limits limits = {});

    std::string id() const override { return "mock:glossary"; }

protected:
    std::string translate_impl(const TranslationRequest & req) const override;

private:
    std::map<PairKey, corpus::Glossary> tables_;
};

// Lossy translator used to emulate an imperfect component: every call runs
// degrade() with seed derive_seed(seed, source, target, text).
class DegradingTranslator final : public Translator {
public:
    DegradingTranslator(double retention, std::uint64_t seed, Limits limits = {});
    std::string id() const override;

protected:
    bool accepts_same_language() const override { return true; }
    std::string translate_impl(const TranslationRequest & req) const override;

private:
    double retention_;
    std::uint64_t seed_;
};

// Always fails with BackendUnavailable. Stands in for a dead endpoint.
class UnavailableTranslator final : public Translator {
public:
    using Translator::Translator;
    std::string id() const override { return "mock:unavailable"; }
    bool reachable() const override { return false; }

protected:
    std::string translate_impl(const TranslationRequest & req) const override;
};

// Lowercase, collapse whitespace runs to one space, trim, then strip trailing
// punctuation.
std::string normalize_query(std::string_view text);

inline constexpr std::string_view scripted_fallback = "I need more information to answer safely.";

// Answers lookup(normalize_query(last user message)), falling back to
// scripted_fallback. Earlier turns are ignored.
class ScriptedChat final : public ChatBackend {
public:
    // Keys are normalized on construction; throws InvalidConfig on collisions
    // or empty answers.
    explicit ScriptedChat(const std::map<std::string, std::string> & script, Limits limits = {});

    // {"<query>": "<answer>", ...}
    static ScriptedChat from_json(const nlohmann::json & j, Limits limits = {});
    static ScriptedChat load(const std::string & path, Limits limits = {});

    std::string id() const override { return "mock:scripted"; }

protected:
    std::string chat_impl(const ChatRequest & req) const override;

private:
    std::map<std::string, std::string> script_;
};

// Echoes the last user message through degrade(); a retention of 1 makes it a
// plain echo. Used to stand in for the language model in composition runs.
class EchoChat final : public ChatBackend {
public:
    explicit EchoChat(double retention = 1.0, std::uint64_t seed = 0, Limits limits = {});
    std::string id() const override;

protected:
    std::string chat_impl(const ChatRequest & req) const override;

private:
    double retention_;
    std::uint64_t seed_;
};

class UnavailableChat final : public ChatBackend {
public:
    using ChatBackend::ChatBackend;
    std::string id() const override { return "mock:unavailable"; }
    bool reachable() const override { return false; }

protected:
    std::string chat_impl(const ChatRequest & req) const override;
};

// Bag-of-tokens hash embedding. Tokens come from metrics::tokenize; component
// i counts tokens whose FNV-1a 64 hash is i mod 64; the vector is then
// L2-normalized. Text without tokens maps to the zero vector.
class HashEmbedder final : public Embedder {
public:
    static constexpr std::size_t dimension = 64;

    using Embedder::Embedder;
    std::string id() const override { return "mock:hash"; }

protected:
    EmbeddingVector embed_impl(std::string_view text) const override;
};

class UnavailableEmbedder final : public Embedder {
public:
    using Embedder::Embedder;
    std::string id() const override { return "mock:unavailable"; }
    bool reachable() const override { return false; }

protected:
    EmbeddingVector embed_impl(std::string_view text) const override;
};

} // namespace l2m3::backends
