#pragma once

#include <string>
#include <string_view>

#include "l2m3/backends/types.hpp"

namespace l2m3::backends {

// Each backend family has a public, non-virtual entry point that validates the
// request and stamps backend id and latency; subclasses implement *_impl.
// Implementations hold no per-request mutable state and may be shared across
// threads.

class Translator {
public:
    explicit Translator(Limits limits = {}) : limits_(limits) {}
    virtual ~Translator() = default;

    // Throws UnsupportedLanguagePair, TextTooLong, BackendUnavailable,
    // MalformedResponse.
    TranslationResult translate(const TranslationRequest & req) const;

    virtual std::string id() const = 0;
    virtual bool reachable() const { return true; }
    const Limits & limits() const noexcept { return limits_; }

protected:
    // Only the identity mock accepts source == target.
    virtual bool accepts_same_language() const { return false; }
    virtual std::string translate_impl(const TranslationRequest & req) const = 0;

private:
    Limits limits_;
};

class ChatBackend {
public:
    explicit ChatBackend(Limits limits = {}) : limits_(limits) {}
    virtual ~ChatBackend() = default;

    // Throws InvalidArgument (empty messages, last message not from the user
    // side, invalid message), ContextTooLong, BackendUnavailable,
    // MalformedResponse.
    ChatResult chat(const ChatRequest & req) const;

    virtual std::string id() const = 0;
    virtual bool reachable() const { return true; }
    const Limits & limits() const noexcept { return limits_; }

protected:
    virtual std::string chat_impl(const ChatRequest & req) const = 0;

private:
    Limits limits_;
};

class Embedder {
public:
    explicit Embedder(Limits limits = {}) : limits_(limits) {}
    virtual ~Embedder() = default;

    // Throws TextTooLong, BackendUnavailable, MalformedResponse.
    EmbeddingVector embed(std::string_view text) const;

    virtual std::string id() const = 0;
    virtual bool reachable() const { return true; }
    const Limits & limits() const noexcept { return limits_; }

protected:
    virtual EmbeddingVector embed_impl(std::string_view text) const = 0;

private:
    Limits limits_;
};

} // namespace l2m3::backends
