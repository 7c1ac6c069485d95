#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "l2m3/backends/backend.hpp"
#include "l2m3/error.hpp"
#include "json.hpp"

namespace l2m3::backends {

struct HttpEndpoint {
    std::string base_url;  // scheme://host[:port], no trailing path
    std::optional<std::string> bearer_token;
    std::chrono::milliseconds timeout{30000};
    int retries = 0;  // at most 2
    std::chrono::milliseconds backoff{200};  // doubled per retry
};

namespace wire {

// Request bodies are dumped from nlohmann::json objects, whose keys are kept
// sorted, so a given request value always serializes to the same bytes.
std::string translate_body(const TranslationRequest & req);
std::string chat_body(const ChatRequest & req);
std::string embed_body(std::string_view text);

// Each parser throws MalformedResponse when the 200 body does not match the
// contract.
std::string parse_translate_response(const std::string & body);
std::string parse_chat_response(const std::string & body);
EmbeddingVector parse_embed_response(const std::string & body);

// Maps a non-200 reply to an error code: 5xx -> BackendUnavailable, 4xx by the
// {"error": ...} string -> UnsupportedLanguagePair, TextTooLong,
// ContextTooLong, or MalformedResponse.
Errc error_for_status(int status, const std::string & body);

} // namespace wire

class HttpTranslator final : public Translator {
public:
    explicit HttpTranslator(HttpEndpoint endpoint, Limits limits = {});
    std::string id() const override { return endpoint_.base_url; }
    bool reachable() const override;

protected:
    std::string translate_impl(const TranslationRequest & req) const override;

private:
    HttpEndpoint endpoint_;
};

class HttpChat final : public ChatBackend {
public:
    explicit HttpChat(HttpEndpoint endpoint, Limits limits = {});
    std::string id() const override { return endpoint_.base_url; }
    bool reachable() const override;

protected:
    std::string chat_impl(const ChatRequest & req) const override;

private:
    HttpEndpoint endpoint_;
};

class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpEndpoint endpoint, Limits limits = {});
    std::string id() const override { return endpoint_.base_url; }
    bool reachable() const override;

protected:
    EmbeddingVector embed_impl(std::string_view text) const override;

private:
    HttpEndpoint endpoint_;
};

// GET <base_url>/healthz with a 2 s budget; any HTTP reply counts as reachable.
bool probe(const std::string & base_url, std::chrono::milliseconds timeout = std::chrono::seconds(2));

} // namespace l2m3::backends
