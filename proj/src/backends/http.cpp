#include "l2m3/backends/http.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "l2m3/unicode.hpp"

namespace l2m3::backends {

using nlohmann::json;

namespace wire {

std::string translate_body(const TranslationRequest & req) {
    return json{{"text", req.text}, {"source_lang", req.source_lang.str()}, {"target_lang", req.target_lang.str()}}
        .dump();
}

std::string chat_body(const ChatRequest & req) {
    json messages = json::array();
    for (const auto & m : req.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    return json{{"messages", messages}, {"max_tokens", req.max_tokens}, {"temperature", req.temperature}}.dump();
}

std::string embed_body(std::string_view text) {
    return json{{"text", text}}.dump();
}

namespace {

json parse_object(const std::string & body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::MalformedResponse, "response body is not a JSON object");
    }
    return j;
}

} // namespace

std::string parse_translate_response(const std::string & body) {
    auto j = parse_object(body);
    if (!j.contains("text") || !j["text"].is_string()) {
        throw Error(Errc::MalformedResponse, "translate response lacks a string \"text\"");
    }
    return j["text"].get<std::string>();
}

std::string parse_chat_response(const std::string & body) {
    auto j = parse_object(body);
    if (!j.contains("content") || !j["content"].is_string()) {
        throw Error(Errc::MalformedResponse, "chat response lacks a string \"content\"");
    }
    if (j.contains("role") && j["role"] != "Assistant") {
        throw Error(Errc::MalformedResponse, "chat response role is not Assistant");
    }
    auto content = j["content"].get<std::string>();
    if (content.empty()) {
        throw Error(Errc::MalformedResponse, "chat response content is empty");
    }
    return content;
}

EmbeddingVector parse_embed_response(const std::string & body) {
    auto j = parse_object(body);
    if (!j.contains("values") || !j["values"].is_array() || !j.contains("dim") || !j["dim"].is_number_integer()) {
        throw Error(Errc::MalformedResponse, "embed response needs \"values\" and \"dim\"");
    }
    EmbeddingVector v;
    for (const auto & x : j["values"]) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
            throw Error(Errc::MalformedResponse, "embedding component is not a finite number");
        }
        v.values.push_back(x.get<double>());
    }
    const auto dim = j["dim"].get<long long>();
    if (dim <= 0 || static_cast<std::size_t>(dim) != v.values.size()) {
        throw Error(Errc::MalformedResponse, "embedding dim does not match its values");
    }
    return v;
}

Errc error_for_status(int status, const std::string & body) {
    if (status >= 500) {
        return Errc::BackendUnavailable;
    }
    std::string error;
    json j = json::parse(body, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("error") && j["error"].is_string()) {
        error = j["error"].get<std::string>();
    }
    std::transform(error.begin(), error.end(), error.begin(), [](unsigned char c) { return std::toupper(c); });
    if (error.find("UNSUPPORTED_LANGUAGE_PAIR") != std::string::npos) {
        return Errc::UnsupportedLanguagePair;
    }
    if (error.find("CONTEXT_TOO_LONG") != std::string::npos) {
        return Errc::ContextTooLong;
    }
    if (error.find("TEXT_TOO_LONG") != std::string::npos) {
        return Errc::TextTooLong;
    }
    return Errc::MalformedResponse;
}

} // namespace wire

namespace {

std::string post_json(const HttpEndpoint & ep, const std::string & path, const std::string & body) {
    const int attempts = 1 + std::clamp(ep.retries, 0, 2);
    auto delay = ep.backoff;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        httplib::Client cli(ep.base_url);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
        cli.set_connection_timeout(secs.count(), usecs.count());
        cli.set_read_timeout(secs.count(), usecs.count());
        cli.set_write_timeout(secs.count(), usecs.count());
        if (ep.bearer_token) {
            cli.set_bearer_token_auth(*ep.bearer_token);
        }
        auto res = cli.Post(path, body, "application/json");
        if (!res) {
            last_error = ep.base_url + path + ": " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            return res->body;
        }
        const auto code = wire::error_for_status(res->status, res->body);
        last_error = ep.base_url + path + " answered HTTP " + std::to_string(res->status) + ": " + res->body;
        if (code != Errc::BackendUnavailable) {
            throw Error(code, last_error);
        }
    }
    throw Error(Errc::BackendUnavailable, last_error);
}

HttpEndpoint checked(HttpEndpoint ep) {
    if (ep.base_url.rfind("http://", 0) != 0) {
        throw Error(Errc::InvalidConfig, "backend URL must start with http://, got '" + ep.base_url + "'");
    }
    while (!ep.base_url.empty() && ep.base_url.back() == '/') {
        ep.base_url.pop_back();
    }
    ep.retries = std::clamp(ep.retries, 0, 2);
    return ep;
}

} // namespace

bool probe(const std::string & base_url, std::chrono::milliseconds timeout) {
    httplib::Client cli(base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    return static_cast<bool>(cli.Get("/healthz"));
}

HttpTranslator::HttpTranslator(HttpEndpoint endpoint, Limits limits)
    : Translator(limits), endpoint_(checked(std::move(endpoint))) {}

bool HttpTranslator::reachable() const {
    return probe(endpoint_.base_url);
}

std::string HttpTranslator::translate_impl(const TranslationRequest & req) const {
    auto text = wire::parse_translate_response(post_json(endpoint_, "/v1/translate", wire::translate_body(req)));
    if (text.empty() && !req.text.empty()) {
        throw Error(Errc::MalformedResponse, "translator returned empty text for non-empty input");
    }
    return text;
}

HttpChat::HttpChat(HttpEndpoint endpoint, Limits limits)
    : ChatBackend(limits), endpoint_(checked(std::move(endpoint))) {}

bool HttpChat::reachable() const {
    return probe(endpoint_.base_url);
}

std::string HttpChat::chat_impl(const ChatRequest & req) const {
    return wire::parse_chat_response(post_json(endpoint_, "/v1/chat", wire::chat_body(req)));
}

HttpEmbedder::HttpEmbedder(HttpEndpoint endpoint, Limits limits)
    : Embedder(limits), endpoint_(checked(std::move(endpoint))) {}

bool HttpEmbedder::reachable() const {
    return probe(endpoint_.base_url);
}

EmbeddingVector HttpEmbedder::embed_impl(std::string_view text) const {
    return wire::parse_embed_response(post_json(endpoint_, "/v1/embed", wire::embed_body(text)));
}

} // namespace l2m3::backends
