#include "l2m3/backends/backend.hpp"

#include <chrono>

#include "l2m3/error.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::backends {

namespace {

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

} // namespace

TranslationResult Translator::translate(const TranslationRequest & req) const {
    if (req.source_lang == req.target_lang && !accepts_same_language()) {
        throw Error(Errc::UnsupportedLanguagePair, req.source_lang.str() + " -> " + req.target_lang.str());
    }
    if (unicode::length(req.text) > limits_.max_text_chars) {
        throw Error(Errc::TextTooLong, "translation input exceeds " + std::to_string(limits_.max_text_chars) +
                                           " characters");
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto text = translate_impl(req);
    return {std::move(text), id(), elapsed_ms(t0)};
}

ChatResult ChatBackend::chat(const ChatRequest & req) const {
    if (req.messages.empty()) {
        throw Error(Errc::InvalidArgument, "chat request without messages");
    }
    if (!corpus::is_user_role(req.messages.back().role)) {
        throw Error(Errc::InvalidArgument, "last chat message must come from the user side, got role '" +
                                               req.messages.back().role + "'");
    }
    if (req.max_tokens <= 0 || req.temperature < 0.0) {
        throw Error(Errc::InvalidArgument, "max_tokens must be positive and temperature non-negative");
    }
    std::size_t context = 0;
    for (const auto & m : req.messages) {
        if (auto problem = corpus::message_problem(m); !problem.empty()) {
            throw Error(Errc::InvalidArgument, "invalid chat message: " + problem);
        }
        context += unicode::length(m.content);
    }
    if (context > limits_.max_context_chars) {
        throw Error(Errc::ContextTooLong, "chat context of " + std::to_string(context) + " characters exceeds " +
                                              std::to_string(limits_.max_context_chars));
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto content = chat_impl(req);
    return {corpus::Message{std::string(corpus::roles::assistant), std::move(content), english()}, id(),
            elapsed_ms(t0)};
}

EmbeddingVector Embedder::embed(std::string_view text) const {
    if (unicode::length(text) > limits_.max_text_chars) {
        throw Error(Errc::TextTooLong, "embedding input exceeds " + std::to_string(limits_.max_text_chars) +
                                           " characters");
    }
    return embed_impl(text);
}

} // namespace l2m3::backends
