#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "l2m3/corpus/chatml.hpp"
#include "l2m3/language.hpp"

namespace l2m3::backends {

struct Limits {
    std::size_t max_text_chars = 8192;
    // Sum of message content lengths (code points) accepted by chat backends.
    std::size_t max_context_chars = 65536;
};

struct TranslationRequest {
    std::string text;
    LanguageCode source_lang;
    LanguageCode target_lang;
};

struct TranslationResult {
    std::string text;
    std::string backend_id;
    std::int64_t latency_ms = 0;
};

struct ChatRequest {
    std::vector<corpus::Message> messages;
    int max_tokens = 512;
    double temperature = 0.0;
};

struct ChatResult {
    corpus::Message message;
    std::string backend_id;
    std::int64_t latency_ms = 0;
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector &) const = default;
};

} // namespace l2m3::backends
