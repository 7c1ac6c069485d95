#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace l2m3 {

enum class Errc {
    // corpus
    UnbalancedTokens,
    EmptyRole,
    NestedToken,
    TrailingGarbage,
    InvalidMessage,
    OverlappingFindings,
    OutOfRange,
    EmptyInput,
    // backends
    BackendUnavailable,
    UnsupportedLanguagePair,
    TextTooLong,
    MalformedResponse,
    ContextTooLong,
    // guardrails
    EmbedderUnavailable,
    // pipeline / service
    UnsupportedLanguage,
    SessionNotFound,
    TurnInProgress,
    // metrics / eval
    EmptyCorpus,
    LengthMismatch,
    DimMismatch,
    // generic
    InvalidConfig,
    InvalidArgument,
    Io,
};

// Upper snake case name, e.g. "NESTED_TOKEN".
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string & what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}

    Errc code() const noexcept { return code_; }
    // The message without the code prefix.
    const std::string & detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

// Backend-originated failures that the pipeline turns into an ERROR outcome.
inline bool is_backend_error(Errc code) noexcept {
    switch (code) {
        case Errc::BackendUnavailable:
        case Errc::UnsupportedLanguagePair:
        case Errc::TextTooLong:
        case Errc::MalformedResponse:
        case Errc::ContextTooLong:
        case Errc::EmbedderUnavailable:
            return true;
        default:
            return false;
    }
}

} // namespace l2m3
