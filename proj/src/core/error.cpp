#include "l2m3/error.hpp"

namespace l2m3 {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::UnbalancedTokens:        return "UNBALANCED_TOKENS";
        case Errc::EmptyRole:               return "EMPTY_ROLE";
        case Errc::NestedToken:             return "NESTED_TOKEN";
        case Errc::TrailingGarbage:         return "TRAILING_GARBAGE";
        case Errc::InvalidMessage:          return "INVALID_MESSAGE";
        case Errc::OverlappingFindings:     return "OVERLAPPING_FINDINGS";
        case Errc::OutOfRange:              return "OUT_OF_RANGE";
        case Errc::EmptyInput:              return "EMPTY_INPUT";
        case Errc::BackendUnavailable:      return "BACKEND_UNAVAILABLE";
        case Errc::UnsupportedLanguagePair: return "UNSUPPORTED_LANGUAGE_PAIR";
        case Errc::TextTooLong:             return "TEXT_TOO_LONG";
        case Errc::MalformedResponse:       return "MALFORMED_RESPONSE";
        case Errc::ContextTooLong:          return "CONTEXT_TOO_LONG";
        case Errc::EmbedderUnavailable:     return "EMBEDDER_UNAVAILABLE";
        case Errc::UnsupportedLanguage:     return "UNSUPPORTED_LANGUAGE";
        case Errc::SessionNotFound:         return "SESSION_NOT_FOUND";
        case Errc::TurnInProgress:          return "TURN_IN_PROGRESS";
        case Errc::EmptyCorpus:             return "EMPTY_CORPUS";
        case Errc::LengthMismatch:          return "LENGTH_MISMATCH";
        case Errc::DimMismatch:             return "DIM_MISMATCH";
        case Errc::InvalidConfig:           return "INVALID_CONFIG";
        case Errc::InvalidArgument:         return "INVALID_ARGUMENT";
        case Errc::Io:                      return "IO";
    }
    return "UNKNOWN";
}

} // namespace l2m3
