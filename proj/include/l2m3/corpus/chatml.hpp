#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "l2m3/language.hpp"

namespace l2m3::corpus {

inline constexpr std::string_view im_start = "<|im_start|>";
inline constexpr std::string_view im_end   = "<|im_end|>";

namespace roles {
inline constexpr std::string_view chw       = "CHW";
inline constexpr std::string_view assistant = "Assistant";
inline constexpr std::string_view system    = "system";
} // namespace roles

struct Message {
    std::string role;
    std::string content;
    LanguageCode lang;

    bool operator==(const Message &) const = default;
};

// Roles that stand for the person asking (CHW, or "user" in generic ChatML).
bool is_user_role(std::string_view role);

// Empty string when the message is valid, otherwise a description of the
// first violated invariant.
std::string message_problem(const Message & m);

struct ChatMLDocument {
    std::vector<Message> messages;

    bool operator==(const ChatMLDocument &) const = default;
};

// Grammar: zero or more `<|im_start|>ROLE\nCONTENT<|im_end|>` blocks with
// optional whitespace between them. Every message gets `lang`.
// Throws Error{UnbalancedTokens|EmptyRole|NestedToken|TrailingGarbage|InvalidMessage}.
ChatMLDocument parse_chatml(std::string_view text, const LanguageCode & lang = english());

// Blocks joined by a single '\n', no trailing newline. Throws InvalidMessage.
std::string serialize_chatml(const ChatMLDocument & doc);

} // namespace l2m3::corpus
