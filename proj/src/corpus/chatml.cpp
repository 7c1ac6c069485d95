#include "l2m3/corpus/chatml.hpp"

#include "l2m3/error.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::corpus {

namespace {

bool is_ascii_space(char c) {
    return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\v';
}

// Position of whichever special token comes first at or after `from`.
std::size_t next_token(std::string_view text, std::size_t from) {
    const auto s = text.find(im_start, from);
    const auto e = text.find(im_end, from);
    return std::min(s, e);
}

} // namespace

bool is_user_role(std::string_view role) {
    return role == roles::chw || role == "user" || role == "User";
}

std::string message_problem(const Message & m) {
    if (m.role.empty()) {
        return "role is empty";
    }
    if (m.role.find("<|") != std::string::npos) {
        return "role contains '<|'";
    }
    for (char32_t c : unicode::decode(m.role).cps) {
        if (unicode::is_space(c)) {
            return "role contains whitespace";
        }
    }
    if (m.content.find(im_start) != std::string::npos || m.content.find(im_end) != std::string::npos) {
        return "content contains a special token";
    }
    return {};
}

ChatMLDocument parse_chatml(std::string_view text, const LanguageCode & lang) {
    ChatMLDocument doc;
    std::size_t pos = 0;
    while (true) {
        while (pos < text.size() && is_ascii_space(text[pos])) {
            ++pos;
        }
        if (pos >= text.size()) {
            break;
        }
        if (text.compare(pos, im_end.size(), im_end) == 0) {
            throw Error(Errc::UnbalancedTokens, "<|im_end|> without <|im_start|> at byte " + std::to_string(pos));
        }
        if (text.compare(pos, im_start.size(), im_start) != 0) {
            throw Error(Errc::TrailingGarbage, "unexpected text outside a block at byte " + std::to_string(pos));
        }
        const std::size_t role_begin = pos + im_start.size();
        const std::size_t newline = text.find('\n', role_begin);
        const std::size_t token = next_token(text, role_begin);
        if (newline == std::string_view::npos || token < newline) {
            if (token == std::string_view::npos) {
                throw Error(Errc::UnbalancedTokens, "<|im_start|> at byte " + std::to_string(pos) + " is never closed");
            }
            if (text.compare(token, im_start.size(), im_start) == 0) {
                throw Error(Errc::NestedToken, "<|im_start|> inside the role line at byte " + std::to_string(token));
            }
            throw Error(Errc::EmptyRole, "role line at byte " + std::to_string(pos) + " is not terminated by a newline");
        }
        if (newline == role_begin) {
            throw Error(Errc::EmptyRole, "empty role at byte " + std::to_string(pos));
        }
        const std::size_t content_begin = newline + 1;
        const std::size_t close = next_token(text, content_begin);
        if (close == std::string_view::npos) {
            throw Error(Errc::UnbalancedTokens, "<|im_start|> at byte " + std::to_string(pos) + " is never closed");
        }
        if (text.compare(close, im_start.size(), im_start) == 0) {
            throw Error(Errc::NestedToken, "<|im_start|> inside message content at byte " + std::to_string(close));
        }
        Message m{std::string(text.substr(role_begin, newline - role_begin)),
                  std::string(text.substr(content_begin, close - content_begin)), lang};
        if (auto problem = message_problem(m); !problem.empty()) {
            throw Error(Errc::InvalidMessage, problem + " (block at byte " + std::to_string(pos) + ")");
        }
        doc.messages.push_back(std::move(m));
        pos = close + im_end.size();
    }
    return doc;
}

std::string serialize_chatml(const ChatMLDocument & doc) {
    std::string out;
    for (std::size_t i = 0; i < doc.messages.size(); ++i) {
        const auto & m = doc.messages[i];
        if (auto problem = message_problem(m); !problem.empty()) {
            throw Error(Errc::InvalidMessage, "message " + std::to_string(i) + ": " + problem);
        }
        if (i > 0) {
            out += '\n';
        }
        out += im_start;
        out += m.role;
        out += '\n';
        out += m.content;
        out += im_end;
    }
    return out;
}

} // namespace l2m3::corpus
