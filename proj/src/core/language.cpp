#include "l2m3/language.hpp"

#include "l2m3/error.hpp"

namespace l2m3 {

bool LanguageCode::well_formed(std::string_view code) noexcept {
    if (code.size() < 2 || code.size() > 8) {
        return false;
    }
    for (char c : code) {
        if (c < 'a' || c > 'z') {
            return false;
        }
    }
    return true;
}

LanguageCode::LanguageCode(std::string_view code) : code_(code) {
    if (!well_formed(code)) {
        throw Error(Errc::UnsupportedLanguage, "malformed language code '" + std::string(code) + "'");
    }
}

LanguageRegistry::LanguageRegistry(std::initializer_list<std::string_view> codes) {
    for (auto c : codes) {
        codes_.insert(LanguageCode(c));
    }
}

LanguageRegistry LanguageRegistry::with_defaults() {
    return LanguageRegistry{"en", "te", "hi", "ar", "sw"};
}

bool LanguageRegistry::contains(std::string_view code) const {
    return LanguageCode::well_formed(code) && codes_.count(LanguageCode(code)) > 0;
}

LanguageCode LanguageRegistry::require(std::string_view code) const {
    if (!contains(code)) {
        throw Error(Errc::UnsupportedLanguage, "language '" + std::string(code) + "' is not registered");
    }
    return LanguageCode(code);
}

} // namespace l2m3
