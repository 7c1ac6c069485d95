#pragma once

#include <compare>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>

namespace l2m3 {

// Short lowercase language tag ("en", "te", ...). Construction checks the
// shape only; membership is the registry's business.
class LanguageCode {
public:
    LanguageCode() : code_("en") {}
    explicit LanguageCode(std::string_view code);

    const std::string & str() const noexcept { return code_; }

    static bool well_formed(std::string_view code) noexcept;

    auto operator<=>(const LanguageCode &) const = default;

private:
    std::string code_;
};

inline const LanguageCode & english() {
    static const LanguageCode en{"en"};
    return en;
}

class LanguageRegistry {
public:
    LanguageRegistry() = default;
    LanguageRegistry(std::initializer_list<std::string_view> codes);

    // en, te, hi, ar, sw
    static LanguageRegistry with_defaults();

    void add(const LanguageCode & code) { codes_.insert(code); }
    bool contains(std::string_view code) const;
    bool contains(const LanguageCode & code) const { return codes_.count(code) > 0; }

    // Throws UnsupportedLanguage when the tag is malformed or not registered.
    LanguageCode require(std::string_view code) const;

    const std::set<LanguageCode> & codes() const noexcept { return codes_; }

private:
    std::set<LanguageCode> codes_;
};

} // namespace l2m3
