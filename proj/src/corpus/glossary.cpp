#include "l2m3/corpus/glossary.hpp"

#include <fstream>
#include <set>

#include "l2m3/error.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::corpus {

namespace {

std::u32string folded(std::string_view s) {
    auto cps = unicode::decode(s).cps;
    for (auto & c : cps) {
        c = unicode::fold(c);
    }
    return cps;
}

std::string replace_all(std::string_view text, const Glossary::Entry & entry, MatchMode mode) {
    const auto decoded = unicode::decode(text);
    const auto key = unicode::decode(entry.first).cps;
    std::string out;
    std::size_t copied = 0;  // code point index up to which text was copied
    std::size_t from = 0;
    while (true) {
        const auto hit = unicode::find_folded(decoded.cps, key, from);
        if (hit == unicode::npos) {
            break;
        }
        const auto end = hit + key.size();
        if (mode == MatchMode::WholeWord && !unicode::at_word_boundaries(decoded.cps, hit, end)) {
            from = hit + 1;
            continue;
        }
        out.append(text.substr(decoded.offsets[copied], decoded.offsets[hit] - decoded.offsets[copied]));
        out += entry.second;
        copied = end;
        from = end;
    }
    out.append(text.substr(decoded.offsets[copied]));
    return out;
}

} // namespace

Glossary::Glossary(std::vector<Entry> entries, MatchMode mode) : entries_(std::move(entries)), mode_(mode) {
    std::set<std::u32string> seen;
    for (const auto & [from, to] : entries_) {
        if (from.empty()) {
            throw Error(Errc::InvalidConfig, "glossary entry with an empty key");
        }
        if (!seen.insert(folded(from)).second) {
            throw Error(Errc::InvalidConfig, "glossary key '" + from + "' is duplicated (case-insensitively)");
        }
    }
}

Glossary Glossary::from_json(const nlohmann::json & j) {
    try {
        MatchMode mode = MatchMode::WholeWord;
        const auto m = j.value("match_mode", std::string("WHOLE_WORD"));
        if (m == "SUBSTRING") {
            mode = MatchMode::Substring;
        } else if (m != "WHOLE_WORD") {
            throw Error(Errc::InvalidConfig, "unknown glossary match_mode '" + m + "'");
        }
        std::vector<Entry> entries;
        for (const auto & e : j.at("entries")) {
            entries.emplace_back(e.at("from").get<std::string>(), e.at("to").get<std::string>());
        }
        return Glossary(std::move(entries), mode);
    } catch (const nlohmann::json::exception & e) {
        throw Error(Errc::InvalidConfig, std::string("bad glossary: ") + e.what());
    }
}

Glossary Glossary::load(const std::string & path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open glossary " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception & e) {
        throw Error(Errc::InvalidConfig, path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json Glossary::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto & [from, to] : entries_) {
        entries.push_back({{"from", from}, {"to", to}});
    }
    return {{"match_mode", mode_ == MatchMode::WholeWord ? "WHOLE_WORD" : "SUBSTRING"}, {"entries", entries}};
}

std::string post_edit(std::string_view text, const Glossary & glossary) {
    std::string out(text);
    for (const auto & entry : glossary.entries()) {
        out = replace_all(out, entry, glossary.match_mode());
    }
    return out;
}

} // namespace l2m3::corpus
