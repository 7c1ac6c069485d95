#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace l2m3::corpus {

enum class MatchMode { WholeWord, Substring };

class Glossary {
public:
    using Entry = std::pair<std::string, std::string>;

    Glossary() = default;
    // Throws InvalidConfig on an empty key or keys that collide after case folding.
    Glossary(std::vector<Entry> entries, MatchMode mode);

    const std::vector<Entry> & entries() const noexcept { return entries_; }
    MatchMode match_mode() const noexcept { return mode_; }
    bool empty() const noexcept { return entries_.empty(); }

    // {"match_mode": "WHOLE_WORD"|"SUBSTRING", "entries": [{"from": .., "to": ..}]}
    static Glossary from_json(const nlohmann::json & j);
    static Glossary load(const std::string & path);
    nlohmann::json to_json() const;

private:
    std::vector<Entry> entries_;
    MatchMode mode_ = MatchMode::WholeWord;
};

// Case-insensitive replacement of every key, entries applied in order. Text
// produced by one replacement is not rescanned by the same entry.
std::string post_edit(std::string_view text, const Glossary & glossary);

} // namespace l2m3::corpus
