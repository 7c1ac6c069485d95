#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "l2m3/corpus/chatml.hpp"
#include "json.hpp"

namespace l2m3::corpus {

enum class DalyCategory { IHD, LRI, NEONATAL, OTHER };

std::string_view daly_name(DalyCategory c);
std::optional<DalyCategory> parse_daly(std::string_view name);

struct DialogueSample {
    std::string id;
    ChatMLDocument doc;
    std::string source_dataset;
    DalyCategory daly_category = DalyCategory::OTHER;

    bool operator==(const DialogueSample &) const = default;
};

// JSONL line: {"id", "source_dataset", "daly_category": str|null, "chatml"}.
// A null category reads back as OTHER and OTHER is written as null.
nlohmann::json sample_to_json(const DialogueSample & s);
DialogueSample sample_from_json(const nlohmann::json & j);

struct CorpusProblem {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct CorpusReadResult {
    std::vector<DialogueSample> samples;
    std::vector<CorpusProblem> problems;
};

// Reads every line, collecting per-line problems (bad JSON, ChatML errors,
// duplicate ids) instead of stopping at the first one. Blank lines are skipped.
CorpusReadResult read_corpus(std::istream & in);
// Like read_corpus but throws on the first problem.
std::vector<DialogueSample> read_corpus_strict(std::istream & in);
void write_corpus(std::ostream & out, const std::vector<DialogueSample> & samples);

using DalyKeywords = std::map<DalyCategory, std::vector<std::string>>;

// {"IHD": [...], "LRI": [...], "NEONATAL": [...]}; all three keys required.
DalyKeywords daly_keywords_from_json(const nlohmann::json & j);
DalyKeywords load_daly_keywords(const std::string & path);

// Keeps samples whose message contents contain (case-insensitively) some
// keyword, tagging each with the first hit in the order IHD, LRI, NEONATAL.
std::vector<DialogueSample> filter_by_daly(const std::vector<DialogueSample> & samples,
                                           const DalyKeywords & keywords);

struct DatasetSplit {
    std::vector<DialogueSample> train;
    std::vector<DialogueSample> validation;
    double validation_fraction = 0.0;
    std::uint64_t seed = 0;
};

// Number of validation samples: floor(fraction * n + 0.5), at least 1 when
// fraction > 0 and n >= 1.
std::size_t validation_count(std::size_t n, double fraction);

// Fisher-Yates over Lcg64(seed): for i = n-1 down to 1, swap(i, bounded(i+1)).
// The first validation_count() shuffled samples form the validation set.
// Throws EmptyInput, InvalidArgument (fraction outside [0, 1)).
DatasetSplit split_dataset(const std::vector<DialogueSample> & samples, double validation_fraction,
                           std::uint64_t seed);

} // namespace l2m3::corpus
