#include "l2m3/corpus/sample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "l2m3/error.hpp"
#include "l2m3/prng.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::corpus {

std::string_view daly_name(DalyCategory c) {
    switch (c) {
        case DalyCategory::IHD:      return "IHD";
        case DalyCategory::LRI:      return "LRI";
        case DalyCategory::NEONATAL: return "NEONATAL";
        case DalyCategory::OTHER:    return "OTHER";
    }
    return "OTHER";
}

std::optional<DalyCategory> parse_daly(std::string_view name) {
    for (auto c : {DalyCategory::IHD, DalyCategory::LRI, DalyCategory::NEONATAL, DalyCategory::OTHER}) {
        if (daly_name(c) == name) {
            return c;
        }
    }
    return std::nullopt;
}

nlohmann::json sample_to_json(const DialogueSample & s) {
    nlohmann::json j;
    j["id"] = s.id;
    j["source_dataset"] = s.source_dataset;
    j["daly_category"] = s.daly_category == DalyCategory::OTHER ? nlohmann::json(nullptr)
                                                                : nlohmann::json(daly_name(s.daly_category));
    j["chatml"] = serialize_chatml(s.doc);
    return j;
}

DialogueSample sample_from_json(const nlohmann::json & j) {
    if (!j.is_object()) {
        throw Error(Errc::InvalidArgument, "corpus line is not a JSON object");
    }
    DialogueSample s;
    try {
        s.id = j.at("id").get<std::string>();
        s.source_dataset = j.at("source_dataset").get<std::string>();
        const auto & cat = j.at("daly_category");
        if (!cat.is_null()) {
            auto parsed = parse_daly(cat.get<std::string>());
            if (!parsed) {
                throw Error(Errc::InvalidArgument, "unknown daly_category '" + cat.get<std::string>() + "'");
            }
            s.daly_category = *parsed;
        }
        s.doc = parse_chatml(j.at("chatml").get<std::string>());
    } catch (const nlohmann::json::exception & e) {
        throw Error(Errc::InvalidArgument, std::string("bad corpus record: ") + e.what());
    }
    if (s.id.empty()) {
        throw Error(Errc::InvalidArgument, "empty sample id");
    }
    return s;
}

CorpusReadResult read_corpus(std::istream & in) {
    CorpusReadResult result;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (unicode::is_blank(line)) {
            continue;
        }
        try {
            auto sample = sample_from_json(nlohmann::json::parse(line));
            if (!ids.insert(sample.id).second) {
                result.problems.push_back({lineno, "duplicate id '" + sample.id + "'"});
                continue;
            }
            result.samples.push_back(std::move(sample));
        } catch (const nlohmann::json::exception & e) {
            result.problems.push_back({lineno, std::string("invalid JSON: ") + e.what()});
        } catch (const Error & e) {
            result.problems.push_back({lineno, e.what()});
        }
    }
    return result;
}

std::vector<DialogueSample> read_corpus_strict(std::istream & in) {
    auto result = read_corpus(in);
    if (!result.problems.empty()) {
        const auto & p = result.problems.front();
        throw Error(Errc::InvalidArgument, "line " + std::to_string(p.line) + ": " + p.message);
    }
    return std::move(result.samples);
}

void write_corpus(std::ostream & out, const std::vector<DialogueSample> & samples) {
    for (const auto & s : samples) {
        out << sample_to_json(s).dump() << '\n';
    }
}

DalyKeywords daly_keywords_from_json(const nlohmann::json & j) {
    DalyKeywords kw;
    for (auto c : {DalyCategory::IHD, DalyCategory::LRI, DalyCategory::NEONATAL}) {
        const std::string key(daly_name(c));
        if (!j.contains(key) || !j[key].is_array()) {
            throw Error(Errc::InvalidConfig, "DALY keyword file lacks a '" + key + "' list");
        }
        for (const auto & phrase : j[key]) {
            auto p = phrase.get<std::string>();
            if (!p.empty()) {
                kw[c].push_back(std::move(p));
            }
        }
    }
    return kw;
}

DalyKeywords load_daly_keywords(const std::string & path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::Io, "cannot open keyword file " + path);
    }
    try {
        nlohmann::json j;
        in >> j;
        return daly_keywords_from_json(j);
    } catch (const nlohmann::json::exception & e) {
        throw Error(Errc::InvalidConfig, path + ": " + e.what());
    }
}

std::vector<DialogueSample> filter_by_daly(const std::vector<DialogueSample> & samples,
                                           const DalyKeywords & keywords) {
    std::vector<DialogueSample> out;
    for (const auto & s : samples) {
        std::string text;
        for (const auto & m : s.doc.messages) {
            text += m.content;
            text += '\n';
        }
        const auto cps = unicode::decode(text).cps;
        for (auto c : {DalyCategory::IHD, DalyCategory::LRI, DalyCategory::NEONATAL}) {
            auto it = keywords.find(c);
            if (it == keywords.end()) {
                continue;
            }
            const bool hit = std::any_of(it->second.begin(), it->second.end(), [&](const std::string & k) {
                return unicode::find_folded(cps, unicode::decode(k).cps) != unicode::npos;
            });
            if (hit) {
                auto tagged = s;
                tagged.daly_category = c;
                out.push_back(std::move(tagged));
                break;
            }
        }
    }
    return out;
}

std::size_t validation_count(std::size_t n, double fraction) {
    if (n == 0 || fraction <= 0.0) {
        return 0;
    }
    auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
    return std::clamp<std::size_t>(k, 1, n);
}

DatasetSplit split_dataset(const std::vector<DialogueSample> & samples, double validation_fraction,
                           std::uint64_t seed) {
    if (samples.empty()) {
        throw Error(Errc::EmptyInput, "cannot split an empty dataset");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw Error(Errc::InvalidArgument, "validation fraction must lie in [0, 1)");
    }
    if (samples.size() > 0xFFFFFFFFull) {
        throw Error(Errc::InvalidArgument, "dataset too large to shuffle");
    }
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Lcg64 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.bounded(static_cast<std::uint32_t>(i + 1))]);
    }
    DatasetSplit split;
    split.validation_fraction = validation_fraction;
    split.seed = seed;
    const auto k = validation_count(samples.size(), validation_fraction);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < k ? split.validation : split.train).push_back(samples[order[i]]);
    }
    return split;
}

} // namespace l2m3::corpus
