#include "l2m3/eval/harness.hpp"

#include <atomic>
#include <istream>
#include <memory>
#include <span>
#include <thread>

#include "l2m3/error.hpp"
#include "l2m3/hash.hpp"
#include "l2m3/metrics/bleu.hpp"
#include "l2m3/pipeline/pipeline.hpp"
#include "l2m3/timestamp.hpp"
#include "l2m3/unicode.hpp"

namespace l2m3::eval {

using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, n) on up to `parallelism` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t parallelism, Fn && fn) {
    std::size_t workers = std::min(std::max<std::size_t>(parallelism, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto & t : pool) t.join();
}

std::uint64_t text_digest(const std::vector<std::string> & texts) {
    std::uint64_t h = fnv1a64_offset;
    for (const auto & t : texts) {
        h = fnv1a64(t, h);
        h = fnv1a64(std::string_view("\x1e", 1), h);
    }
    return h;
}

std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char32_t cp : unicode::decode(text).cps) {
        bool space = unicode::is_space(cp);
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

ReportRow score_row(std::string name, const std::vector<std::optional<std::string>> & outputs,
                    const std::vector<std::string> & refs, const backends::Embedder * embedder) {
    ReportRow row;
    row.name = std::move(name);
    std::vector<metrics::TokenizedSegment> cands;
    std::vector<std::vector<metrics::TokenizedSegment>> references;
    std::size_t failures = 0;
    double cos_sum = 0.0;
    std::size_t cos_n = 0;
    bool embed_failed = false;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (!outputs[i]) {
            ++failures;
            continue;
        }
        cands.push_back(metrics::tokenize(*outputs[i]));
        references.push_back({metrics::tokenize(refs[i])});
        if (embedder && !embed_failed) {
            try {
                cos_sum += metrics::semantic_similarity(embedder->embed(*outputs[i]), embedder->embed(refs[i]));
                ++cos_n;
            } catch (const Error &) {
                embed_failed = true;
            }
        }
    }
    row.metrics["failures"] = static_cast<double>(failures);
    row.metrics["n"] = static_cast<double>(outputs.size());
    if (!cands.empty()) {
        row.metrics["bleu"] = metrics::bleu(cands, references).score;
        if (embedder && !embed_failed && cos_n > 0) row.metrics["semantic_similarity"] = cos_sum / cos_n;
    }
    return row;
}

std::vector<std::optional<std::string>> translate_all(const std::vector<std::string> & texts,
                                                      const LanguageCode & src, const LanguageCode & tgt,
                                                      const backends::Translator & translator,
                                                      std::size_t parallelism) {
    std::vector<std::optional<std::string>> out(texts.size());
    parallel_for(texts.size(), parallelism, [&](std::size_t i) {
        try {
            out[i] = translator.translate({texts[i], src, tgt}).text;
        } catch (const Error &) {
        }
    });
    return out;
}

std::string direction(const LanguageCode & a, const LanguageCode & b) {
    return a.str() + "->" + b.str();
}

} // namespace

void ParallelCorpus::validate(const LanguageRegistry & languages) const {
    if (pairs.empty()) throw Error(Errc::EmptyCorpus, "parallel corpus has no pairs");
    languages.require(src_lang.str());
    languages.require(tgt_lang.str());
    if (src_lang == tgt_lang) throw Error(Errc::InvalidArgument, "parallel corpus languages must differ");
}

ParallelCorpus read_parallel_corpus(std::istream & in, const LanguageCode & src, const LanguageCode & tgt) {
    ParallelCorpus corpus;
    corpus.src_lang = src;
    corpus.tgt_lang = tgt;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (unicode::is_blank(line)) continue;
        try {
            auto j = json::parse(line);
            corpus.pairs.push_back({j.at("src").get<std::string>(), j.at("ref").get<std::string>()});
        } catch (const json::exception & e) {
            throw Error(Errc::InvalidArgument, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return corpus;
}

EvalReport eval_translation(const ParallelCorpus & corpus, const backends::Translator & translator,
                            const RunOptions & opts, bool both_directions) {
    if (corpus.pairs.empty()) throw Error(Errc::EmptyCorpus, "parallel corpus has no pairs");
    if (corpus.src_lang == corpus.tgt_lang) throw Error(Errc::InvalidArgument, "parallel corpus languages must differ");

    std::vector<std::string> srcs, refs;
    for (const auto & p : corpus.pairs) {
        srcs.push_back(p.src);
        refs.push_back(p.ref);
    }

    EvalReport report;
    report.kind = ReportKind::Translation;
    auto fwd = translate_all(srcs, corpus.src_lang, corpus.tgt_lang, translator, opts.parallelism);
    report.rows.push_back(score_row(direction(corpus.src_lang, corpus.tgt_lang), fwd, refs, opts.embedder));
    if (both_directions) {
        auto back = translate_all(refs, corpus.tgt_lang, corpus.src_lang, translator, opts.parallelism);
        report.rows.push_back(score_row(direction(corpus.tgt_lang, corpus.src_lang), back, srcs, opts.embedder));
    }

    json config = {{"kind", "TRANSLATION"},
                   {"translator", translator.id()},
                   {"src_lang", corpus.src_lang.str()},
                   {"tgt_lang", corpus.tgt_lang.str()},
                   {"both_directions", both_directions},
                   {"embedder", opts.embedder ? json(opts.embedder->id()) : json(nullptr)},
                   {"data", hex64(fnv1a64(hex64(text_digest(srcs)), text_digest(refs)))}};
    report.config_digest = config_digest(config);
    report.timestamp = utc_timestamp();
    return report;
}

EvalReport eval_round_trip(const std::vector<std::string> & texts, const LanguageCode & lang,
                           const LanguageCode & pivot, const backends::Translator & translator,
                           const RunOptions & opts) {
    if (texts.empty()) throw Error(Errc::EmptyCorpus, "no texts to round-trip");
    if (lang == pivot) throw Error(Errc::InvalidArgument, "round trip needs lang != pivot");

    std::vector<std::optional<std::string>> out(texts.size());
    parallel_for(texts.size(), opts.parallelism, [&](std::size_t i) {
        try {
            auto there = translator.translate({texts[i], lang, pivot});
            out[i] = translator.translate({there.text, pivot, lang}).text;
        } catch (const Error &) {
        }
    });

    EvalReport report;
    report.kind = ReportKind::RoundTrip;
    report.rows.push_back(
        score_row(lang.str() + "->" + pivot.str() + "->" + lang.str(), out, texts, opts.embedder));
    json config = {{"kind", "ROUND_TRIP"},
                   {"translator", translator.id()},
                   {"lang", lang.str()},
                   {"pivot", pivot.str()},
                   {"embedder", opts.embedder ? json(opts.embedder->id()) : json(nullptr)},
                   {"data", hex64(text_digest(texts))}};
    report.config_digest = config_digest(config);
    report.timestamp = utc_timestamp();
    return report;
}

CompositionMeasurement measure_composition(const std::vector<std::string> & texts, const LanguageCode & lang,
                                           const backends::Translator & translator,
                                           const backends::ChatBackend & chat, const RunOptions & opts) {
    if (texts.empty()) throw Error(Errc::EmptyCorpus, "no texts to measure");
    struct Item {
        bool ok = false;
        std::size_t in = 0, mid = 0, out = 0;
    };
    std::vector<Item> items(texts.size());
    parallel_for(texts.size(), opts.parallelism, [&](std::size_t i) {
        Item & it = items[i];
        it.in = count_tokens(texts[i]);
        try {
            auto translated = translator.translate({texts[i], lang, english()});
            it.mid = count_tokens(translated.text);
            backends::ChatRequest req;
            req.messages.push_back({std::string(corpus::roles::chw), translated.text, english()});
            it.out = count_tokens(chat.chat(req).message.content);
            it.ok = true;
        } catch (const Error &) {
        }
    });

    CompositionMeasurement m;
    for (const auto & it : items) {
        if (!it.ok) {
            ++m.failures;
            continue;
        }
        m.tokens_in += it.in;
        m.tokens_after_translation += it.mid;
        m.tokens_out += it.out;
    }
    if (m.tokens_in == 0) throw Error(Errc::EmptyCorpus, "no tokens measured");
    double a_trans = static_cast<double>(m.tokens_after_translation) / m.tokens_in;
    double a_lm = m.tokens_after_translation ? static_cast<double>(m.tokens_out) / m.tokens_after_translation : 0.0;
    double observed = static_cast<double>(m.tokens_out) / m.tokens_in;
    m.estimate = metrics::compose_accuracies(std::min(a_trans, 1.0), std::min(a_lm, 1.0), std::min(observed, 1.0));
    return m;
}

// ---- RHT ----

std::string_view test_type_name(TestType t) {
    switch (t) {
        case TestType::FCT: return "FCT";
        case TestType::NOTA: return "NOTA";
        case TestType::FQT: return "FQT";
    }
    return "FCT";
}

TestType parse_test_type(std::string_view name) {
    if (name == "FCT") return TestType::FCT;
    if (name == "NOTA") return TestType::NOTA;
    if (name == "FQT") return TestType::FQT;
    throw Error(Errc::InvalidArgument, "unknown test type: " + std::string(name));
}

void RhtItem::validate() const {
    if (options.size() < 2 || options.size() > 26) {
        throw Error(Errc::InvalidArgument, "item " + id + ": needs 2-26 options");
    }
    bool found = false;
    for (std::size_t i = 0; i < options.size(); ++i) {
        std::string expected(1, static_cast<char>('A' + i));
        if (options[i].label != expected) {
            throw Error(Errc::InvalidArgument, "item " + id + ": option " + std::to_string(i + 1) +
                                                   " must be labelled " + expected);
        }
        found = found || options[i].label == correct_label;
    }
    if (!found) throw Error(Errc::InvalidArgument, "item " + id + ": correct_label not among options");
}

std::vector<std::string> RhtItem::labels() const {
    std::vector<std::string> out;
    for (const auto & o : options) out.push_back(o.label);
    return out;
}

json to_json(const RhtItem & item) {
    json options = json::array();
    for (const auto & o : item.options) options.push_back({{"label", o.label}, {"text", o.text}});
    return {{"id", item.id},
            {"question", item.question},
            {"options", std::move(options)},
            {"correct_label", item.correct_label},
            {"test_type", test_type_name(item.test_type)},
            {"lang", item.lang.str()}};
}

RhtItem rht_item_from_json(const json & j) {
    try {
        RhtItem item;
        item.id = j.at("id").get<std::string>();
        item.question = j.at("question").get<std::string>();
        for (const auto & o : j.at("options")) {
            item.options.push_back({o.at("label").get<std::string>(), o.at("text").get<std::string>()});
        }
        item.correct_label = j.at("correct_label").get<std::string>();
        item.test_type = parse_test_type(j.at("test_type").get<std::string>());
        item.lang = LanguageCode(j.value("lang", std::string("en")));
        item.validate();
        return item;
    } catch (const json::exception & e) {
        throw Error(Errc::InvalidArgument, std::string("malformed RHT item: ") + e.what());
    }
}

std::vector<RhtItem> read_rht_items(std::istream & in) {
    std::vector<RhtItem> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (unicode::is_blank(line)) continue;
        try {
            items.push_back(rht_item_from_json(json::parse(line)));
        } catch (const json::exception & e) {
            throw Error(Errc::InvalidArgument, "line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error & e) {
            throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.detail());
        }
    }
    return items;
}

std::string render_rht_prompt(const RhtItem & item) {
    std::string out = item.question;
    for (const auto & o : item.options) out += "\n" + o.label + ". " + o.text;
    out += "\n";
    out += rht_instruction;
    return out;
}

std::optional<std::string> extract_label(std::string_view answer, const std::vector<std::string> & valid_labels) {
    if (valid_labels.empty()) throw Error(Errc::InvalidArgument, "no valid labels");
    auto d = unicode::decode(answer);
    const auto & cps = d.cps;
    auto alnum = [](char32_t c) { return unicode::is_word_char(c); };
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (alnum(cps[i]) && cps[i] < 0x80) {
            bool left = i == 0 || !alnum(cps[i - 1]);
            bool right = i + 1 == cps.size() || !alnum(cps[i + 1]);
            if (!left || !right) continue;
            char up = static_cast<char>(cps[i] >= 'a' && cps[i] <= 'z' ? cps[i] - 32 : cps[i]);
            for (const auto & label : valid_labels) {
                if (label.size() == 1 && label[0] == up) return label;
            }
        }
    }
    return std::nullopt;
}

std::string ChatAnswerer::id() const {
    return "chat:" + chat_.id();
}

std::string ChatAnswerer::answer(const RhtItem & item, const std::string & prompt) const {
    backends::ChatRequest req;
    req.messages.push_back({std::string(corpus::roles::chw), prompt, item.lang});
    return chat_.chat(req).message.content;
}

std::string PipelineAnswerer::answer(const RhtItem & item, const std::string & prompt) const {
    auto session = pipeline_.create_session(item.lang.str());
    auto outcome = pipeline_.handle_turn(session, prompt);
    if (outcome.kind != pipeline::OutcomeKind::Answer) return {};
    return outcome.text_local;
}

EvalReport run_rht(const std::vector<RhtItem> & items, const Answerer & answerer, const RhtOptions & opts,
                   std::vector<RhtItemResult> * details) {
    if (items.empty()) throw Error(Errc::EmptyInput, "no RHT items");
    for (const auto & item : items) item.validate();

    std::vector<RhtItemResult> results(items.size());
    parallel_for(items.size(), opts.parallelism, [&](std::size_t i) {
        const RhtItem & item = items[i];
        RhtItemResult & r = results[i];
        r.id = item.id;
        r.test_type = item.test_type;
        try {
            r.predicted = extract_label(answerer.answer(item, render_rht_prompt(item)), item.labels());
        } catch (const Error &) {
            r.predicted.reset();
        }
        r.correct = r.predicted && *r.predicted == item.correct_label;
    });

    EvalReport report;
    report.kind = ReportKind::Rht;
    for (TestType t : {TestType::FCT, TestType::NOTA, TestType::FQT}) {
        std::size_t n = 0;
        auto flags = std::make_unique<bool[]>(results.size());
        for (const auto & r : results)
            if (r.test_type == t) flags[n++] = r.correct;
        if (n == 0) continue;
        std::span<const bool> span(flags.get(), n);
        ReportRow row;
        row.name = std::string(test_type_name(t));
        row.metrics["accuracy"] = metrics::accuracy(span);
        row.metrics["score"] = metrics::pointwise_score(span, opts.p_correct, opts.p_wrong);
        row.metrics["n"] = static_cast<double>(n);
        report.rows.push_back(std::move(row));
    }

    json data = json::array();
    for (const auto & item : items) data.push_back(to_json(item));
    json config = {{"kind", "RHT"},
                   {"answerer", answerer.id()},
                   {"p_correct", opts.p_correct},
                   {"p_wrong", opts.p_wrong},
                   {"prompt_template", rht_prompt_version},
                   {"data", hex64(fnv1a64(data.dump()))}};
    report.config_digest = config_digest(config);
    report.timestamp = utc_timestamp();
    if (details) *details = std::move(results);
    return report;
}

} // namespace l2m3::eval
