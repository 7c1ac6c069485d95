#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "l2m3/backends/backend.hpp"
#include "l2m3/eval/report.hpp"
#include "l2m3/language.hpp"
#include "l2m3/metrics/scores.hpp"

namespace l2m3::pipeline {
class Pipeline;
}

namespace l2m3::eval {

struct RunOptions {
    // Items evaluated concurrently; results are always reduced in item order.
    std::size_t parallelism = 4;
    // When set, translation and round-trip rows also carry
    // "semantic_similarity": mean cosine between output and reference.
    const backends::Embedder * embedder = nullptr;
};

struct SentencePair {
    std::string src;
    std::string ref;
};

struct ParallelCorpus {
    std::vector<SentencePair> pairs;
    LanguageCode src_lang;
    LanguageCode tgt_lang;

    // Throws EmptyCorpus, UnsupportedLanguage, InvalidArgument (same languages).
    void validate(const LanguageRegistry & languages) const;
};

// JSONL lines of {"src": str, "ref": str}.
ParallelCorpus read_parallel_corpus(std::istream & in, const LanguageCode & src, const LanguageCode & tgt);

// Corpus BLEU of translated sources against references. Failed items are
// counted in "failures" and left out of BLEU; "bleu" is absent when every
// item failed. With both_directions a second row scores tgt -> src.
EvalReport eval_translation(const ParallelCorpus & corpus, const backends::Translator & translator,
                            const RunOptions & opts = {}, bool both_directions = false);

// BLEU of lang -> pivot -> lang against the originals, metrics "bleu" and
// "failures". Throws EmptyCorpus, InvalidArgument (lang == pivot).
EvalReport eval_round_trip(const std::vector<std::string> & texts, const LanguageCode & lang,
                           const LanguageCode & pivot, const backends::Translator & translator,
                           const RunOptions & opts = {});

// Token retention through translation (lang -> pivot) followed by the chat
// model, for inspecting how component losses compose.
struct CompositionMeasurement {
    std::size_t tokens_in = 0;
    std::size_t tokens_after_translation = 0;
    std::size_t tokens_out = 0;
    std::size_t failures = 0;
    // a_trans and a_lm are the measured per-stage retentions; observed is
    // the end-to-end retention.
    metrics::CompositionEstimate estimate;
};

CompositionMeasurement measure_composition(const std::vector<std::string> & texts, const LanguageCode & lang,
                                           const backends::Translator & translator,
                                           const backends::ChatBackend & chat, const RunOptions & opts = {});

// ---- reasoning hallucination tests ----

enum class TestType { FCT, NOTA, FQT };

std::string_view test_type_name(TestType t);
TestType parse_test_type(std::string_view name);

struct RhtOption {
    std::string label;
    std::string text;
};

struct RhtItem {
    std::string id;
    std::string question;
    std::vector<RhtOption> options;
    std::string correct_label;
    TestType test_type = TestType::FCT;
    LanguageCode lang;

    // 2-26 options labelled A, B, C, ... in order; correct_label among them.
    void validate() const;
    std::vector<std::string> labels() const;
};

nlohmann::json to_json(const RhtItem & item);
RhtItem rht_item_from_json(const nlohmann::json & j);
std::vector<RhtItem> read_rht_items(std::istream & in);

inline constexpr std::string_view rht_instruction = "Answer with the letter of the correct option only.";
inline constexpr std::string_view rht_prompt_version = "rht-prompt-v1";

// question, then one "A. text" line per option, then rht_instruction, each on
// its own line.
std::string render_rht_prompt(const RhtItem & item);

// First valid label standing on its own (bounded by the text edges or
// non-alphanumeric characters), matched case-insensitively.
std::optional<std::string> extract_label(std::string_view answer, const std::vector<std::string> & valid_labels);

class Answerer {
public:
    virtual ~Answerer() = default;
    virtual std::string id() const = 0;
    // May throw l2m3::Error; the harness then scores the item as wrong.
    virtual std::string answer(const RhtItem & item, const std::string & prompt) const = 0;
};

// Sends the prompt as a single CHW message.
class ChatAnswerer final : public Answerer {
public:
    explicit ChatAnswerer(const backends::ChatBackend & chat) : chat_(chat) {}
    std::string id() const override;
    std::string answer(const RhtItem & item, const std::string & prompt) const override;

private:
    const backends::ChatBackend & chat_;
};

// Runs the prompt through a fresh pipeline session in the item's language;
// anything but an ANSWER outcome yields an empty answer.
class PipelineAnswerer final : public Answerer {
public:
    explicit PipelineAnswerer(const pipeline::Pipeline & p) : pipeline_(p) {}
    std::string id() const override { return "pipeline"; }
    std::string answer(const RhtItem & item, const std::string & prompt) const override;

private:
    const pipeline::Pipeline & pipeline_;
};

struct RhtOptions {
    double p_correct = 1.0;
    double p_wrong = -0.25;
    std::size_t parallelism = 4;
};

struct RhtItemResult {
    std::string id;
    TestType test_type = TestType::FCT;
    std::optional<std::string> predicted;
    bool correct = false;
};

// One row per test type present (order FCT, NOTA, FQT) with "accuracy",
// "score" and "n". Unextractable answers count as wrong.
// Throws EmptyInput, InvalidArgument (invalid item).
EvalReport run_rht(const std::vector<RhtItem> & items, const Answerer & answerer, const RhtOptions & opts = {},
                   std::vector<RhtItemResult> * details = nullptr);

} // namespace l2m3::eval
