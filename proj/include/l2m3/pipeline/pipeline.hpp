#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "l2m3/backends/backend.hpp"
#include "l2m3/corpus/chatml.hpp"
#include "l2m3/guardrails/guardrails.hpp"
#include "l2m3/language.hpp"

namespace l2m3::pipeline {

enum class Stage { TranslateIn, GuardIn, Chat, GuardOut, TranslateOut };
enum class OutcomeKind { Answer, Clarify, Blocked, Error };

std::string_view stage_name(Stage s);
Stage parse_stage(std::string_view name);
std::string_view kind_name(OutcomeKind k);
OutcomeKind parse_kind(std::string_view name);

struct StageRecord {
    Stage stage = Stage::TranslateIn;
    std::string input_text;
    std::string output_text;
    std::optional<guardrails::Verdict> verdict;  // set exactly for GUARD_IN / GUARD_OUT
    std::optional<std::string> backend_id;
    std::int64_t latency_ms = 0;

    bool operator==(const StageRecord &) const = default;
};

struct PipelineOutcome {
    OutcomeKind kind = OutcomeKind::Answer;
    std::string text_local;
    std::vector<StageRecord> trace;
    std::string error;  // backend failure detail for ERROR outcomes

    bool operator==(const PipelineOutcome &) const = default;
};

nlohmann::json to_json(const StageRecord & r);
StageRecord stage_from_json(const nlohmann::json & j);
nlohmann::json to_json(const PipelineOutcome & o);

struct Session {
    std::string id;
    LanguageCode chw_lang;
    std::vector<corpus::Message> history_en;
    std::chrono::system_clock::time_point created_at;
};

// Fixed English templates, localized at runtime through the translator.
namespace templates {
inline constexpr std::string_view clarify = "Could you please rephrase your question with more detail?";
inline constexpr std::string_view blocked = "I can't help with that request. Please ask a medical question.";
inline constexpr std::string_view error   = "The assistant is temporarily unavailable. Please try again.";
} // namespace templates

// Rule id used when the optional cross-lingual consistency check rejects a
// translation.
inline constexpr std::string_view translation_drift_rule = "translation_drift";

struct PipelineOptions {
    // Answered turns kept in history_en; older turns are dropped first.
    std::size_t max_turns = 50;
    int max_tokens = 512;
    double temperature = 0.0;
    // Send the English-side history with each chat request.
    bool context_retention = true;
    // When set, the embeddings of the local text and its English translation
    // must reach this cosine or the turn is returned for clarification.
    std::optional<double> min_cross_lingual_similarity;
};

// 128-bit session ids as 32 hex digits. Seeded sources give reproducible id
// sequences; the default draws from std::random_device.
class SessionIdSource {
public:
    explicit SessionIdSource(std::optional<std::uint64_t> seed = std::nullopt);
    std::string next();

private:
    std::mutex mutex_;
    std::mt19937_64 rng_;
};

class Pipeline {
public:
    Pipeline(std::shared_ptr<const backends::Translator> translator, std::shared_ptr<const backends::ChatBackend> chat,
             std::shared_ptr<const backends::Embedder> embedder, std::shared_ptr<const guardrails::Guardrails> guard,
             LanguageRegistry languages, PipelineOptions options = {},
             std::shared_ptr<SessionIdSource> ids = std::make_shared<SessionIdSource>());

    // Throws UnsupportedLanguage.
    Session create_session(std::string_view chw_lang) const;

    // One CHW turn: TRANSLATE_IN, GUARD_IN, CHAT, GUARD_OUT, TRANSLATE_OUT.
    // Backend failures become ERROR outcomes; only ANSWER grows the history
    // (by two messages). Callers serialize turns on the same session.
    PipelineOutcome handle_turn(Session & session, std::string_view user_text_local) const;

    // The English template for a CLARIFY/BLOCKED/ERROR outcome, translated to
    // `lang`; English is returned when lang is English or translation fails.
    std::string refusal_template(OutcomeKind kind, const LanguageCode & lang) const;

    const LanguageRegistry & languages() const noexcept { return languages_; }
    const PipelineOptions & options() const noexcept { return options_; }

private:
    std::shared_ptr<const backends::Translator> translator_;
    std::shared_ptr<const backends::ChatBackend> chat_;
    std::shared_ptr<const backends::Embedder> embedder_;
    std::shared_ptr<const guardrails::Guardrails> guard_;
    LanguageRegistry languages_;
    PipelineOptions options_;
    std::shared_ptr<SessionIdSource> ids_;
};

// Sessions by id with per-session turn exclusion.
class SessionStore {
    struct Slot {
        std::mutex turn;
        Session session;
    };

public:
    // Exclusive access to one session for the duration of a turn.
    class TurnGuard {
    public:
        Session & session() noexcept { return slot_->session; }

    private:
        friend class SessionStore;
        TurnGuard(std::shared_ptr<Slot> slot, std::unique_lock<std::mutex> lock)
            : slot_(std::move(slot)), lock_(std::move(lock)) {}

        std::shared_ptr<Slot> slot_;
        std::unique_lock<std::mutex> lock_;
    };

    void insert(Session session);
    bool contains(const std::string & id) const;

    // Throws SessionNotFound, or TurnInProgress when another turn holds the
    // session.
    TurnGuard begin_turn(const std::string & id);

    // Copy of the session state; waits for an in-flight turn to finish.
    std::optional<Session> snapshot(const std::string & id) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

} // namespace l2m3::pipeline
