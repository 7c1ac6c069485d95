#include "l2m3/pipeline/pipeline.hpp"

#include "l2m3/error.hpp"
#include "l2m3/hash.hpp"
#include "l2m3/metrics/scores.hpp"

namespace l2m3::pipeline {

using nlohmann::json;

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::TranslateIn:  return "TRANSLATE_IN";
        case Stage::GuardIn:      return "GUARD_IN";
        case Stage::Chat:         return "CHAT";
        case Stage::GuardOut:     return "GUARD_OUT";
        case Stage::TranslateOut: return "TRANSLATE_OUT";
    }
    return "TRANSLATE_IN";
}

Stage parse_stage(std::string_view name) {
    for (auto s : {Stage::TranslateIn, Stage::GuardIn, Stage::Chat, Stage::GuardOut, Stage::TranslateOut}) {
        if (stage_name(s) == name) {
            return s;
        }
    }
    throw Error(Errc::InvalidArgument, "unknown stage '" + std::string(name) + "'");
}

std::string_view kind_name(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Answer:  return "ANSWER";
        case OutcomeKind::Clarify: return "CLARIFY";
        case OutcomeKind::Blocked: return "BLOCKED";
        case OutcomeKind::Error:   return "ERROR";
    }
    return "ERROR";
}

OutcomeKind parse_kind(std::string_view name) {
    for (auto k : {OutcomeKind::Answer, OutcomeKind::Clarify, OutcomeKind::Blocked, OutcomeKind::Error}) {
        if (kind_name(k) == name) {
            return k;
        }
    }
    throw Error(Errc::InvalidArgument, "unknown outcome kind '" + std::string(name) + "'");
}

json to_json(const StageRecord & r) {
    json j{{"stage", stage_name(r.stage)},
           {"input_text", r.input_text},
           {"output_text", r.output_text},
           {"latency_ms", r.latency_ms}};
    j["verdict"] = r.verdict ? guardrails::to_json(*r.verdict) : json(nullptr);
    j["backend_id"] = r.backend_id ? json(*r.backend_id) : json(nullptr);
    return j;
}

StageRecord stage_from_json(const json & j) {
    StageRecord r;
    r.stage = parse_stage(j.at("stage").get<std::string>());
    r.input_text = j.at("input_text").get<std::string>();
    r.output_text = j.at("output_text").get<std::string>();
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    if (j.contains("verdict") && !j["verdict"].is_null()) {
        r.verdict = guardrails::verdict_from_json(j["verdict"]);
    }
    if (j.contains("backend_id") && !j["backend_id"].is_null()) {
        r.backend_id = j["backend_id"].get<std::string>();
    }
    return r;
}

json to_json(const PipelineOutcome & o) {
    json trace = json::array();
    for (const auto & r : o.trace) {
        trace.push_back(to_json(r));
    }
    json j{{"kind", kind_name(o.kind)}, {"text", o.text_local}, {"trace", trace}};
    if (!o.error.empty()) {
        j["error"] = o.error;
    }
    return j;
}

SessionIdSource::SessionIdSource(std::optional<std::uint64_t> seed)
    : rng_(seed ? *seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}()) {}

std::string SessionIdSource::next() {
    std::lock_guard lock(mutex_);
    const auto hi = rng_();
    const auto lo = rng_();
    return hex64(hi) + hex64(lo);
}

Pipeline::Pipeline(std::shared_ptr<const backends::Translator> translator,
                   std::shared_ptr<const backends::ChatBackend> chat, std::shared_ptr<const backends::Embedder> embedder,
                   std::shared_ptr<const guardrails::Guardrails> guard, LanguageRegistry languages,
                   PipelineOptions options, std::shared_ptr<SessionIdSource> ids)
    : translator_(std::move(translator)),
      chat_(std::move(chat)),
      embedder_(std::move(embedder)),
      guard_(std::move(guard)),
      languages_(std::move(languages)),
      options_(options),
      ids_(std::move(ids)) {
    if (!guard_) {
        throw Error(Errc::InvalidConfig, "pipeline needs guardrails");
    }
    if (!languages_.contains(english())) {
        languages_.add(english());
    }
    if (options_.max_turns == 0) {
        throw Error(Errc::InvalidConfig, "max_turns must be positive");
    }
}

Session Pipeline::create_session(std::string_view chw_lang) const {
    Session s;
    s.chw_lang = languages_.require(chw_lang);
    s.id = ids_->next();
    s.created_at = std::chrono::system_clock::now();
    return s;
}

std::string Pipeline::refusal_template(OutcomeKind kind, const LanguageCode & lang) const {
    std::string_view english_text;
    switch (kind) {
        case OutcomeKind::Clarify: english_text = templates::clarify; break;
        case OutcomeKind::Blocked: english_text = templates::blocked; break;
        case OutcomeKind::Error:   english_text = templates::error; break;
        case OutcomeKind::Answer:
            throw Error(Errc::InvalidArgument, "ANSWER outcomes have no template");
    }
    if (lang == english() || !translator_) {
        return std::string(english_text);
    }
    try {
        auto localized = translator_->translate({std::string(english_text), english(), lang}).text;
        return localized.empty() ? std::string(english_text) : localized;
    } catch (const Error &) {
        return std::string(english_text);
    }
}

PipelineOutcome Pipeline::handle_turn(Session & session, std::string_view user_text_local) const {
    PipelineOutcome out;
    const auto & lang = session.chw_lang;
    const bool pivot_only = lang == english();

    auto finish = [&](OutcomeKind kind) {
        out.kind = kind;
        out.text_local = refusal_template(kind, lang);
        return out;
    };
    auto fail = [&](const Error & e) {
        out.error = e.what();
        return finish(OutcomeKind::Error);
    };

    try {
        // TRANSLATE_IN
        std::string text_en;
        if (pivot_only) {
            text_en = std::string(user_text_local);
            out.trace.push_back({Stage::TranslateIn, text_en, text_en, std::nullopt, "identity", 0});
        } else {
            if (!translator_) {
                throw Error(Errc::BackendUnavailable, "no translator configured");
            }
            auto r = translator_->translate({std::string(user_text_local), lang, english()});
            text_en = r.text;
            out.trace.push_back({Stage::TranslateIn, std::string(user_text_local), text_en, std::nullopt,
                                 r.backend_id, r.latency_ms});
        }

        // GUARD_IN
        const auto t0 = std::chrono::steady_clock::now();
        auto verdict = guard_->check_input(text_en, embedder_.get());
        if (verdict.allowed() && !pivot_only && options_.min_cross_lingual_similarity && embedder_) {
            const double sim = metrics::semantic_similarity(embedder_->embed(user_text_local), embedder_->embed(text_en));
            if (sim < *options_.min_cross_lingual_similarity) {
                verdict = {guardrails::Decision::Clarify, std::string(translation_drift_rule),
                           "cross-lingual similarity " + std::to_string(sim) + " below " +
                               std::to_string(*options_.min_cross_lingual_similarity)};
            }
        }
        const auto guard_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        out.trace.push_back({Stage::GuardIn, text_en, text_en, verdict, std::nullopt, guard_ms});
        if (verdict.decision == guardrails::Decision::Clarify) {
            return finish(OutcomeKind::Clarify);
        }
        if (verdict.decision == guardrails::Decision::Block) {
            return finish(OutcomeKind::Blocked);
        }

        // CHAT
        if (!chat_) {
            throw Error(Errc::BackendUnavailable, "no chat backend configured");
        }
        backends::ChatRequest req;
        if (options_.context_retention) {
            req.messages = session.history_en;
        }
        req.messages.push_back({std::string(corpus::roles::chw), text_en, english()});
        req.max_tokens = options_.max_tokens;
        req.temperature = options_.temperature;
        auto reply = chat_->chat(req);
        const std::string answer_en = reply.message.content;
        out.trace.push_back({Stage::Chat, text_en, answer_en, std::nullopt, reply.backend_id,
                             reply.latency_ms});

        // GUARD_OUT
        auto out_verdict = guard_->check_output(answer_en);
        const bool answer_ok = out_verdict.allowed();
        out.trace.push_back({Stage::GuardOut, answer_en, answer_ok ? answer_en : std::string(templates::blocked),
                             std::move(out_verdict), std::nullopt, 0});
        if (!answer_ok) {
            return finish(OutcomeKind::Blocked);
        }

        // TRANSLATE_OUT
        std::string answer_local;
        if (pivot_only) {
            answer_local = answer_en;
            out.trace.push_back({Stage::TranslateOut, answer_en, answer_local, std::nullopt, "identity", 0});
        } else {
            if (!translator_) {
                throw Error(Errc::BackendUnavailable, "no translator configured");
            }
            auto r = translator_->translate({answer_en, english(), lang});
            answer_local = r.text;
            out.trace.push_back({Stage::TranslateOut, answer_en, answer_local, std::nullopt,
                                 r.backend_id, r.latency_ms});
        }
        if (answer_local.empty()) {
            throw Error(Errc::MalformedResponse, "translated answer is empty");
        }

        session.history_en.push_back({std::string(corpus::roles::chw), text_en, english()});
        session.history_en.push_back({std::string(corpus::roles::assistant), answer_en, english()});
        while (session.history_en.size() > 2 * options_.max_turns) {
            session.history_en.erase(session.history_en.begin(), session.history_en.begin() + 2);
        }
        out.kind = OutcomeKind::Answer;
        out.text_local = std::move(answer_local);
        return out;
    } catch (const Error & e) {
        if (is_backend_error(e.code())) {
            return fail(e);
        }
        throw;
    }
}

void SessionStore::insert(Session session) {
    auto slot = std::make_shared<Slot>();
    const auto id = session.id;
    slot->session = std::move(session);
    std::lock_guard lock(mutex_);
    slots_[id] = std::move(slot);
}

bool SessionStore::contains(const std::string & id) const {
    std::lock_guard lock(mutex_);
    return slots_.count(id) > 0;
}

SessionStore::TurnGuard SessionStore::begin_turn(const std::string & id) {
    std::shared_ptr<Slot> slot;
    {
        std::lock_guard lock(mutex_);
        auto it = slots_.find(id);
        if (it == slots_.end()) {
            throw Error(Errc::SessionNotFound, "no session '" + id + "'");
        }
        slot = it->second;
    }
    std::unique_lock turn(slot->turn, std::try_to_lock);
    if (!turn.owns_lock()) {
        throw Error(Errc::TurnInProgress, "session '" + id + "' is already handling a turn");
    }
    return TurnGuard(std::move(slot), std::move(turn));
}

std::optional<Session> SessionStore::snapshot(const std::string & id) const {
    std::shared_ptr<Slot> slot;
    {
        std::lock_guard lock(mutex_);
        auto it = slots_.find(id);
        if (it == slots_.end()) {
            return std::nullopt;
        }
        slot = it->second;
    }
    std::lock_guard turn(slot->turn);
    return slot->session;
}

} // namespace l2m3::pipeline
