#include "l2m3/service/service.hpp"

#include <future>

#include "httplib.h"
#include "l2m3/backends/factory.hpp"
#include "l2m3/backends/mock.hpp"
#include "l2m3/error.hpp"
#include "l2m3/timestamp.hpp"

namespace l2m3::service {

using nlohmann::json;

namespace {

Reply error_reply(int status, Errc code, const std::string & detail) {
    return {status, json{{"error", std::string(errc_name(code)) + ": " + detail}}};
}

Reply error_reply(int status, const Error & e) {
    return {status, json{{"error", e.what()}}};
}

Reply invalid_request(const std::string & detail) {
    return {400, json{{"error", "INVALID_REQUEST: " + detail}}};
}

std::shared_ptr<const guardrails::Guardrails> make_guardrails(const ServiceConfig & cfg,
                                                              const backends::Embedder * embedder) {
    auto gcfg = cfg.guardrails_config ? guardrails::GuardrailConfig::load(*cfg.guardrails_config)
                                      : guardrails::GuardrailConfig::defaults();
    // Without an embedder topicality falls back to keywords alone.
    if (!embedder) gcfg.topic_centroid_texts.clear();
    return std::make_shared<const guardrails::Guardrails>(std::move(gcfg), embedder);
}

std::vector<corpus::Message> history_from(const std::vector<TranscriptEntry> & turns, std::size_t max_turns) {
    std::vector<corpus::Message> history;
    for (const auto & t : turns) {
        if (t.outcome_kind != pipeline::OutcomeKind::Answer) continue;
        for (const auto & r : t.trace) {
            if (r.stage == pipeline::Stage::Chat) {
                history.push_back({std::string(corpus::roles::chw), r.input_text, english()});
                history.push_back({std::string(corpus::roles::assistant), r.output_text, english()});
            }
        }
    }
    if (history.size() > 2 * max_turns) {
        history.erase(history.begin(), history.end() - static_cast<std::ptrdiff_t>(2 * max_turns));
    }
    return history;
}

} // namespace

Backends make_backends(const ServiceConfig & cfg) {
    backends::FactoryOptions opts;
    opts.bearer_token = cfg.backend_token;
    opts.timeout = std::chrono::milliseconds(cfg.backend_timeout_ms);
    opts.retries = cfg.backend_retries;
    Backends b;
    if (cfg.translator) b.translator = backends::make_translator(*cfg.translator, opts);
    if (cfg.chat) b.chat = backends::make_chat(*cfg.chat, opts);
    if (cfg.embedder) b.embedder = backends::make_embedder(*cfg.embedder, opts);
    return b;
}

Service::Service(ServiceConfig cfg) : Service(cfg, make_backends(cfg)) {}

Service::Service(ServiceConfig cfg, Backends b)
    : cfg_(std::move(cfg)), backends_(std::move(b)), transcripts_(cfg_.data_dir) {
    cfg_.validate();
    LanguageRegistry languages;
    for (const auto & l : cfg_.languages) languages.add(LanguageCode(l));
    auto guard = make_guardrails(cfg_, backends_.embedder.get());
    auto ids = std::make_shared<pipeline::SessionIdSource>(cfg_.session_seed);
    pipeline_ = std::make_shared<pipeline::Pipeline>(backends_.translator, backends_.chat, backends_.embedder,
                                                     std::move(guard), std::move(languages), cfg_.pipeline,
                                                     std::move(ids));
    server_ = std::make_unique<httplib::Server>();
    install_routes();
}

Service::~Service() {
    stop();
}

Reply Service::create_session(const json & body) {
    if (!body.is_object() || !body.contains("lang") || !body.at("lang").is_string()) {
        return invalid_request("body must be {\"lang\": string}");
    }
    pipeline::Session session;
    try {
        session = pipeline_->create_session(body.at("lang").get<std::string>());
    } catch (const Error & e) {
        return error_reply(400, e);
    }
    SessionMeta meta{session.id, session.chw_lang.str(), utc_timestamp(session.created_at)};
    try {
        transcripts_.create(meta);
    } catch (const Error & e) {
        return error_reply(500, e);
    }
    {
        std::lock_guard lock(records_mutex_);
        records_[session.id] = Record{meta, {}};
    }
    sessions_.insert(std::move(session));
    return {201, json{{"session_id", meta.session_id}, {"lang", meta.lang}, {"created_at", meta.created_at}}};
}

bool Service::ensure_loaded(const std::string & id) {
    if (!valid_session_id(id)) return false;
    std::lock_guard lock(records_mutex_);
    if (records_.count(id)) return true;
    auto loaded = transcripts_.load(id);
    if (!loaded) return false;
    pipeline::Session session;
    session.id = id;
    session.chw_lang = LanguageCode(loaded->meta.lang);
    session.history_en = history_from(loaded->entries, cfg_.pipeline.max_turns);
    session.created_at = std::chrono::system_clock::now();
    sessions_.insert(std::move(session));
    records_[id] = Record{std::move(loaded->meta), std::move(loaded->entries)};
    return true;
}

Reply Service::post_message(const std::string & id, const json & body) {
    if (!body.is_object() || !body.contains("text") || !body.at("text").is_string()) {
        return invalid_request("body must be {\"text\": string}");
    }
    try {
        if (!ensure_loaded(id)) return error_reply(404, Errc::SessionNotFound, id);
    } catch (const Error & e) {
        return error_reply(500, e);
    }

    std::optional<pipeline::SessionStore::TurnGuard> turn;
    try {
        turn.emplace(sessions_.begin_turn(id));
    } catch (const Error & e) {
        return error_reply(e.code() == Errc::TurnInProgress ? 409 : 404, e);
    }
    auto & session = turn->session();
    const auto history_before = session.history_en;
    const auto text = body.at("text").get<std::string>();

    pipeline::PipelineOutcome outcome;
    try {
        outcome = pipeline_->handle_turn(session, text);
    } catch (const Error & e) {
        session.history_en = history_before;
        const bool client_fault = e.code() == Errc::InvalidArgument || e.code() == Errc::InvalidMessage;
        return error_reply(client_fault ? 400 : 500, e);
    }

    TranscriptEntry entry;
    entry.session_id = id;
    {
        std::lock_guard lock(records_mutex_);
        entry.turn_index = records_.at(id).turns.size();
    }
    entry.user_text_local = text;
    entry.response_text_local = outcome.text_local;
    entry.outcome_kind = outcome.kind;
    entry.trace = outcome.trace;
    entry.timestamp = utc_timestamp();
    try {
        transcripts_.append(entry);
    } catch (const Error & e) {
        session.history_en = history_before;
        return error_reply(500, e);
    }
    {
        std::lock_guard lock(records_mutex_);
        records_.at(id).turns.push_back(entry);
    }

    json out = pipeline::to_json(outcome);
    out["turn_index"] = entry.turn_index;
    return {outcome.kind == pipeline::OutcomeKind::Error ? 502 : 200, std::move(out)};
}

Reply Service::get_session(const std::string & id) {
    try {
        if (!ensure_loaded(id)) return error_reply(404, Errc::SessionNotFound, id);
    } catch (const Error & e) {
        return error_reply(500, e);
    }
    std::lock_guard lock(records_mutex_);
    const auto & rec = records_.at(id);
    json turns = json::array();
    for (const auto & t : rec.turns) turns.push_back(to_json(t));
    return {200, json{{"session_id", id},
                      {"lang", rec.meta.lang},
                      {"created_at", rec.meta.created_at},
                      {"turns", std::move(turns)}}};
}

Reply Service::health() const {
    std::vector<std::pair<std::string, std::future<bool>>> probes;
    auto add = [&](const char * name, auto backend) {
        if (backend) probes.emplace_back(name, std::async(std::launch::async, [backend] { return backend->reachable(); }));
    };
    add("translator", backends_.translator);
    add("chat", backends_.chat);
    add("embedder", backends_.embedder);
    json map = json::object();
    bool all = true;
    for (auto & [name, f] : probes) {
        bool ok = false;
        try {
            ok = f.get();
        } catch (const std::exception &) {
        }
        map[name] = ok;
        all = all && ok;
    }
    return {200, json{{"status", all ? "ok" : "degraded"}, {"backends", std::move(map)}}};
}

Reply Service::config() const {
    return {200, to_json(cfg_, true)};
}

void Service::install_routes() {
    auto send = [](httplib::Response & res, const Reply & r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto parse = [](const httplib::Request & req) { return json::parse(req.body, nullptr, false); };

    server_->set_pre_routing_handler([this, send](const httplib::Request & req, httplib::Response & res) {
        if (!cfg_.bearer_token || req.method == "OPTIONS" || req.path.rfind("/v1/", 0) != 0) {
            return httplib::Server::HandlerResponse::Unhandled;
        }
        if (req.get_header_value("Authorization") != "Bearer " + *cfg_.bearer_token) {
            send(res, Reply{401, json{{"error", "UNAUTHORIZED: missing or wrong bearer token"}}});
            return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
    });

    server_->set_post_routing_handler([this](const httplib::Request & req, httplib::Response & res) {
        const auto origin = req.get_header_value("Origin");
        if (origin.empty()) return;
        bool allowed = false;
        for (const auto & o : cfg_.cors_origins) allowed = allowed || o == "*" || o == origin;
        if (!allowed) return;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
    });

    server_->Options(R"(/.*)", [](const httplib::Request &, httplib::Response & res) { res.status = 204; });

    server_->Post("/v1/sessions", [this, send, parse](const httplib::Request & req, httplib::Response & res) {
        send(res, create_session(parse(req)));
    });
    server_->Post(R"(/v1/sessions/([^/]+)/messages)",
                  [this, send, parse](const httplib::Request & req, httplib::Response & res) {
                      send(res, post_message(req.matches[1], parse(req)));
                  });
    server_->Get(R"(/v1/sessions/([^/]+))", [this, send](const httplib::Request & req, httplib::Response & res) {
        send(res, get_session(req.matches[1]));
    });
    server_->Get("/healthz", [this, send](const httplib::Request &, httplib::Response & res) { send(res, health()); });
    server_->Get("/v1/config", [this, send](const httplib::Request &, httplib::Response & res) { send(res, config()); });
}

int Service::start() {
    if (cfg_.port == 0) {
        port_ = server_->bind_to_any_port(cfg_.host);
    } else {
        port_ = server_->bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
    }
    if (port_ < 0) throw Error(Errc::Io, "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void Service::run() {
    port_ = cfg_.port;
    if (!server_->listen(cfg_.host, cfg_.port)) {
        throw Error(Errc::Io, "cannot listen on " + cfg_.host + ":" + std::to_string(cfg_.port));
    }
}

void Service::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace l2m3::service
