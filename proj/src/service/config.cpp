#include "l2m3/service/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "l2m3/error.hpp"
#include "l2m3/language.hpp"

namespace l2m3::service {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string & path, const std::string & base_dir) {
    if (base_dir.empty() || path.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

// Rewrites the file part of mock:glossary:<file> / mock:scripted:<file>.
std::string resolve_endpoint(const std::string & endpoint, const std::string & base_dir) {
    for (std::string_view prefix : {"mock:glossary:", "mock:scripted:"}) {
        if (endpoint.rfind(prefix, 0) == 0) {
            return std::string(prefix) + resolve(endpoint.substr(prefix.size()), base_dir);
        }
    }
    return endpoint;
}

std::optional<std::string> opt_string(const json & j, const char * key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

} // namespace

void ServiceConfig::validate() const {
    if (host.empty()) throw Error(Errc::InvalidConfig, "listen host is empty");
    if (port < 0 || port > 65535) throw Error(Errc::InvalidConfig, "listen port out of range");
    if (data_dir.empty()) throw Error(Errc::InvalidConfig, "data_dir is empty");
    if (backend_timeout_ms <= 0) throw Error(Errc::InvalidConfig, "backend_timeout_ms must be positive");
    if (backend_retries < 0 || backend_retries > 2) throw Error(Errc::InvalidConfig, "backend_retries must be 0-2");
    if (languages.empty()) throw Error(Errc::InvalidConfig, "no languages registered");
    for (const auto & l : languages) {
        if (!LanguageCode::well_formed(l)) throw Error(Errc::InvalidConfig, "bad language code: " + l);
    }
    if (pipeline.max_turns == 0) throw Error(Errc::InvalidConfig, "pipeline.max_turns must be positive");
    if (pipeline.max_tokens <= 0) throw Error(Errc::InvalidConfig, "pipeline.max_tokens must be positive");
    if (bearer_token && bearer_token->empty()) throw Error(Errc::InvalidConfig, "bearer_token is empty");
}

ServiceConfig config_from_json(const json & j, const std::string & base_dir) {
    if (!j.is_object()) throw Error(Errc::InvalidConfig, "service config must be a JSON object");
    ServiceConfig c;
    try {
        if (j.contains("listen")) {
            auto listen = j.at("listen").get<std::string>();
            auto colon = listen.rfind(':');
            if (colon == std::string::npos) throw Error(Errc::InvalidConfig, "listen must be host:port");
            c.host = listen.substr(0, colon);
            try {
                std::size_t used = 0;
                c.port = std::stoi(listen.substr(colon + 1), &used);
                if (used != listen.size() - colon - 1) throw std::invalid_argument("trailing");
            } catch (const std::logic_error &) {
                throw Error(Errc::InvalidConfig, "bad listen port: " + listen);
            }
        }
        c.data_dir = resolve(j.value("data_dir", c.data_dir), base_dir);
        if (auto t = opt_string(j, "translator_url")) c.translator = resolve_endpoint(*t, base_dir);
        if (auto t = opt_string(j, "chat_url")) c.chat = resolve_endpoint(*t, base_dir);
        if (auto t = opt_string(j, "embedder_url")) c.embedder = resolve_endpoint(*t, base_dir);
        c.backend_token = opt_string(j, "backend_token");
        c.backend_timeout_ms = j.value("backend_timeout_ms", c.backend_timeout_ms);
        c.backend_retries = j.value("backend_retries", c.backend_retries);
        if (auto g = opt_string(j, "guardrails_config")) c.guardrails_config = resolve(*g, base_dir);
        c.languages = j.value("languages", c.languages);
        c.bearer_token = opt_string(j, "bearer_token");
        c.cors_origins = j.value("cors_origins", c.cors_origins);
        if (j.contains("session_seed") && !j.at("session_seed").is_null()) {
            c.session_seed = j.at("session_seed").get<std::uint64_t>();
        }
        if (j.contains("pipeline")) {
            const auto & p = j.at("pipeline");
            c.pipeline.max_turns = p.value("max_turns", c.pipeline.max_turns);
            c.pipeline.max_tokens = p.value("max_tokens", c.pipeline.max_tokens);
            c.pipeline.temperature = p.value("temperature", c.pipeline.temperature);
            c.pipeline.context_retention = p.value("context_retention", c.pipeline.context_retention);
            if (p.contains("min_cross_lingual_similarity") && !p.at("min_cross_lingual_similarity").is_null()) {
                c.pipeline.min_cross_lingual_similarity = p.at("min_cross_lingual_similarity").get<double>();
            }
        }
    } catch (const json::exception & e) {
        throw Error(Errc::InvalidConfig, std::string("bad service config: ") + e.what());
    }
    c.validate();
    return c;
}

ServiceConfig load_config(const std::string & path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open service config " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::InvalidConfig, path + ": not valid JSON");
    return config_from_json(j, fs::path(path).parent_path().string());
}

json to_json(const ServiceConfig & c, bool redact) {
    auto secret = [redact](const std::optional<std::string> & s) -> json {
        if (!s) return nullptr;
        return redact ? json("***") : json(*s);
    };
    auto opt = [](const std::optional<std::string> & s) -> json { return s ? json(*s) : json(nullptr); };
    json pipeline = {{"max_turns", c.pipeline.max_turns},
                     {"max_tokens", c.pipeline.max_tokens},
                     {"temperature", c.pipeline.temperature},
                     {"context_retention", c.pipeline.context_retention},
                     {"min_cross_lingual_similarity", c.pipeline.min_cross_lingual_similarity
                                                          ? json(*c.pipeline.min_cross_lingual_similarity)
                                                          : json(nullptr)}};
    return {{"listen", c.host + ":" + std::to_string(c.port)},
            {"data_dir", c.data_dir},
            {"translator_url", opt(c.translator)},
            {"chat_url", opt(c.chat)},
            {"embedder_url", opt(c.embedder)},
            {"backend_token", secret(c.backend_token)},
            {"backend_timeout_ms", c.backend_timeout_ms},
            {"backend_retries", c.backend_retries},
            {"guardrails_config", opt(c.guardrails_config)},
            {"languages", c.languages},
            {"bearer_token", secret(c.bearer_token)},
            {"cors_origins", c.cors_origins},
            {"session_seed", c.session_seed ? json(*c.session_seed) : json(nullptr)},
            {"pipeline", std::move(pipeline)}};
}

ServiceConfig config_from_env(const std::optional<std::string> & path_override) {
    ServiceConfig c;
    if (path_override) {
        c = load_config(*path_override);
    } else if (const char * p = std::getenv("L2M3_CONFIG"); p && *p) {
        c = load_config(p);
    }
    if (const char * d = std::getenv("L2M3_DATA_DIR"); d && *d) {
        c.data_dir = d;
    }
    c.validate();
    return c;
}

} // namespace l2m3::service
