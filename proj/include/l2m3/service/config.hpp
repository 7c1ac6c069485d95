#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "l2m3/pipeline/pipeline.hpp"

namespace l2m3::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "data";

    // Backend endpoint strings as accepted by the backend factory; an absent
    // backend makes the dependent stages fail with BACKEND_UNAVAILABLE.
    std::optional<std::string> translator;
    std::optional<std::string> chat;
    std::optional<std::string> embedder;
    std::optional<std::string> backend_token;  // sent to HTTP backends
    int backend_timeout_ms = 30000;
    int backend_retries = 0;

    // Absent: built-in defaults (see guardrails::GuardrailConfig).
    std::optional<std::string> guardrails_config;
    std::vector<std::string> languages{"en", "te", "hi", "ar", "sw"};

    std::optional<std::string> bearer_token;  // required on /v1/* when set
    std::vector<std::string> cors_origins;   // "*" allows any origin

    pipeline::PipelineOptions pipeline;
    // Seeds session ids, for reproducible runs.
    std::optional<std::uint64_t> session_seed;

    // Throws InvalidConfig.
    void validate() const;
};

// Keys: "listen" ("host:port"), "data_dir", "translator_url", "chat_url",
// "embedder_url", "backend_token", "backend_timeout_ms", "backend_retries",
// "guardrails_config", "languages", "bearer_token", "cors_origins",
// "session_seed", "pipeline": {"max_turns", "max_tokens", "temperature",
// "context_retention", "min_cross_lingual_similarity"}.
// Relative file paths (guardrails_config, mock:glossary:<file>,
// mock:scripted:<file>) are resolved against `base_dir` when it is non-empty.
ServiceConfig config_from_json(const nlohmann::json & j, const std::string & base_dir = "");
ServiceConfig load_config(const std::string & path);

// Secrets are replaced by "***".
nlohmann::json to_json(const ServiceConfig & c, bool redact = true);

// L2M3_CONFIG names the config file (defaults apply when unset);
// L2M3_DATA_DIR overrides data_dir.
ServiceConfig config_from_env(const std::optional<std::string> & path_override = std::nullopt);

} // namespace l2m3::service
