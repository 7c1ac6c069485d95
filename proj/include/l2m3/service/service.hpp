#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "l2m3/backends/backend.hpp"
#include "l2m3/pipeline/pipeline.hpp"
#include "l2m3/service/config.hpp"
#include "l2m3/service/transcript.hpp"

namespace httplib {
class Server;
}

namespace l2m3::service {

struct Backends {
    std::shared_ptr<const backends::Translator> translator;
    std::shared_ptr<const backends::ChatBackend> chat;
    std::shared_ptr<const backends::Embedder> embedder;
};

// Builds the configured backends through the backend factory.
Backends make_backends(const ServiceConfig & cfg);

struct Reply {
    int status = 200;
    nlohmann::json body;
};

// Session-based chat over the pipeline. The handler methods carry the whole
// HTTP contract; start()/run() expose them over cpp-httplib.
class Service {
public:
    // Throws InvalidConfig, Io.
    explicit Service(ServiceConfig cfg);
    Service(ServiceConfig cfg, Backends backends);
    ~Service();

    Service(const Service &) = delete;
    Service & operator=(const Service &) = delete;

    Reply create_session(const nlohmann::json & body);
    Reply post_message(const std::string & session_id, const nlohmann::json & body);
    Reply get_session(const std::string & session_id);
    Reply health() const;
    Reply config() const;

    // Background listener; port 0 picks a free port. Returns the bound port.
    int start();
    // Blocking listener on the configured address.
    void run();
    void stop();
    int port() const noexcept { return port_; }

    const pipeline::Pipeline & pipeline() const noexcept { return *pipeline_; }

private:
    // Loads a persisted session into the in-memory store; false if unknown.
    bool ensure_loaded(const std::string & session_id);
    void install_routes();

    struct Record {
        SessionMeta meta;
        std::vector<TranscriptEntry> turns;
    };

    ServiceConfig cfg_;
    Backends backends_;
    std::shared_ptr<pipeline::Pipeline> pipeline_;
    pipeline::SessionStore sessions_;
    TranscriptStore transcripts_;
    // Persisted turns mirrored in memory; disk is read once per session.
    mutable std::mutex records_mutex_;
    std::map<std::string, Record> records_;

    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

} // namespace l2m3::service
