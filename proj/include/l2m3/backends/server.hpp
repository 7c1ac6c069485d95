#pragma once

#include <memory>
#include <string>
#include <thread>

#include "l2m3/backends/backend.hpp"

namespace httplib {
class Server;
}

namespace l2m3::backends {

// Serves in-process backends over the wire protocol (/v1/translate, /v1/chat,
// /v1/embed, /healthz). Any backend may be null; its route then answers 404.
class WireServer {
public:
    WireServer(std::shared_ptr<const Translator> translator, std::shared_ptr<const ChatBackend> chat,
               std::shared_ptr<const Embedder> embedder);
    ~WireServer();

    WireServer(const WireServer &) = delete;
    WireServer & operator=(const WireServer &) = delete;

    // Binds (port 0 picks a free port) and serves on a background thread.
    // Returns the bound port.
    int start(const std::string & host = "127.0.0.1", int port = 0);
    // Serves on the calling thread until stop().
    void run(const std::string & host, int port);
    void stop();

    std::string base_url() const;

private:
    void install_routes();

    std::shared_ptr<const Translator> translator_;
    std::shared_ptr<const ChatBackend> chat_;
    std::shared_ptr<const Embedder> embedder_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

} // namespace l2m3::backends
