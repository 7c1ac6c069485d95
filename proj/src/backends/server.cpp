#include "l2m3/backends/server.hpp"

#include "httplib.h"
#include "json.hpp"
#include "l2m3/error.hpp"

namespace l2m3::backends {

using nlohmann::json;

namespace {

int status_for(Errc code) {
    switch (code) {
        case Errc::BackendUnavailable:
            return 503;
        case Errc::TextTooLong:
            return 413;
        case Errc::UnsupportedLanguagePair:
        case Errc::UnsupportedLanguage:
        case Errc::ContextTooLong:
        case Errc::InvalidArgument:
        case Errc::InvalidMessage:
            return 400;
        default:
            return 500;
    }
}

void reply_error(httplib::Response & res, int status, const std::string & message) {
    res.status = status;
    res.set_content(json{{"error", message}}.dump(), "application/json");
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request & req, httplib::Response & res) {
        try {
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) {
                reply_error(res, 400, "INVALID_REQUEST: body is not a JSON object");
                return;
            }
            res.set_content(handler(body).dump(), "application/json");
        } catch (const Error & e) {
            // An unknown language tag on the wire is an unsupported pair.
            if (e.code() == Errc::UnsupportedLanguage) {
                reply_error(res, 400, std::string("UNSUPPORTED_LANGUAGE_PAIR: ") + e.what());
            } else {
                reply_error(res, status_for(e.code()), e.what());
            }
        } catch (const json::exception & e) {
            reply_error(res, 400, std::string("INVALID_REQUEST: ") + e.what());
        }
    };
}

} // namespace

WireServer::WireServer(std::shared_ptr<const Translator> translator, std::shared_ptr<const ChatBackend> chat,
                       std::shared_ptr<const Embedder> embedder)
    : translator_(std::move(translator)),
      chat_(std::move(chat)),
      embedder_(std::move(embedder)),
      server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

WireServer::~WireServer() {
    stop();
}

void WireServer::install_routes() {
    server_->Get("/healthz", [](const httplib::Request &, httplib::Response & res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });
    if (translator_) {
        server_->Post("/v1/translate", guarded([this](const json & body) {
            TranslationRequest req{body.at("text").get<std::string>(),
                                   LanguageCode(body.at("source_lang").get<std::string>()),
                                   LanguageCode(body.at("target_lang").get<std::string>())};
            return json{{"text", translator_->translate(req).text}};
        }));
    }
    if (chat_) {
        server_->Post("/v1/chat", guarded([this](const json & body) {
            ChatRequest req;
            for (const auto & m : body.at("messages")) {
                req.messages.push_back(
                    {m.at("role").get<std::string>(), m.at("content").get<std::string>(), english()});
            }
            req.max_tokens = body.value("max_tokens", 512);
            req.temperature = body.value("temperature", 0.0);
            auto result = chat_->chat(req);
            return json{{"role", result.message.role}, {"content", result.message.content}};
        }));
    }
    if (embedder_) {
        server_->Post("/v1/embed", guarded([this](const json & body) {
            auto v = embedder_->embed(body.at("text").get<std::string>());
            return json{{"values", v.values}, {"dim", v.dim()}};
        }));
    }
}

int WireServer::start(const std::string & host, int port) {
    host_ = host;
    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0) {
        throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void WireServer::run(const std::string & host, int port) {
    host_ = host;
    port_ = port;
    if (!server_->listen(host, port)) {
        throw Error(Errc::Io, "cannot listen on " + host + ":" + std::to_string(port));
    }
}

void WireServer::stop() {
    if (server_) {
        server_->stop();
    }
    if (thread_.joinable()) {
        thread_.join();
    }
}

std::string WireServer::base_url() const {
    return "http://" + host_ + ":" + std::to_string(port_);
}

} // namespace l2m3::backends
