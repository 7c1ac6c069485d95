#include "l2m3/backends/factory.hpp"

#include <vector>

#include "l2m3/backends/mock.hpp"
#include "l2m3/error.hpp"

namespace l2m3::backends {

namespace {

// "mock:degrade:0.9:7" -> {"mock", "degrade", "0.9", "7"}; the file argument of
// glossary/scripted mocks is everything after the second colon.
std::vector<std::string> split_endpoint(const std::string & endpoint, std::size_t max_parts) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (parts.size() + 1 < max_parts) {
        const auto colon = endpoint.find(':', pos);
        if (colon == std::string::npos) {
            break;
        }
        parts.push_back(endpoint.substr(pos, colon - pos));
        pos = colon + 1;
    }
    parts.push_back(endpoint.substr(pos));
    return parts;
}

std::pair<double, std::uint64_t> retention_and_seed(const std::string & endpoint) {
    auto parts = split_endpoint(endpoint, 4);
    if (parts.size() != 4) {
        throw Error(Errc::InvalidConfig, "expected " + parts[0] + ":" + parts[1] + ":<retention>:<seed>, got '" +
                                             endpoint + "'");
    }
    try {
        return {std::stod(parts[2]), std::stoull(parts[3])};
    } catch (const std::exception &) {
        throw Error(Errc::InvalidConfig, "bad retention or seed in '" + endpoint + "'");
    }
}

HttpEndpoint endpoint_for(const std::string & url, const FactoryOptions & opts) {
    HttpEndpoint ep;
    ep.base_url = url;
    ep.bearer_token = opts.bearer_token;
    ep.timeout = opts.timeout;
    ep.retries = opts.retries;
    return ep;
}

bool is_http(const std::string & endpoint) {
    return endpoint.rfind("http://", 0) == 0;
}

[[noreturn]] void unknown(const char * kind, const std::string & endpoint) {
    throw Error(Errc::InvalidConfig, std::string("unknown ") + kind + " endpoint '" + endpoint + "'");
}

} // namespace

bool is_mock(const std::string & endpoint) {
    return endpoint.rfind("mock:", 0) == 0;
}

std::shared_ptr<const Translator> make_translator(const std::string & endpoint, const FactoryOptions & opts) {
    if (is_http(endpoint)) {
        return std::make_shared<HttpTranslator>(endpoint_for(endpoint, opts), opts.limits);
    }
    if (endpoint == "mock:identity") {
        return std::make_shared<IdentityTranslator>(opts.limits);
    }
    if (endpoint == "mock:unavailable") {
        return std::make_shared<UnavailableTranslator>(opts.limits);
    }
    if (endpoint.rfind("mock:glossary:", 0) == 0) {
        return std::make_shared<GlossaryTranslator>(
            GlossaryTranslator::load(endpoint.substr(std::string_view("mock:glossary:").size()), opts.limits));
    }
    if (endpoint.rfind("mock:degrade:", 0) == 0) {
        auto [retention, seed] = retention_and_seed(endpoint);
        return std::make_shared<DegradingTranslator>(retention, seed, opts.limits);
    }
    unknown("translator", endpoint);
}

std::shared_ptr<const ChatBackend> make_chat(const std::string & endpoint, const FactoryOptions & opts) {
    if (is_http(endpoint)) {
        return std::make_shared<HttpChat>(endpoint_for(endpoint, opts), opts.limits);
    }
    if (endpoint == "mock:echo") {
        return std::make_shared<EchoChat>(1.0, 0, opts.limits);
    }
    if (endpoint == "mock:unavailable") {
        return std::make_shared<UnavailableChat>(opts.limits);
    }
    if (endpoint.rfind("mock:scripted:", 0) == 0) {
        return std::make_shared<ScriptedChat>(
            ScriptedChat::load(endpoint.substr(std::string_view("mock:scripted:").size()), opts.limits));
    }
    if (endpoint.rfind("mock:degrade-echo:", 0) == 0) {
        auto [retention, seed] = retention_and_seed(endpoint);
        return std::make_shared<EchoChat>(retention, seed, opts.limits);
    }
    unknown("chat", endpoint);
}

std::shared_ptr<const Embedder> make_embedder(const std::string & endpoint, const FactoryOptions & opts) {
    if (is_http(endpoint)) {
        return std::make_shared<HttpEmbedder>(endpoint_for(endpoint, opts), opts.limits);
    }
    if (endpoint == "mock:hash") {
        return std::make_shared<HashEmbedder>(opts.limits);
    }
    if (endpoint == "mock:unavailable") {
        return std::make_shared<UnavailableEmbedder>(opts.limits);
    }
    unknown("embedder", endpoint);
}

} // namespace l2m3::backends
