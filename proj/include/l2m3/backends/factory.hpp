#pragma once

#include <memory>
#include <optional>
#include <string>

#include "l2m3/backends/backend.hpp"
#include "l2m3/backends/http.hpp"

namespace l2m3::backends {

struct FactoryOptions {
    Limits limits;
    std::optional<std::string> bearer_token;
    std::chrono::milliseconds timeout{30000};
    int retries = 0;
};

// Endpoint strings:
//   translator: http://..., mock:identity, mock:glossary:<file>,
//               mock:degrade:<retention>:<seed>, mock:unavailable
//   chat:       http://..., mock:scripted:<file>, mock:echo,
//               mock:degrade-echo:<retention>:<seed>, mock:unavailable
//   embedder:   http://..., mock:hash, mock:unavailable
// Throws InvalidConfig for anything else.
std::shared_ptr<const Translator> make_translator(const std::string & endpoint, const FactoryOptions & opts = {});
std::shared_ptr<const ChatBackend> make_chat(const std::string & endpoint, const FactoryOptions & opts = {});
std::shared_ptr<const Embedder> make_embedder(const std::string & endpoint, const FactoryOptions & opts = {});

bool is_mock(const std::string & endpoint);

} // namespace l2m3::backends
