// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/backend.hpp"

#include <string>

namespace clot {

struct HttpBackendConfig {
    std::string base_url;               // e.g. http://localhost:8000 or https://api.openai.com
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;                // resolved from env by the CLI, never from config files
    int timeout_seconds = 60;
    int max_retries = 3;                // transient failures only
    int backoff_initial_ms = 250;       // doubles per retry
    bool sleep_on_retry = true;         // disabled in tests
};

// OpenAI-compatible chat-completions client. Retries transient transport
// failures (connect errors, 5xx, 429) with exponential backoff; 4xx-class
// protocol failures surface immediately.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    Completion complete(const PromptRequest& request) override;

    static json build_payload(const PromptRequest& request, const std::string& model);
    static Completion parse_response(const std::string& body);

private:
    HttpBackendConfig config_;
    std::string host_;
    int port_ = 0;
    bool tls_ = false;
};

} // namespace clot
