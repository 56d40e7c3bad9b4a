// SPDX-License-Identifier: Apache-2.0
#include "clot/http_backend.hpp"

#include "clot/error.hpp"

#include <httplib.h>

#include <chrono>
#include <memory>
#include <thread>

namespace clot {

namespace {

void split_url(const std::string& url, bool& tls, std::string& host, int& port) {
    std::string rest = url;
    tls = false;
    if (rest.rfind("https://", 0) == 0) {
        tls = true;
        rest = rest.substr(8);
    } else if (rest.rfind("http://", 0) == 0) {
        rest = rest.substr(7);
    } else {
        throw Error(Errc::config_invalid, "endpoint must start with http:// or https://");
    }
    const auto slash = rest.find('/');
    if (slash != std::string::npos) rest = rest.substr(0, slash);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
        host = rest.substr(0, colon);
        port = std::stoi(rest.substr(colon + 1));
    } else {
        host = rest;
        port = tls ? 443 : 80;
    }
    if (host.empty()) throw Error(Errc::config_invalid, "endpoint has no host");
}

} // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    split_url(config_.base_url, tls_, host_, port_);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (tls_) throw Error(Errc::config_invalid, "built without TLS support; use an http:// endpoint");
#endif
}

json HttpBackend::build_payload(const PromptRequest& request, const std::string& model) {
    json messages = json::array();
    if (request.system) {
        messages.push_back(json{{"role", "system"}, {"content", *request.system}});
    }
    messages.push_back(json{{"role", "user"}, {"content", request.user}});
    json payload;
    payload["model"] = model;
    payload["messages"] = std::move(messages);
    payload["temperature"] = request.temperature;
    if (request.seed) payload["seed"] = *request.seed;
    if (request.want_logprobs) payload["logprobs"] = true;
    return payload;
}

Completion HttpBackend::parse_response(const std::string& body) {
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const std::exception& e) {
        throw Error(Errc::malformed_response, std::string("response is not JSON: ") + e.what());
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() || parsed["choices"].empty()) {
        throw Error(Errc::malformed_response, "response has no choices");
    }
    const auto& choice = parsed["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        choice["message"]["content"].is_null()) {
        throw Error(Errc::malformed_response, "choice has no message content");
    }
    Completion completion;
    completion.text = choice["message"]["content"].get<std::string>();
    if (parsed.contains("usage") && parsed["usage"].is_object()) {
        const auto& u = parsed["usage"];
        if (u.contains("prompt_tokens") && u.contains("completion_tokens")) {
            TokenUsage usage;
            usage.prompt_tokens = u["prompt_tokens"].get<std::int64_t>();
            usage.completion_tokens = u["completion_tokens"].get<std::int64_t>();
            usage.estimated = false;
            completion.usage = usage;
        }
    }
    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
        std::vector<TokenLogprob> lps;
        for (const auto& t : choice["logprobs"]["content"]) {
            lps.push_back({t.value("token", std::string()), t.at("logprob").get<double>()});
        }
        completion.token_logprobs = std::move(lps);
    }
    return completion;
}

Completion HttpBackend::complete(const PromptRequest& request) {
    const json payload = build_payload(request, config_.model);
    const std::string body = payload.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    int backoff_ms = config_.backoff_initial_ms;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0 && config_.sleep_on_retry) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Result result;
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        if (tls_) {
            httplib::SSLClient client(host_, port_);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            result = client.Post(config_.path, headers, body, "application/json");
        } else
#endif
        {
            httplib::Client client(host_, port_);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            result = client.Post(config_.path, headers, body, "application/json");
        }
        if (!result) {
            last_error = httplib::to_string(result.error());
            continue; // transport failure: retry
        }
        const int status = result->status;
        if (status == 401 || status == 403) {
            throw Error(Errc::auth_failed, "endpoint returned HTTP " + std::to_string(status));
        }
        if (status == 429 || status >= 500) {
            last_error = "HTTP " + std::to_string(status);
            continue; // transient: retry
        }
        if (status < 200 || status >= 300) {
            throw Error(Errc::malformed_response,
                        "endpoint returned HTTP " + std::to_string(status) + ": " +
                            result->body.substr(0, 200));
        }
        return parse_response(result->body);
    }
    throw Error(Errc::transport_exhausted,
                "gave up after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

} // namespace clot
