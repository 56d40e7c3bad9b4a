// SPDX-License-Identifier: Apache-2.0
#include "clot/http_backend.hpp"

#include "clot/error.hpp"
#include "clot/harness.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <memory>
#include <thread>

using namespace clot;

namespace {

// one mock chat-completions server per fixture
struct MockServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit MockServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        thread.join();
    }

    HttpBackendConfig config() const {
        HttpBackendConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port);
        c.model = "mock-model";
        c.api_key = "test-key";
        c.max_retries = 2;
        c.sleep_on_retry = false;
        return c;
    }
};

PromptRequest simple_request() {
    PromptRequest request;
    request.system = "You are a careful solver.";
    request.user = "What is 2+2?";
    request.temperature = 0.0;
    request.seed = 7;
    request.tag = PromptTag::forward;
    return request;
}

} // namespace

TEST_CASE("http backend parses content and reported usage") {
    json seen_payload;
    std::string seen_auth;
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_payload = json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        res.set_content(json{{"choices",
                              json::array({json{{"message", {{"role", "assistant"},
                                                             {"content", "<answer>4</answer>"}}}}})},
                             {"usage", {{"prompt_tokens", 120}, {"completion_tokens", 88}}}}
                            .dump(),
                        "application/json");
    });
    HttpBackend backend(server.config());
    const Completion completion = backend.complete(simple_request());
    CHECK(completion.text == "<answer>4</answer>");
    REQUIRE(completion.usage.has_value());
    CHECK(completion.usage->prompt_tokens == 120);
    CHECK(completion.usage->completion_tokens == 88);
    CHECK_FALSE(completion.usage->estimated);

    // wire format: messages array with system + user, temperature, seed
    CHECK(seen_auth == "Bearer test-key");
    CHECK(seen_payload.at("model") == "mock-model");
    REQUIRE(seen_payload.at("messages").size() == 2);
    CHECK(seen_payload.at("messages")[0].at("role") == "system");
    CHECK(seen_payload.at("messages")[1].at("role") == "user");
    CHECK(seen_payload.at("messages")[1].at("content") == "What is 2+2?");
    CHECK(seen_payload.at("temperature") == 0.0);
    CHECK(seen_payload.at("seed") == 7);
    CHECK_FALSE(seen_payload.contains("logprobs"));
}

TEST_CASE("http backend requests and parses logprobs") {
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        const json payload = json::parse(req.body);
        REQUIRE(payload.at("logprobs") == true);
        res.set_content(
            json{{"choices",
                  json::array(
                      {json{{"message", {{"role", "assistant"}, {"content", "ok"}}},
                            {"logprobs",
                             {{"content", json::array({json{{"token", "ok"}, {"logprob", -0.25}},
                                                       json{{"token", "!"}, {"logprob", -0.5}}})}}}}})}}
                .dump(),
            "application/json");
    });
    HttpBackend backend(server.config());
    PromptRequest request = simple_request();
    request.want_logprobs = true;
    const Completion completion = backend.complete(request);
    REQUIRE(completion.token_logprobs.has_value());
    CHECK(completion.token_logprobs->size() == 2);
    CHECK(completion.logprob_sum() == doctest::Approx(-0.75));
}

TEST_CASE("transient failures retry with backoff, then succeed") {
    std::atomic<int> hits{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        if (hits.fetch_add(1) == 0) {
            res.status = 500;
            res.set_content("busy", "text/plain");
            return;
        }
        res.set_content(
            json{{"choices", json::array({json{{"message", {{"role", "assistant"},
                                                             {"content", "recovered"}}}}})}}
                .dump(),
            "application/json");
    });
    HttpBackend backend(server.config());
    const Completion completion = backend.complete(simple_request());
    CHECK(completion.text == "recovered");
    CHECK(hits.load() == 2);
    // no usage reported: caller falls back to the estimate
    const TokenUsage usage = usage_or_estimate(simple_request(), completion);
    CHECK(usage.estimated);
}

TEST_CASE("auth failures never retry") {
    std::atomic<int> hits{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        hits.fetch_add(1);
        res.status = 401;
        res.set_content("nope", "text/plain");
    });
    HttpBackend backend(server.config());
    try {
        backend.complete(simple_request());
        FAIL("expected auth_failed");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::auth_failed);
    }
    CHECK(hits.load() == 1);
}

TEST_CASE("4xx protocol failures surface as malformed_response without retry") {
    std::atomic<int> hits{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        hits.fetch_add(1);
        res.status = 404;
        res.set_content("no such model", "text/plain");
    });
    HttpBackend backend(server.config());
    try {
        backend.complete(simple_request());
        FAIL("expected malformed_response");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::malformed_response);
    }
    CHECK(hits.load() == 1);
}

TEST_CASE("malformed bodies raise malformed_response") {
    SUBCASE("not json") {
        MockServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content("plain text", "text/plain");
        });
        HttpBackend backend(server.config());
        CHECK_THROWS_AS(backend.complete(simple_request()), Error);
    }
    SUBCASE("no choices") {
        MockServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"choices": []})", "application/json");
        });
        HttpBackend backend(server.config());
        try {
            backend.complete(simple_request());
            FAIL("expected malformed_response");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_response);
        }
    }
}

TEST_CASE("a whole eval campaign runs over the http backend") {
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
        const json payload = json::parse(req.body);
        const std::string content = payload.at("messages").back().at("content").get<std::string>();
        const char* answer = content.find("alpha") != std::string::npos ? "3" : "7";
        res.set_content(
            json{{"choices",
                  json::array({json{{"message",
                                     {{"role", "assistant"},
                                      {"content", std::string("<answer>") + answer + "</answer>"}}}}})},
                 {"usage", {{"prompt_tokens", 100}, {"completion_tokens", 20}}}}
                .dump(),
            "application/json");
    });
    auto backend = std::make_shared<HttpBackend>(server.config());

    Problem alpha;
    alpha.id = "alpha";
    alpha.text = "alpha: what is 1+2?";
    alpha.ground_truth = Answer::make_numeric(Decimal::of("3"));
    Problem beta;
    beta.id = "beta";
    beta.text = "beta: what is 3+4?";
    beta.ground_truth = Answer::make_numeric(Decimal::of("7"));

    const harness::EvalReport report =
        harness::run_eval({alpha, beta}, HarnessMode::cot(), EngineConfig{}, backend);
    CHECK(report.metrics.accuracy == doctest::Approx(1.0));
    CHECK(report.metrics.total_calls == 2);
    CHECK(report.metrics.total_usage.prompt_tokens == 200);
    CHECK(report.metrics.total_usage.completion_tokens == 40);
    CHECK_FALSE(report.metrics.total_usage.estimated);
}

TEST_CASE("exhausted transport reports transport_exhausted") {
    HttpBackendConfig config;
    config.base_url = "http://127.0.0.1:1"; // nothing listens there
    config.model = "mock";
    config.max_retries = 1;
    config.sleep_on_retry = false;
    config.timeout_seconds = 1;
    HttpBackend backend(config);
    try {
        backend.complete(simple_request());
        FAIL("expected transport_exhausted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::transport_exhausted);
    }
}

TEST_CASE("endpoint urls are validated") {
    HttpBackendConfig config;
    config.base_url = "ftp://example.com";
    CHECK_THROWS_AS(HttpBackend{config}, Error);
    config.base_url = "http://";
    CHECK_THROWS_AS(HttpBackend{config}, Error);
}
