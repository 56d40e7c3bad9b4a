// SPDX-License-Identifier: Apache-2.0
#include "clot/backend.hpp"
#include "clot/error.hpp"
#include "clot/scripted_backend.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace clot;

TEST_CASE("estimate_tokens is ceil(bytes/4)") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("12345678") == 2);
    CHECK(estimate_tokens("1234567890") == 3);
    CHECK(estimate_tokens("a") == 1);
}

TEST_CASE("scripted backend echoes the keyed response") {
    ScriptedBackend backend({{PromptTag::forward, ScriptKeyMode::contains, "2+2",
                              {"<answer>4</answer>"}, std::nullopt, {}}});
    PromptRequest request;
    request.user = "What is 2+2?\nLet's think step by step.";
    request.tag = PromptTag::forward;
    const Completion completion = backend.complete(request);
    CHECK(completion.text.find("<answer>4</answer>") != std::string::npos);
}

TEST_CASE("scripted backend misses raise script_miss") {
    ScriptedBackend backend;
    PromptRequest request;
    request.user = "unregistered";
    request.tag = PromptTag::forward;
    try {
        backend.complete(request);
        FAIL("expected script_miss");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::script_miss);
    }
}

TEST_CASE("tag must match, not only the key") {
    ScriptedBackend backend({{PromptTag::mask, ScriptKeyMode::contains, "2+2",
                              {"masked"}, std::nullopt, {}}});
    PromptRequest request;
    request.user = "2+2";
    request.tag = PromptTag::forward;
    CHECK_THROWS_AS(backend.complete(request), Error);
}

TEST_CASE("scripted sequences model retries deterministically") {
    ScriptedBackend backend({{PromptTag::forward, ScriptKeyMode::contains, "q",
                              {"first", "second"}, std::nullopt, {}}});
    PromptRequest request;
    request.user = "q";
    request.tag = PromptTag::forward;
    CHECK(backend.complete(request).text == "first");
    CHECK(backend.complete(request).text == "second");
    CHECK(backend.complete(request).text == "second"); // last entry repeats
}

TEST_CASE("normalized matching collapses whitespace") {
    ScriptedBackend backend({{PromptTag::forward, ScriptKeyMode::normalized,
                              "solve  this\nproblem", {"ok"}, std::nullopt, {}}});
    PromptRequest request;
    request.user = "solve this problem";
    request.tag = PromptTag::forward;
    CHECK(backend.complete(request).text == "ok");
}

TEST_CASE("exact mode needs byte equality and outranks contains") {
    ScriptedBackend backend({
        {PromptTag::forward, ScriptKeyMode::contains, "prompt", {"loose"}, std::nullopt, {}},
        {PromptTag::forward, ScriptKeyMode::exact, "the full prompt", {"strict"}, std::nullopt, {}},
    });
    PromptRequest request;
    request.user = "the full prompt";
    request.tag = PromptTag::forward;
    CHECK(backend.complete(request).text == "strict");
    request.user = "the full prompt plus suffix";
    CHECK(backend.complete(request).text == "loose");
}

TEST_CASE("longest contains key wins") {
    ScriptedBackend backend({
        {PromptTag::forward, ScriptKeyMode::contains, "glasses", {"generic"}, std::nullopt, {}},
        {PromptTag::forward, ScriptKeyMode::contains, "16 glasses", {"specific"}, std::nullopt, {}},
    });
    PromptRequest request;
    request.user = "Kylar wants to buy 16 glasses.";
    request.tag = PromptTag::forward;
    CHECK(backend.complete(request).text == "specific");
}

TEST_CASE("two identical scripted runs produce identical sequences") {
    auto make = [] {
        return ScriptedBackend({{PromptTag::forward, ScriptKeyMode::contains, "q",
                                 {"a", "b", "c"}, std::nullopt, {}}});
    };
    ScriptedBackend first = make();
    ScriptedBackend second = make();
    PromptRequest request;
    request.user = "q";
    request.tag = PromptTag::forward;
    for (int i = 0; i < 5; ++i) {
        CHECK(first.complete(request).text == second.complete(request).text);
    }
}

TEST_CASE("script json round-trip") {
    auto entries = clot::testing::kylar_recovery_script();
    entries[0].usage = TokenUsage{25, 10, false};
    entries[1].logprobs = {{{"a", -0.5}, {"b", -1.5}}, {{"c", -2.0}}};
    const json serialized = ScriptedBackend::to_json(entries);
    ScriptedBackend backend = ScriptedBackend::from_json(serialized);
    CHECK(ScriptedBackend::to_json(backend.entries()).dump() == serialized.dump());

    PromptRequest request;
    request.user = "Kylar went to the store";
    request.tag = PromptTag::mask;
    const Completion completion = backend.complete(request);
    REQUIRE(completion.token_logprobs.has_value());
    CHECK(completion.logprob_sum() == doctest::Approx(-2.0));
}

TEST_CASE("usage accumulates across scripted calls") {
    ScriptedBackend backend({{PromptTag::forward, ScriptKeyMode::contains, "q",
                              {"r"}, TokenUsage{25, 10, false}, {}}});
    PromptRequest request;
    request.user = "q";
    request.tag = PromptTag::forward;
    TokenUsage total;
    for (int i = 0; i < 4; ++i) {
        const Completion completion = backend.complete(request);
        REQUIRE(completion.usage.has_value());
        total = usage_add(total, *completion.usage);
    }
    CHECK(total.prompt_tokens == 100);
    CHECK(total.completion_tokens == 40);
    CHECK_FALSE(total.estimated);
}

TEST_CASE("usage_or_estimate falls back to the byte heuristic") {
    PromptRequest request;
    request.user = std::string(8, 'x');
    request.system = std::string(4, 's');
    Completion completion;
    completion.text = std::string(10, 'y');
    const TokenUsage usage = usage_or_estimate(request, completion);
    CHECK(usage.prompt_tokens == 3); // 2 user + 1 system
    CHECK(usage.completion_tokens == 3);
    CHECK(usage.estimated);

    completion.usage = TokenUsage{120, 88, false};
    const TokenUsage reported = usage_or_estimate(request, completion);
    CHECK(reported == TokenUsage{120, 88, false});
}

TEST_CASE("recording backend keeps one entry per completion") {
    auto inner = clot::testing::scripted(clot::testing::kylar_success_script());
    RecordingBackend recorder(inner);
    PromptRequest request;
    request.user = clot::testing::kKylarText;
    request.tag = PromptTag::forward;
    recorder.complete(request);
    recorder.complete(request);
    CHECK(recorder.call_count() == 2);
    CHECK(recorder.count_tag(PromptTag::forward) == 2);
    CHECK(recorder.count_tag(PromptTag::mask) == 0);

    PromptRequest miss;
    miss.user = "nothing scripted";
    miss.tag = PromptTag::decompose;
    CHECK_THROWS_AS(recorder.complete(miss), Error);
    CHECK(recorder.call_count() == 2); // failures are not completions
}
