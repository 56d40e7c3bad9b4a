// SPDX-License-Identifier: Apache-2.0
#include "clot/core.hpp"
#include "clot/error.hpp"

#include <doctest.h>

#include <cstdint>
#include <limits>

using namespace clot;

namespace {

// deterministic generator for property tests
struct Mix {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

} // namespace

TEST_CASE("decimal canonicalization") {
    CHECK(Decimal::of("007").str() == "7");
    CHECK(Decimal::of("5.0").str() == "5");
    CHECK(Decimal::of("5.10").str() == "5.1");
    CHECK(Decimal::of("-0").str() == "0");
    CHECK(Decimal::of("-0.0").str() == "0");
    CHECK(Decimal::of("+12").str() == "12");
    CHECK(Decimal::of(".5").str() == "0.5");
    CHECK(Decimal::of("5.0").is_integer());
    CHECK_FALSE(Decimal::of("5.01").is_integer());
    CHECK_FALSE(Decimal::parse("12a"));
    CHECK_FALSE(Decimal::parse(""));
    CHECK_FALSE(Decimal::parse("-"));
    CHECK(Decimal::of("-3.25").to_double() == doctest::Approx(-3.25));
}

TEST_CASE("usage_add") {
    SUBCASE("identity") {
        const TokenUsage sum = usage_add({10, 5, false}, {0, 0, false});
        CHECK(sum == TokenUsage{10, 5, false});
    }
    SUBCASE("estimated flag is sticky") {
        const TokenUsage sum = usage_add({10, 5, false}, {3, 7, true});
        CHECK(sum == TokenUsage{13, 12, true});
    }
    SUBCASE("overflow raises instead of wrapping") {
        const TokenUsage big{std::numeric_limits<std::int64_t>::max(), 0, false};
        CHECK_THROWS_AS(usage_add(big, {1, 0, false}), Error);
    }
    SUBCASE("associative and commutative") {
        Mix rng{42};
        for (int i = 0; i < 200; ++i) {
            const TokenUsage a{static_cast<std::int64_t>(rng.next() % 100000),
                               static_cast<std::int64_t>(rng.next() % 100000), rng.next() % 2 == 0};
            const TokenUsage b{static_cast<std::int64_t>(rng.next() % 100000),
                               static_cast<std::int64_t>(rng.next() % 100000), rng.next() % 2 == 0};
            const TokenUsage c{static_cast<std::int64_t>(rng.next() % 100000),
                               static_cast<std::int64_t>(rng.next() % 100000), rng.next() % 2 == 0};
            CHECK(usage_add(a, b) == usage_add(b, a));
            CHECK(usage_add(usage_add(a, b), c) == usage_add(a, usage_add(b, c)));
        }
    }
}

TEST_CASE("answer json round-trip") {
    Mix rng{7};
    for (int i = 0; i < 300; ++i) {
        Answer original;
        switch (rng.next() % 3) {
            case 0: {
                std::string digits = std::to_string(rng.next() % 1000000);
                if (rng.next() % 2) digits += "." + std::to_string(1 + rng.next() % 999);
                if (rng.next() % 3 == 0) digits = "-" + digits;
                original = Answer::make_numeric(Decimal::of(digits), digits);
                break;
            }
            case 1:
                original = Answer::make_choice(std::string(1, 'A' + rng.next() % 26));
                break;
            default:
                original = Answer::make_text("value " + std::to_string(rng.next() % 1000));
                break;
        }
        const Answer back = answer_from_json(answer_to_json(original));
        CHECK(back == original);
    }
}

TEST_CASE("problem invariants") {
    Problem p;
    p.id = "p";
    p.text = "";
    CHECK_FALSE(p.violations().empty());
    p.text = "what is 2+2?";
    CHECK(p.valid());

    p.answer_kind = AnswerKind::multiple_choice;
    CHECK_FALSE(p.valid()); // choices required
    p.choices = {{"A", "three"}, {"B", "four"}};
    CHECK(p.valid());
    p.choices.push_back({"A", "dup"});
    CHECK_FALSE(p.valid());
    p.choices = {{"a", "lowercase"}};
    CHECK_FALSE(p.valid());

    Problem numeric_with_choices;
    numeric_with_choices.id = "x";
    numeric_with_choices.text = "t";
    numeric_with_choices.choices = {{"A", "y"}};
    CHECK_FALSE(numeric_with_choices.valid());
}

TEST_CASE("engine config validation and call budget") {
    EngineConfig config;
    CHECK_NOTHROW(config.validate());
    CHECK(call_budget_bound(config) == 4 + 3 * 6 * 5 + 1 * 3); // defaults: L=3 C=6 V=1 D=1

    EngineConfig bad = config;
    bad.max_layers = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.verify_retry_budget = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.subproblem_cap = 0;
    CHECK_THROWS_AS(bad.validate(), Error);

    EngineConfig tiny;
    tiny.max_layers = 1;
    tiny.subproblem_cap = 1;
    tiny.verify_retry_budget = 0;
    tiny.decompose_retry_budget = 0;
    CHECK(call_budget_bound(tiny) == 4 + 1 * 1 * 3);
}

TEST_CASE("engine config json round-trip") {
    EngineConfig config;
    config.max_layers = 4;
    config.tau_policy = {TauPolicyKind::logprob_threshold, -2.5};
    config.score_mode = ScoreMode::logprob;
    config.seed = 99;
    config.reverify_final = false;
    const EngineConfig back = engine_config_from_json(engine_config_to_json(config));
    CHECK(back.max_layers == 4);
    CHECK(back.tau_policy.kind == TauPolicyKind::logprob_threshold);
    CHECK(back.tau_policy.tau == doctest::Approx(-2.5));
    CHECK(back.score_mode == ScoreMode::logprob);
    CHECK(back.seed == 99);
    CHECK_FALSE(back.reverify_final);
}

namespace {

ReasoningTrace small_valid_trace() {
    ReasoningTrace trace;
    trace.problem_id = "p";
    LayerRecord top;
    top.layer_index = 2;
    top.layer_verdict = TraceLayerVerdict::verified;
    LayerState state;
    state.layer_index = 2;
    state.step_index = 1;
    state.question = "q";
    state.derivation = "d";
    state.answer = Answer::make_numeric(Decimal::of("4"));
    top.states.push_back(state);
    VerificationRecord record;
    record.target_layer = 2;
    record.target_step = 1;
    record.masked_question = "masked";
    record.original_value = Answer::make_numeric(Decimal::of("2"));
    record.reconstructed_value = Answer::make_numeric(Decimal::of("2"));
    record.verdict = VerificationVerdict::pass;
    record.attempts = 1;
    top.verifications.push_back(record);
    trace.layers.push_back(top);
    LayerRecord bottom;
    bottom.layer_index = 1;
    bottom.layer_verdict = TraceLayerVerdict::pruned;
    trace.layers.push_back(bottom);
    trace.final_answer = state.answer;
    trace.verified_final = true;
    CallRecord call;
    call.tag = PromptTag::forward;
    call.layer_index = 2;
    call.usage = {10, 5, false};
    trace.calls.push_back(call);
    trace.call_count = 1;
    trace.usage = {10, 5, false};
    return trace;
}

} // namespace

TEST_CASE("trace validator accepts a well-formed trace") {
    CHECK(validate_trace(small_valid_trace(), 2).empty());
}

TEST_CASE("trace validator rejects hand-built violations") {
    SUBCASE("pruned without verified above") {
        ReasoningTrace trace = small_valid_trace();
        trace.layers[0].layer_verdict = TraceLayerVerdict::failed;
        CHECK_FALSE(validate_trace(trace, 2).empty());
    }
    SUBCASE("layer order not descending") {
        ReasoningTrace trace = small_valid_trace();
        std::swap(trace.layers[0], trace.layers[1]);
        CHECK_FALSE(validate_trace(trace, 2).empty());
    }
    SUBCASE("layer above the cap") {
        const ReasoningTrace trace = small_valid_trace();
        CHECK_FALSE(validate_trace(trace, 1).empty());
    }
    SUBCASE("call count out of sync") {
        ReasoningTrace trace = small_valid_trace();
        trace.call_count = 5;
        CHECK_FALSE(validate_trace(trace, 2).empty());
    }
    SUBCASE("usage not additive") {
        ReasoningTrace trace = small_valid_trace();
        trace.usage.prompt_tokens += 1;
        CHECK_FALSE(validate_trace(trace, 2).empty());
    }
    SUBCASE("pass verdict with mismatched values") {
        ReasoningTrace trace = small_valid_trace();
        trace.layers[0].verifications[0].reconstructed_value =
            Answer::make_numeric(Decimal::of("3"));
        CHECK_FALSE(validate_trace(trace, 2).empty());
    }
    SUBCASE("non-sequential steps") {
        ReasoningTrace trace = small_valid_trace();
        trace.layers[0].states[0].step_index = 2;
        CHECK_FALSE(validate_trace(trace, 2).empty());
    }
}

TEST_CASE("trace json round-trip is canonical") {
    const ReasoningTrace trace = small_valid_trace();
    const json serialized = trace_to_json(trace);
    const ReasoningTrace back = trace_from_json(serialized);
    CHECK(trace_to_json(back).dump() == serialized.dump());
    CHECK(back.visited_layer_count() == 1);
    CHECK(back.top_layer_index() == 2);
}

TEST_CASE("harness mode names round-trip") {
    for (const char* name : {"cot", "cot_sv", "cot_hmc", "cot_rhmc", "cot_rhmc_hp", "cot_sc5"}) {
        const auto mode = HarnessMode::from_name(name);
        REQUIRE(mode.has_value());
        CHECK(mode->name() == name);
    }
    CHECK_FALSE(HarnessMode::from_name("bogus").has_value());
    CHECK(HarnessMode::from_name("cot_sc3")->sc_n == 3);
}
