// SPDX-License-Identifier: Apache-2.0
#include "clot/engine.hpp"

#include "clot/error.hpp"
#include "clot/harness.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace clot;
using namespace clot::engine;
using clot::testing::kylar_problem;
using clot::testing::scripted;

namespace {

VerificationRecord record_with(VerificationVerdict verdict,
                               std::optional<double> logprob = std::nullopt) {
    VerificationRecord r;
    r.target_layer = 3;
    r.target_step = 1;
    r.original_value = Answer::make_numeric(Decimal::of("5"));
    if (verdict == VerificationVerdict::pass) {
        r.reconstructed_value = r.original_value;
    } else if (verdict == VerificationVerdict::fail) {
        r.reconstructed_value = Answer::make_numeric(Decimal::of("10"));
    }
    r.verdict = verdict;
    r.backward_logprob = logprob;
    return r;
}

} // namespace

TEST_CASE("layer_consistency under all_steps_pass") {
    const TauPolicy policy;
    const LayerVerdict both = layer_consistency(
        {record_with(VerificationVerdict::pass), record_with(VerificationVerdict::pass)}, policy);
    CHECK(both.verified());
    CHECK(both.passed_steps == 2);
    CHECK(both.total_steps == 2);

    const LayerVerdict mixed = layer_consistency(
        {record_with(VerificationVerdict::pass), record_with(VerificationVerdict::fail)}, policy);
    CHECK_FALSE(mixed.verified());
    CHECK(mixed.passed_steps == 1);

    const LayerVerdict inconclusive =
        layer_consistency({record_with(VerificationVerdict::inconclusive)}, policy);
    CHECK_FALSE(inconclusive.verified());
    CHECK(inconclusive.passed_steps == 0);
    CHECK(inconclusive.total_steps == 1);

    CHECK_THROWS_AS(layer_consistency({}, policy), Error);
}

TEST_CASE("layer_consistency under logprob threshold") {
    TauPolicy policy{TauPolicyKind::logprob_threshold, -5.0};
    const LayerVerdict good = layer_consistency(
        {record_with(VerificationVerdict::pass, -1.0), record_with(VerificationVerdict::pass, -2.0)},
        policy);
    CHECK(good.verified());
    CHECK(good.logprob_sum == doctest::Approx(-3.0));

    policy.tau = -2.0;
    const LayerVerdict bad = layer_consistency(
        {record_with(VerificationVerdict::pass, -1.0), record_with(VerificationVerdict::pass, -2.0)},
        policy);
    CHECK_FALSE(bad.verified());

    try {
        layer_consistency({record_with(VerificationVerdict::pass)}, policy);
        FAIL("expected missing_logprobs");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::missing_logprobs);
    }
}

TEST_CASE("prune_decision") {
    LayerVerdict verified;
    verified.value = LayerGate::verified;
    LayerVerdict failed;
    failed.value = LayerGate::failed;
    CHECK(prune_decision(verified, 3).action == PruneActionKind::prune_below);
    CHECK(prune_decision(failed, 3).action == PruneActionKind::descend);
    CHECK(prune_decision(failed, 1).action == PruneActionKind::halt_at_bottom);
}

TEST_CASE("worked example: verification passes on the first cycle") {
    auto inner = scripted(clot::testing::kylar_success_script());
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config;

    const ReasoningTrace trace = engine.solve(kylar_problem(), config);

    REQUIRE(trace.final_answer.has_value());
    CHECK(trace.final_answer->numeric_value->str() == "64");
    CHECK(trace.verified_final);
    CHECK(trace.call_count == 3);
    REQUIRE(trace.calls.size() == 3);
    CHECK(trace.calls[0].tag == PromptTag::forward);
    CHECK(trace.calls[1].tag == PromptTag::mask);
    CHECK(trace.calls[2].tag == PromptTag::backward_solve);
    CHECK(recorder->count_tag(PromptTag::decompose) == 0);
    CHECK(recorder->count_tag(PromptTag::resolve) == 0);

    // every call stayed at the top layer
    for (const auto& call : trace.calls) CHECK(call.layer_index == config.max_layers);

    CHECK(trace.visited_layer_count() == 1);
    REQUIRE(trace.layers.size() == 3);
    CHECK(trace.layers[0].layer_index == 3);
    CHECK(trace.layers[0].layer_verdict == TraceLayerVerdict::verified);
    CHECK(trace.layers[1].layer_verdict == TraceLayerVerdict::pruned);
    CHECK(trace.layers[2].layer_verdict == TraceLayerVerdict::pruned);

    REQUIRE(trace.layers[0].verifications.size() == 1);
    const auto& record = trace.layers[0].verifications[0];
    CHECK(record.verdict == VerificationVerdict::pass);
    CHECK(record.attempts == 1);
    CHECK(record.original_value.numeric_value->str() == "5");
    CHECK(record.reconstructed_value->numeric_value->str() == "5");
    CHECK(record.masked_question.find("One glass costs X") != std::string::npos);

    CHECK(validate_trace(trace, config.max_layers).empty());
}

TEST_CASE("worked example: failed verification, decomposition, recovery") {
    auto inner = scripted(clot::testing::kylar_recovery_script());
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config;

    const ReasoningTrace trace = engine.solve(kylar_problem(), config);

    // the wrong first answer is preserved in the first top-layer state
    const LayerRecord& top = trace.layers.front();
    REQUIRE(top.states.size() == 2);
    CHECK(top.states[0].answer->numeric_value->str() == "96");
    CHECK(top.states[1].answer->numeric_value->str() == "64");

    REQUIRE(top.verifications.size() == 2);
    CHECK(top.verifications[0].verdict == VerificationVerdict::fail);
    CHECK(top.verifications[0].reconstructed_value->numeric_value->str() == "10");
    CHECK(top.verifications[1].verdict == VerificationVerdict::pass);

    REQUIRE(trace.final_answer.has_value());
    CHECK(trace.final_answer->numeric_value->str() == "64");
    CHECK(trace.verified_final);
    CHECK(recorder->count_tag(PromptTag::decompose) == 1);
    CHECK(trace.visited_layer_count() == 2);

    const LayerRecord* subs = trace.layer(config.max_layers - 1);
    REQUIRE(subs != nullptr);
    CHECK(subs->layer_verdict == TraceLayerVerdict::verified);
    CHECK(subs->states.size() == 2);
    CHECK(subs->verifications.size() == 2);

    CHECK(trace.call_count == 13);
    CHECK(validate_trace(trace, config.max_layers).empty());
}

TEST_CASE("empty script: inconclusive top verification, unverified trace") {
    const Engine engine(scripted({}));
    EngineConfig config;
    const ReasoningTrace trace = engine.solve(kylar_problem(), config);
    CHECK_FALSE(trace.verified_final);
    CHECK_FALSE(trace.final_answer.has_value());
    CHECK(trace.call_count == 0);
    REQUIRE_FALSE(trace.layers.empty());
    REQUIRE(trace.layers.front().verifications.size() == 1);
    CHECK(trace.layers.front().verifications[0].verdict == VerificationVerdict::inconclusive);
    CHECK(trace.layers.front().layer_verdict == TraceLayerVerdict::failed);
    CHECK(validate_trace(trace, config.max_layers).empty());
}

TEST_CASE("backward_verify alone") {
    EngineConfig config;
    SUBCASE("matching reconstruction passes") {
        const Engine engine(scripted(clot::testing::kylar_success_script()));
        const VerificationRecord record = engine.backward_verify(
            kylar_problem(), Answer::make_numeric(Decimal::of("64")), config);
        CHECK(record.verdict == VerificationVerdict::pass);
        CHECK(record.attempts == 1);
    }
    SUBCASE("mismatched reconstruction fails") {
        const Engine engine(scripted(clot::testing::kylar_recovery_script()));
        const VerificationRecord record = engine.backward_verify(
            kylar_problem(), Answer::make_numeric(Decimal::of("96")), config);
        CHECK(record.verdict == VerificationVerdict::fail);
        CHECK(record.reconstructed_value->numeric_value->str() == "10");
        CHECK(record.original_value.numeric_value->str() == "5");
    }
    SUBCASE("mask output without X exhausts the retry budget") {
        auto backend = scripted({{PromptTag::mask, ScriptKeyMode::contains, "Kylar",
                                  {"no slot here at all", "still no slot"}, std::nullopt, {}}});
        const Engine engine(backend);
        const VerificationRecord record = engine.backward_verify(
            kylar_problem(), Answer::make_numeric(Decimal::of("64")), config);
        CHECK(record.verdict == VerificationVerdict::inconclusive);
        CHECK(record.attempts == 2); // 1 + default retry budget
        CHECK_FALSE(record.reconstructed_value.has_value());
    }
    SUBCASE("missing answer tag triggers one reminded re-ask") {
        auto inner = scripted({
            {PromptTag::mask, ScriptKeyMode::contains, "Kylar", {clot::testing::kylar_masked("64")},
             std::nullopt, {}},
            {PromptTag::backward_solve, ScriptKeyMode::contains, "pay $64 for them",
             {"the value is five", "second try: <answer>5</answer>"}, std::nullopt, {}},
        });
        auto recorder = std::make_shared<RecordingBackend>(inner);
        const Engine engine(recorder);
        const VerificationRecord record = engine.backward_verify(
            kylar_problem(), Answer::make_numeric(Decimal::of("64")), config);
        CHECK(record.verdict == VerificationVerdict::pass);
        CHECK(record.attempts == 2);
        CHECK(recorder->count_tag(PromptTag::mask) == 1); // the parsed mask is reused
        CHECK(recorder->count_tag(PromptTag::backward_solve) == 2);
        const auto log = recorder->recorded();
        CHECK(log.back().first.user.find("enclose the final answer") != std::string::npos);
    }
}

TEST_CASE("rhmc score") {
    SUBCASE("all-zero logprobs sum to zero") {
        ReasoningTrace trace;
        for (int i = 0; i < 3; ++i) {
            CallRecord call;
            call.tag = PromptTag::forward;
            call.logprob_sum = 0.0;
            trace.calls.push_back(call);
        }
        CHECK(rhmc_score(trace) == doctest::Approx(0.0));
    }
    SUBCASE("two steps of forward and backward sums") {
        ReasoningTrace trace;
        const std::vector<std::pair<PromptTag, double>> calls = {
            {PromptTag::forward, -1.0},
            {PromptTag::forward, -2.0},
            {PromptTag::backward_solve, -3.0},
            {PromptTag::backward_solve, -4.0},
        };
        for (const auto& [tag, sum] : calls) {
            CallRecord call;
            call.tag = tag;
            call.logprob_sum = sum;
            trace.calls.push_back(call);
        }
        CHECK(rhmc_score(trace) == doctest::Approx(-10.0));
    }
    SUBCASE("mask and judge calls do not contribute") {
        ReasoningTrace trace;
        CallRecord scored;
        scored.tag = PromptTag::resolve;
        scored.logprob_sum = -2.5;
        trace.calls.push_back(scored);
        CallRecord unscored;
        unscored.tag = PromptTag::mask; // no logprobs, ignored
        trace.calls.push_back(unscored);
        CHECK(rhmc_score(trace) == doctest::Approx(-2.5));
    }
    SUBCASE("missing logprobs raise") {
        ReasoningTrace trace;
        CallRecord call;
        call.tag = PromptTag::forward;
        trace.calls.push_back(call);
        CHECK_THROWS_AS(rhmc_score(trace), Error);
    }
    SUBCASE("scripted logprob fixtures match an independent sum") {
        auto entries = clot::testing::kylar_success_script();
        entries[0].logprobs = {{{"a", -0.25}, {"b", -0.5}}};  // forward: -0.75
        entries[1].logprobs = {{{"m", -9.0}}};                // mask: excluded from the score
        entries[2].logprobs = {{{"c", -1.0}, {"d", -0.125}}}; // backward: -1.125
        const Engine engine(scripted(entries));
        EngineConfig config;
        config.score_mode = ScoreMode::logprob;
        const ReasoningTrace trace = engine.solve(kylar_problem(), config);
        REQUIRE(trace.rhmc_score.has_value());

        // oracle: hand-sum the fixture logprobs for forward + backward calls
        double expected = 0.0;
        for (const auto& token : entries[0].logprobs[0]) expected += token.logprob;
        for (const auto& token : entries[2].logprobs[0]) expected += token.logprob;
        CHECK(*trace.rhmc_score == doctest::Approx(expected));
        CHECK(*trace.rhmc_score == doctest::Approx(-1.875));
    }
    SUBCASE("score mode degrades when the backend has no logprobs") {
        const Engine engine(scripted(clot::testing::kylar_success_script()));
        EngineConfig config;
        config.score_mode = ScoreMode::logprob;
        const ReasoningTrace trace = engine.solve(kylar_problem(), config);
        CHECK(trace.verified_final);
        CHECK_FALSE(trace.rhmc_score.has_value());
    }
}

TEST_CASE("logprob gate: threshold decides the top layer") {
    auto entries = clot::testing::kylar_success_script();
    entries[2].logprobs = {{{"c", -1.0}}};
    EngineConfig config;
    config.score_mode = ScoreMode::logprob;

    config.tau_policy = {TauPolicyKind::logprob_threshold, -2.0};
    const Engine engine(scripted(entries));
    ReasoningTrace trace = engine.solve(kylar_problem(), config);
    CHECK(trace.verified_final); // -1 > -2

    config.tau_policy = {TauPolicyKind::logprob_threshold, -0.5};
    const Engine strict_engine(scripted(clot::testing::kylar_recovery_script()));
    // recovery script has no logprobs: the gate cannot run, treated as failure path
    // (records lack logprobs, so layer_consistency raises; ensure solve surfaces it)
    CHECK_THROWS_AS(strict_engine.solve(kylar_problem(), config), Error);
}

TEST_CASE("logprob gate treats backend-failure records as failed, not fatal") {
    // the mask never parses, so the verification record is inconclusive and
    // carries no logprobs; the layer gates as failed instead of erroring
    auto backend = scripted({
        {PromptTag::forward, ScriptKeyMode::contains, "Kylar",
         {"<answer>64</answer>"}, std::nullopt, {{{"t", -0.5}}}},
        {PromptTag::mask, ScriptKeyMode::contains, "Kylar",
         {"no slot in this output", "still no slot"}, std::nullopt, {}},
    });
    const Engine engine(backend);
    EngineConfig config;
    config.max_layers = 1;
    config.score_mode = ScoreMode::logprob;
    config.tau_policy = {TauPolicyKind::logprob_threshold, -10.0};

    const ReasoningTrace trace = engine.solve(kylar_problem(), config);
    CHECK_FALSE(trace.verified_final);
    REQUIRE(trace.final_answer.has_value());
    CHECK(trace.final_answer->numeric_value->str() == "64");
    CHECK(trace.layers.front().layer_verdict == TraceLayerVerdict::failed);
    CHECK(trace.layers.front().verifications.front().verdict ==
          VerificationVerdict::inconclusive);
}

TEST_CASE("pruning soundness: verified top layer leaves lower layers untouched") {
    const harness::SynthResult synth = harness::synth_generate(11, 5, 0.0);
    auto inner = scripted(synth.script);
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config;
    for (const auto& problem : synth.problems) {
        const ReasoningTrace trace = engine.solve(problem, config);
        CHECK(trace.verified_final);
        for (const auto& call : trace.calls) CHECK(call.layer_index == config.max_layers);
    }
    CHECK(recorder->count_tag(PromptTag::decompose) == 0);
}

TEST_CASE("mandatory descent: failed top verification always decomposes") {
    const harness::SynthResult synth = harness::synth_generate(12, 6, 1.0);
    auto inner = scripted(synth.script);
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config;
    for (const auto& problem : synth.problems) {
        const ReasoningTrace trace = engine.solve(problem, config);
        CHECK(trace.visited_layer_count() >= 2);
        CHECK(trace.verified_final); // recovered through the descent
    }
    CHECK(recorder->count_tag(PromptTag::decompose) == static_cast<int>(synth.problems.size()));
}

TEST_CASE("call budget bound holds across random configs") {
    struct Mix {
        std::uint64_t state;
        std::uint64_t next() {
            std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        }
    } rng{2024};
    for (int i = 0; i < 60; ++i) {
        EngineConfig config;
        config.max_layers = 1 + static_cast<int>(rng.next() % 5);
        config.verify_retry_budget = static_cast<int>(rng.next() % 3);
        config.decompose_retry_budget = static_cast<int>(rng.next() % 3);
        config.subproblem_cap = 1 + static_cast<int>(rng.next() % 8);
        config.reverify_final = rng.next() % 2 == 0;
        const double error_rate = (rng.next() % 3) / 2.0;
        const harness::SynthResult synth =
            harness::synth_generate(rng.next(), 2, error_rate);
        const Engine engine(scripted(synth.script));
        for (const auto& problem : synth.problems) {
            const ReasoningTrace trace = engine.solve(problem, config);
            CHECK(static_cast<std::int64_t>(trace.call_count) <= call_budget_bound(config));
            CHECK(validate_trace(trace, config.max_layers).empty());
        }
    }
}

TEST_CASE("layer indices stay inside [1, max_layers]") {
    const harness::SynthResult synth = harness::synth_generate(31, 4, 1.0);
    const Engine engine(scripted(synth.script));
    for (int max_layers : {1, 2, 3}) {
        EngineConfig config;
        config.max_layers = max_layers;
        for (const auto& problem : synth.problems) {
            const ReasoningTrace trace = engine.solve(problem, config);
            for (const auto& layer : trace.layers) {
                CHECK(layer.layer_index >= 1);
                CHECK(layer.layer_index <= max_layers);
                for (const auto& state : layer.states) {
                    CHECK(state.layer_index == layer.layer_index);
                }
            }
        }
    }
}

TEST_CASE("exhausted decomposition returns the last forward answer, unverified") {
    std::vector<ScriptEntry> script = clot::testing::kylar_recovery_script();
    // replace the decomposition with prose that never parses
    for (auto& entry : script) {
        if (entry.tag == PromptTag::decompose) {
            entry.responses = {"I would rather talk about glasses in general."};
        }
    }
    auto inner = scripted(script);
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config;

    const ReasoningTrace trace = engine.solve(kylar_problem(), config);
    REQUIRE(trace.final_answer.has_value());
    CHECK(trace.final_answer->numeric_value->str() == "96");
    CHECK_FALSE(trace.verified_final);
    // initial ask + retries per the decompose budget
    CHECK(recorder->count_tag(PromptTag::decompose) == 1 + config.decompose_retry_budget);
    CHECK(trace.layers.front().layer_verdict == TraceLayerVerdict::failed);
    CHECK(validate_trace(trace, config.max_layers).empty());
}

TEST_CASE("a sibling failure that cannot be drilled leaves the layer unverified") {
    // sub2's verification fails and the layer below is the bottom, so there
    // is nowhere left to descend: the solve ends on the original answer
    std::vector<ScriptEntry> script = clot::testing::kylar_recovery_script();
    for (auto& entry : script) {
        if (entry.tag == PromptTag::backward_solve && entry.key == "they cost $24 in total") {
            entry.responses = {"24 over 8 glasses... <answer>99</answer>"}; // wrong on purpose
        }
    }
    auto inner = scripted(script);
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config;
    config.max_layers = 2;

    const ReasoningTrace trace = engine.solve(kylar_problem(), config);
    REQUIRE(trace.final_answer.has_value());
    CHECK(trace.final_answer->numeric_value->str() == "96");
    CHECK_FALSE(trace.verified_final);
    CHECK(recorder->count_tag(PromptTag::resolve) == 0); // layer never verified
    const LayerRecord* subs = trace.layer(1);
    REQUIRE(subs != nullptr);
    CHECK(subs->layer_verdict == TraceLayerVerdict::failed);
    CHECK(validate_trace(trace, config.max_layers).empty());
}

TEST_CASE("choice problems verify through entity masking") {
    Problem problem;
    problem.id = "ink";
    problem.text = "What do people use to absorb extra ink from a fountain pen?";
    problem.answer_kind = AnswerKind::multiple_choice;
    problem.choices = {{"A", "shirt pocket"}, {"B", "calligrapher's hand"}, {"C", "blotter"}};

    auto entry = [](PromptTag tag, const std::string& key, std::vector<std::string> responses) {
        return ScriptEntry{tag, ScriptKeyMode::contains, key, std::move(responses), std::nullopt, {}};
    };
    SUBCASE("identity reconstruction passes with no judge call") {
        auto inner = scripted({
            entry(PromptTag::forward, "absorb extra ink", {"<answer>C</answer>"}),
            entry(PromptTag::mask, "absorb extra ink",
                  {"What do people use to absorb extra ink from a X? Knowing that the answer is "
                   "blotter."}),
            entry(PromptTag::backward_solve, "the answer is blotter",
                  {"<answer>fountain pen</answer>"}),
        });
        auto recorder = std::make_shared<RecordingBackend>(inner);
        const Engine engine(recorder);
        const ReasoningTrace trace = engine.solve(problem, EngineConfig{});
        CHECK(trace.verified_final);
        REQUIRE(trace.final_answer.has_value());
        CHECK(trace.final_answer->choice_label == "C");
        CHECK(recorder->count_tag(PromptTag::semantic_judge) == 0);
        const auto& record = trace.layers.front().verifications.front();
        CHECK(record.original_value.kind == AnswerKind::free_text);
        CHECK(record.original_value.text_value == "fountain pen");
    }
    SUBCASE("near-synonym reconstruction goes through the semantic judge") {
        auto inner = scripted({
            entry(PromptTag::forward, "absorb extra ink", {"<answer>C</answer>"}),
            entry(PromptTag::mask, "absorb extra ink",
                  {"What do people use to absorb extra ink from a X? Knowing that the answer is "
                   "blotter."}),
            entry(PromptTag::backward_solve, "the answer is blotter",
                  {"<answer>ink pen</answer>"}),
            entry(PromptTag::semantic_judge, "ink pen", {"yes"}),
        });
        auto recorder = std::make_shared<RecordingBackend>(inner);
        const Engine engine(recorder);
        const ReasoningTrace trace = engine.solve(problem, EngineConfig{});
        CHECK(trace.verified_final);
        CHECK(recorder->count_tag(PromptTag::semantic_judge) == 1);
    }
}

TEST_CASE("identical inputs produce byte-identical canonical traces") {
    EngineConfig config;
    auto solve_once = [&] {
        const Engine engine(scripted(clot::testing::kylar_recovery_script()));
        return trace_to_json(engine.solve(kylar_problem(), config)).dump();
    };
    CHECK(solve_once() == solve_once());
}

TEST_CASE("invalid config is rejected before any call") {
    auto inner = scripted(clot::testing::kylar_success_script());
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config;
    config.max_layers = 0;
    CHECK_THROWS_AS(engine.solve(kylar_problem(), config), Error);
    CHECK(recorder->call_count() == 0);

    Problem invalid;
    invalid.id = "bad";
    invalid.text = "";
    CHECK_THROWS_AS(engine.solve(invalid, EngineConfig{}), Error);
    CHECK(recorder->call_count() == 0);
}

TEST_CASE("three-layer drill: a failing sub-problem descends again and recovers") {
    const std::string p_text =
        "Paula has 7 crates with 3 widgets each plus 5 spare widgets. How many widgets does "
        "Paula have?";
    const std::string sub_a = "SubA: how many widgets are in Paula's 7 crates with 3 widgets each?";
    const std::string sub_b = "SubB: what is the crate total 21 plus the 5 spare widgets?";
    const std::string sub_a1 = "SubA1: what is 7 times 3?";
    auto entry = [](PromptTag tag, const std::string& key, std::vector<std::string> responses) {
        return ScriptEntry{tag, ScriptKeyMode::contains, key, std::move(responses), std::nullopt, {}};
    };
    std::vector<ScriptEntry> script = {
        entry(PromptTag::forward, "Paula has 7 crates", {"<answer>99</answer>"}),
        entry(PromptTag::mask, "Paula has 7 crates",
              {"Paula has 7 crates with 3 widgets each plus X spare widgets. Knowing that Paula "
               "has 99 widgets. What is X?",
               "Paula has 7 crates with 3 widgets each plus X spare widgets. Knowing that Paula "
               "has 26 widgets. What is X?"}),
        entry(PromptTag::backward_solve, "99 widgets", {"<answer>78</answer>"}),
        entry(PromptTag::backward_solve, "26 widgets", {"<answer>5</answer>"}),
        entry(PromptTag::decompose, "Paula has 7 crates", {"q1: " + sub_a + "\nq2: " + sub_b}),
        entry(PromptTag::forward, "SubA", {"<answer>40</answer>"}),
        entry(PromptTag::mask, "SubA",
              {"SubA: how many widgets are in Paula's 7 crates with X widgets each? Knowing the "
               "crates hold 40 widgets. What is X?",
               "SubA: how many widgets are in Paula's 7 crates with X widgets each? Knowing the "
               "crates hold 21 widgets. What is X?"}),
        entry(PromptTag::backward_solve, "hold 40 widgets", {"<answer>13</answer>"}),
        entry(PromptTag::backward_solve, "hold 21 widgets", {"<answer>3</answer>"}),
        entry(PromptTag::decompose, "SubA", {"q1: " + sub_a1}),
        entry(PromptTag::forward, "SubA1", {"<answer>21</answer>"}),
        entry(PromptTag::mask, "SubA1",
              {"SubA1: what is X times 3? Knowing the product is 21. What is X?"}),
        entry(PromptTag::backward_solve, "product is 21", {"<answer>7</answer>"}),
        entry(PromptTag::resolve, "SubA", {"<answer>21</answer>"}),
        entry(PromptTag::forward, "SubB", {"<answer>26</answer>"}),
        entry(PromptTag::mask, "SubB",
              {"SubB: what is the crate total 21 plus the X spare widgets? Knowing the total is "
               "26. What is X?"}),
        entry(PromptTag::backward_solve, "total is 26", {"<answer>5</answer>"}),
        entry(PromptTag::resolve, "Paula has 7 crates", {"<answer>26</answer>"}),
    };
    Problem problem;
    problem.id = "paula";
    problem.text = p_text;
    problem.answer_kind = AnswerKind::numeric;

    auto inner = scripted(script);
    auto recorder = std::make_shared<RecordingBackend>(inner);
    const Engine engine(recorder);
    EngineConfig config; // max_layers 3

    const ReasoningTrace trace = engine.solve(problem, config);
    REQUIRE(trace.final_answer.has_value());
    CHECK(trace.final_answer->numeric_value->str() == "26");
    CHECK(trace.verified_final);
    CHECK(trace.visited_layer_count() == 3);
    CHECK(recorder->count_tag(PromptTag::decompose) == 2);
    CHECK(recorder->count_tag(PromptTag::resolve) == 2);
    CHECK(validate_trace(trace, config.max_layers).empty());

    for (int layer : {3, 2, 1}) {
        const LayerRecord* record = trace.layer(layer);
        REQUIRE(record != nullptr);
        CHECK(record->layer_verdict == TraceLayerVerdict::verified);
    }

    // the second decompose targets the failing sub-problem: its prompt cites
    // that sub-problem's own failed answer, not the top-level one
    std::vector<std::string> decompose_prompts;
    for (const auto& [request, completion] : recorder->recorded()) {
        if (request.tag == PromptTag::decompose) decompose_prompts.push_back(request.user);
    }
    REQUIRE(decompose_prompts.size() == 2);
    CHECK(decompose_prompts[0].find("99") != std::string::npos);
    CHECK(decompose_prompts[1].find("SubA") != std::string::npos);
    CHECK(decompose_prompts[1].find("the answer 40") != std::string::npos);
    CHECK(decompose_prompts[1].find("gave 13") != std::string::npos);
    CHECK(decompose_prompts[1].find("the answer 99") == std::string::npos);
}

TEST_CASE("no-pruning mode keeps verifying below a verified layer") {
    const harness::SynthResult synth = harness::synth_generate(21, 3, 0.0);
    EngineConfig config;
    config.max_layers = 2;

    const Engine engine(scripted(synth.script));
    std::int64_t pruned_calls = 0;
    std::int64_t full_calls = 0;
    for (const auto& problem : synth.problems) {
        const ReasoningTrace pruned = engine.solve(problem, config, HarnessMode::cot_rhmc_hp());
        const ReasoningTrace full = engine.solve(problem, config, HarnessMode::cot_rhmc());
        pruned_calls += pruned.call_count;
        full_calls += full.call_count;
        CHECK(pruned.verified_final);
        CHECK(full.verified_final);
        CHECK(trace_to_json(pruned).at("final_answer").dump() ==
              trace_to_json(full).at("final_answer").dump());
        CHECK(full.visited_layer_count() > pruned.visited_layer_count());
    }
    CHECK(pruned_calls < full_calls);
}
