// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/answer.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clot {

using json = nlohmann::ordered_json;

struct Choice {
    std::string label; // single uppercase letter
    std::string text;

    bool operator==(const Choice&) const = default;
};

// A benchmark question. `choices` is present iff the kind is multiple_choice.
struct Problem {
    std::string id;
    std::string text;
    AnswerKind answer_kind = AnswerKind::numeric;
    std::vector<Choice> choices;
    std::optional<Answer> ground_truth;

    // Non-empty text, choices/kind agreement, unique uppercase labels.
    std::vector<std::string> violations() const;
    bool valid() const { return violations().empty(); }
};

// One forward reasoning state: question q at (layer, step) with the model's
// derivation text and the extracted answer, when extraction succeeded.
struct LayerState {
    int layer_index = 1;
    int step_index = 1;
    std::string question;
    std::string derivation;
    std::optional<Answer> answer;
};

enum class VerificationVerdict { pass, fail, inconclusive };

const char* verification_verdict_name(VerificationVerdict v);

// One backward-verification cycle: the original problem with one condition
// masked as X and the produced answer injected as known, the value the mask
// hid, and what the backward solve reconstructed.
struct VerificationRecord {
    int target_layer = 1;
    int target_step = 1;
    std::string masked_question;
    Answer original_value;
    std::optional<Answer> reconstructed_value;
    VerificationVerdict verdict = VerificationVerdict::inconclusive;
    int attempts = 1;
    std::string detail;
    // Sum of token logprobs of the judging backward-solve call, when the
    // backend exposed them (logprob-threshold gating needs it).
    std::optional<double> backward_logprob;
};

enum class TraceLayerVerdict { verified, failed, pruned, unvisited };

const char* trace_layer_verdict_name(TraceLayerVerdict v);

struct LayerRecord {
    int layer_index = 1;
    std::vector<LayerState> states;
    std::vector<VerificationRecord> verifications;
    TraceLayerVerdict layer_verdict = TraceLayerVerdict::unvisited;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    bool estimated = false;

    bool operator==(const TokenUsage&) const = default;
};

// Componentwise sum; `estimated` is sticky. Throws Error(overflow) instead
// of wrapping.
TokenUsage usage_add(const TokenUsage& a, const TokenUsage& b);

enum class PromptTag { forward, mask, backward_solve, decompose, resolve, semantic_judge };

const char* prompt_tag_name(PromptTag tag);
std::optional<PromptTag> prompt_tag_from_name(const std::string& name);

// One backend completion as recorded in a trace.
struct CallRecord {
    PromptTag tag = PromptTag::forward;
    int layer_index = 0; // 0 when the call is not tied to a layer
    TokenUsage usage;
    std::optional<double> logprob_sum;
};

enum class HarnessModeKind { cot, cot_sc, cot_sv, cot_hmc, cot_rhmc, cot_rhmc_hp };

struct HarnessMode {
    HarnessModeKind kind = HarnessModeKind::cot_rhmc_hp;
    int sc_n = 5; // only meaningful for cot_sc

    static HarnessMode cot() { return {HarnessModeKind::cot, 1}; }
    static HarnessMode cot_sc(int n) { return {HarnessModeKind::cot_sc, n}; }
    static HarnessMode cot_sv() { return {HarnessModeKind::cot_sv, 1}; }
    static HarnessMode cot_hmc() { return {HarnessModeKind::cot_hmc, 1}; }
    static HarnessMode cot_rhmc() { return {HarnessModeKind::cot_rhmc, 1}; }
    static HarnessMode cot_rhmc_hp() { return {HarnessModeKind::cot_rhmc_hp, 1}; }

    std::string name() const;
    static std::optional<HarnessMode> from_name(const std::string& name);

    bool operator==(const HarnessMode&) const = default;
};

// The full layered record of one solve: forward states, verification
// records, prune marks, final answer, and token/call accounting.
// Layers are ordered top (highest index) to bottom (1).
struct ReasoningTrace {
    std::string problem_id;
    HarnessMode mode = HarnessMode::cot_rhmc_hp();
    std::vector<LayerRecord> layers;
    std::optional<Answer> final_answer;
    bool verified_final = false;
    std::optional<double> rhmc_score;
    TokenUsage usage;
    int call_count = 0;
    std::vector<CallRecord> calls;

    int top_layer_index() const;
    // Layers with at least one forward state.
    int visited_layer_count() const;
    // Smallest layer index that has a forward state (0 if none).
    int deepest_visited_layer() const;
    const LayerRecord* layer(int layer_index) const;
    LayerRecord& layer_mut(int layer_index);
};

enum class TauPolicyKind { all_steps_pass, logprob_threshold };
enum class ScoreMode { off, logprob };

struct TauPolicy {
    TauPolicyKind kind = TauPolicyKind::all_steps_pass;
    double tau = 0.0; // threshold, natural-log units (logprob_threshold only)
};

struct EngineConfig {
    int max_layers = 3;
    int verify_retry_budget = 1;
    int decompose_retry_budget = 1;
    TauPolicy tau_policy;
    double numeric_tolerance = 1e-6;
    ScoreMode score_mode = ScoreMode::off;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    int subproblem_cap = 6;
    bool reverify_final = true;
    // Internal knob set by the harness: false = keep verifying below a
    // verified layer (the expensive no-pruning ablation).
    bool pruning = true;

    void validate() const; // throws Error(config_invalid)
};

// Closed-form worst-case completions per solve for a config. The engine
// treats it as a hard budget, so it holds on every trace.
std::int64_t call_budget_bound(const EngineConfig& config);

// Structural trace checks: layer ordering, pruned-below-verified, step
// monotonicity, call-count and usage additivity, layer-cap when max_layers
// is given. Violations are data, not errors.
std::vector<std::string> validate_trace(const ReasoningTrace& trace,
                                        std::optional<int> max_layers = std::nullopt,
                                        double numeric_tolerance = 1e-6);

json engine_config_to_json(const EngineConfig& config);
EngineConfig engine_config_from_json(const json& j);

// Canonical JSON, stable field order, no wall-clock fields: two identical
// runs serialize byte-identically.
json answer_to_json(const Answer& answer);
Answer answer_from_json(const json& j);
json problem_to_json(const Problem& problem);
Problem problem_from_json(const json& j);
json trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const json& j);

} // namespace clot
