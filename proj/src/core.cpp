// SPDX-License-Identifier: Apache-2.0
#include "clot/core.hpp"

#include "clot/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace clot {

std::vector<std::string> Problem::violations() const {
    std::vector<std::string> out;
    if (text.empty()) out.push_back("problem text is empty");
    const bool is_choice = answer_kind == AnswerKind::multiple_choice;
    if (is_choice && choices.empty()) out.push_back("multiple_choice problem has no choices");
    if (!is_choice && !choices.empty()) out.push_back("choices present on non-choice problem");
    std::set<std::string> seen;
    for (const auto& c : choices) {
        if (c.label.size() != 1 || !std::isupper(static_cast<unsigned char>(c.label[0]))) {
            out.push_back("choice label '" + c.label + "' is not a single uppercase letter");
        }
        if (!seen.insert(c.label).second) out.push_back("duplicate choice label '" + c.label + "'");
    }
    if (ground_truth && !ground_truth->well_formed()) out.push_back("ground_truth is malformed");
    return out;
}

const char* verification_verdict_name(VerificationVerdict v) {
    switch (v) {
        case VerificationVerdict::pass: return "pass";
        case VerificationVerdict::fail: return "fail";
        case VerificationVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* trace_layer_verdict_name(TraceLayerVerdict v) {
    switch (v) {
        case TraceLayerVerdict::verified: return "verified";
        case TraceLayerVerdict::failed: return "failed";
        case TraceLayerVerdict::pruned: return "pruned";
        case TraceLayerVerdict::unvisited: return "unvisited";
    }
    return "unvisited";
}

TokenUsage usage_add(const TokenUsage& a, const TokenUsage& b) {
    TokenUsage out;
    if (__builtin_add_overflow(a.prompt_tokens, b.prompt_tokens, &out.prompt_tokens) ||
        __builtin_add_overflow(a.completion_tokens, b.completion_tokens, &out.completion_tokens)) {
        throw Error(Errc::overflow, "token usage sum overflows");
    }
    out.estimated = a.estimated || b.estimated;
    return out;
}

const char* prompt_tag_name(PromptTag tag) {
    switch (tag) {
        case PromptTag::forward: return "forward";
        case PromptTag::mask: return "mask";
        case PromptTag::backward_solve: return "backward_solve";
        case PromptTag::decompose: return "decompose";
        case PromptTag::resolve: return "resolve";
        case PromptTag::semantic_judge: return "semantic_judge";
    }
    return "forward";
}

std::optional<PromptTag> prompt_tag_from_name(const std::string& name) {
    if (name == "forward") return PromptTag::forward;
    if (name == "mask") return PromptTag::mask;
    if (name == "backward_solve") return PromptTag::backward_solve;
    if (name == "decompose") return PromptTag::decompose;
    if (name == "resolve") return PromptTag::resolve;
    if (name == "semantic_judge") return PromptTag::semantic_judge;
    return std::nullopt;
}

std::string HarnessMode::name() const {
    switch (kind) {
        case HarnessModeKind::cot: return "cot";
        case HarnessModeKind::cot_sc: return "cot_sc" + std::to_string(sc_n);
        case HarnessModeKind::cot_sv: return "cot_sv";
        case HarnessModeKind::cot_hmc: return "cot_hmc";
        case HarnessModeKind::cot_rhmc: return "cot_rhmc";
        case HarnessModeKind::cot_rhmc_hp: return "cot_rhmc_hp";
    }
    return "cot";
}

std::optional<HarnessMode> HarnessMode::from_name(const std::string& name) {
    if (name == "cot") return cot();
    if (name == "cot_sv") return cot_sv();
    if (name == "cot_hmc") return cot_hmc();
    if (name == "cot_rhmc") return cot_rhmc();
    if (name == "cot_rhmc_hp") return cot_rhmc_hp();
    if (name.rfind("cot_sc", 0) == 0) {
        std::string n = name.substr(6);
        if (n.empty()) return cot_sc(5);
        try {
            int parsed = std::stoi(n);
            if (parsed >= 1) return cot_sc(parsed);
        } catch (...) {
        }
    }
    return std::nullopt;
}

int ReasoningTrace::top_layer_index() const {
    return layers.empty() ? 0 : layers.front().layer_index;
}

int ReasoningTrace::visited_layer_count() const {
    int count = 0;
    for (const auto& layer : layers) {
        if (!layer.states.empty()) ++count;
    }
    return count;
}

int ReasoningTrace::deepest_visited_layer() const {
    int deepest = 0;
    for (const auto& layer : layers) {
        if (!layer.states.empty()) deepest = layer.layer_index;
    }
    return deepest;
}

const LayerRecord* ReasoningTrace::layer(int layer_index) const {
    for (const auto& l : layers) {
        if (l.layer_index == layer_index) return &l;
    }
    return nullptr;
}

LayerRecord& ReasoningTrace::layer_mut(int layer_index) {
    for (auto& l : layers) {
        if (l.layer_index == layer_index) return l;
    }
    // insert keeping descending order
    LayerRecord fresh;
    fresh.layer_index = layer_index;
    auto it = std::find_if(layers.begin(), layers.end(),
                           [&](const LayerRecord& l) { return l.layer_index < layer_index; });
    return *layers.insert(it, std::move(fresh));
}

void EngineConfig::validate() const {
    if (max_layers < 1) throw Error(Errc::config_invalid, "max_layers must be >= 1");
    if (verify_retry_budget < 0) throw Error(Errc::config_invalid, "verify_retry_budget must be >= 0");
    if (decompose_retry_budget < 0)
        throw Error(Errc::config_invalid, "decompose_retry_budget must be >= 0");
    if (numeric_tolerance < 0) throw Error(Errc::config_invalid, "numeric_tolerance must be >= 0");
    if (subproblem_cap < 1) throw Error(Errc::config_invalid, "subproblem_cap must be >= 1");
}

std::int64_t call_budget_bound(const EngineConfig& config) {
    const std::int64_t L = config.max_layers;
    const std::int64_t C = config.subproblem_cap;
    const std::int64_t V = config.verify_retry_budget;
    const std::int64_t D = config.decompose_retry_budget;
    return 2 + L * C * (1 + 2 * (1 + V)) + D * L + 2;
}

namespace {

bool judged_equal_for_validator(const Answer& a, const Answer& b, double tolerance) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case AnswerKind::numeric: {
            if (!a.numeric_value || !b.numeric_value) return false;
            if (a.numeric_value->is_integer() && b.numeric_value->is_integer())
                return *a.numeric_value == *b.numeric_value;
            const double x = a.numeric_value->to_double();
            const double y = b.numeric_value->to_double();
            const double scale = std::max({1.0, std::abs(x), std::abs(y)});
            return std::abs(x - y) <= tolerance * scale;
        }
        case AnswerKind::multiple_choice:
        case AnswerKind::free_text:
            return a.canonical_value() == b.canonical_value();
    }
    return false;
}

} // namespace

std::vector<std::string> validate_trace(const ReasoningTrace& trace,
                                        std::optional<int> max_layers,
                                        double numeric_tolerance) {
    std::vector<std::string> out;
    int previous_index = 0;
    bool verified_above = false;
    for (std::size_t i = 0; i < trace.layers.size(); ++i) {
        const auto& layer = trace.layers[i];
        if (i > 0 && layer.layer_index >= previous_index) {
            out.push_back("layers not ordered top to bottom at position " + std::to_string(i));
        }
        previous_index = layer.layer_index;
        if (layer.layer_index < 1) out.push_back("layer_index below 1");
        if (max_layers && layer.layer_index > *max_layers) {
            out.push_back("layer_index " + std::to_string(layer.layer_index) + " above max_layers");
        }
        if (layer.layer_verdict == TraceLayerVerdict::pruned && !verified_above) {
            out.push_back("layer " + std::to_string(layer.layer_index) +
                          " pruned without a verified layer above");
        }
        if (layer.layer_verdict == TraceLayerVerdict::verified) verified_above = true;
        int expected_step = 1;
        for (const auto& state : layer.states) {
            if (state.layer_index != layer.layer_index) {
                out.push_back("state layer_index mismatch in layer " +
                              std::to_string(layer.layer_index));
            }
            if (state.step_index != expected_step) {
                out.push_back("step_index not sequential in layer " +
                              std::to_string(layer.layer_index));
            }
            ++expected_step;
        }
        for (const auto& record : layer.verifications) {
            if (record.attempts < 1) out.push_back("verification record with attempts < 1");
            if (record.verdict == VerificationVerdict::pass) {
                if (!record.reconstructed_value) {
                    out.push_back("pass verdict without reconstructed value");
                } else if (!judged_equal_for_validator(*record.reconstructed_value,
                                                       record.original_value, numeric_tolerance)) {
                    out.push_back("pass verdict with reconstructed != original");
                }
            }
            if (record.verdict == VerificationVerdict::inconclusive && record.reconstructed_value) {
                out.push_back("inconclusive verdict with a reconstructed value");
            }
        }
    }
    if (static_cast<int>(trace.calls.size()) != trace.call_count) {
        out.push_back("call_count does not match recorded calls");
    }
    TokenUsage total;
    for (const auto& call : trace.calls) total = usage_add(total, call.usage);
    if (!(total == trace.usage)) out.push_back("usage total does not match sum of calls");
    return out;
}

json engine_config_to_json(const EngineConfig& config) {
    json j;
    j["max_layers"] = config.max_layers;
    j["verify_retry_budget"] = config.verify_retry_budget;
    j["decompose_retry_budget"] = config.decompose_retry_budget;
    j["tau_policy"] = config.tau_policy.kind == TauPolicyKind::all_steps_pass
                          ? "all_steps_pass"
                          : "logprob_threshold";
    j["tau"] = config.tau_policy.tau;
    j["numeric_tolerance"] = config.numeric_tolerance;
    j["score_mode"] = config.score_mode == ScoreMode::off ? "off" : "logprob";
    j["temperature"] = config.temperature;
    j["seed"] = config.seed ? json(*config.seed) : json(nullptr);
    j["subproblem_cap"] = config.subproblem_cap;
    j["reverify_final"] = config.reverify_final;
    j["pruning"] = config.pruning;
    return j;
}

EngineConfig engine_config_from_json(const json& j) {
    EngineConfig c;
    c.max_layers = j.value("max_layers", c.max_layers);
    c.verify_retry_budget = j.value("verify_retry_budget", c.verify_retry_budget);
    c.decompose_retry_budget = j.value("decompose_retry_budget", c.decompose_retry_budget);
    const std::string policy = j.value("tau_policy", std::string("all_steps_pass"));
    if (policy == "logprob_threshold") c.tau_policy.kind = TauPolicyKind::logprob_threshold;
    else if (policy == "all_steps_pass") c.tau_policy.kind = TauPolicyKind::all_steps_pass;
    else throw Error(Errc::config_invalid, "unknown tau_policy '" + policy + "'");
    c.tau_policy.tau = j.value("tau", 0.0);
    c.numeric_tolerance = j.value("numeric_tolerance", c.numeric_tolerance);
    const std::string score = j.value("score_mode", std::string("off"));
    if (score == "logprob") c.score_mode = ScoreMode::logprob;
    else if (score == "off") c.score_mode = ScoreMode::off;
    else throw Error(Errc::config_invalid, "unknown score_mode '" + score + "'");
    c.temperature = j.value("temperature", c.temperature);
    if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::int64_t>();
    c.subproblem_cap = j.value("subproblem_cap", c.subproblem_cap);
    c.reverify_final = j.value("reverify_final", c.reverify_final);
    c.pruning = j.value("pruning", c.pruning);
    c.validate();
    return c;
}

json answer_to_json(const Answer& answer) {
    json j;
    j["kind"] = answer_kind_name(answer.kind);
    switch (answer.kind) {
        case AnswerKind::numeric:
            j["value"] = answer.numeric_value ? json(answer.numeric_value->str()) : json(nullptr);
            break;
        case AnswerKind::multiple_choice:
            j["value"] = answer.choice_label ? json(*answer.choice_label) : json(nullptr);
            break;
        case AnswerKind::free_text:
            j["value"] = answer.text_value ? json(*answer.text_value) : json(nullptr);
            break;
    }
    j["raw_span"] = answer.raw_span;
    return j;
}

Answer answer_from_json(const json& j) {
    const auto kind = answer_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw Error(Errc::format_error, "unknown answer kind");
    Answer a;
    a.kind = *kind;
    a.raw_span = j.value("raw_span", std::string());
    if (j.contains("value") && !j.at("value").is_null()) {
        const std::string value = j.at("value").get<std::string>();
        switch (*kind) {
            case AnswerKind::numeric: a.numeric_value = Decimal::of(value); break;
            case AnswerKind::multiple_choice: a.choice_label = value; break;
            case AnswerKind::free_text: a.text_value = value; break;
        }
    }
    return a;
}

json problem_to_json(const Problem& problem) {
    json j;
    j["id"] = problem.id;
    j["text"] = problem.text;
    j["answer_kind"] = answer_kind_name(problem.answer_kind);
    if (!problem.choices.empty()) {
        json choices = json::array();
        for (const auto& c : problem.choices) {
            choices.push_back(json{{"label", c.label}, {"text", c.text}});
        }
        j["choices"] = std::move(choices);
    }
    if (problem.ground_truth) j["ground_truth"] = answer_to_json(*problem.ground_truth);
    return j;
}

Problem problem_from_json(const json& j) {
    Problem p;
    p.id = j.at("id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    const auto kind = answer_kind_from_name(j.at("answer_kind").get<std::string>());
    if (!kind) throw Error(Errc::format_error, "unknown answer kind");
    p.answer_kind = *kind;
    if (j.contains("choices")) {
        for (const auto& c : j.at("choices")) {
            p.choices.push_back({c.at("label").get<std::string>(), c.at("text").get<std::string>()});
        }
    }
    if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
        p.ground_truth = answer_from_json(j.at("ground_truth"));
    }
    return p;
}

namespace {

json usage_to_json(const TokenUsage& usage) {
    return json{{"prompt_tokens", usage.prompt_tokens},
                {"completion_tokens", usage.completion_tokens},
                {"estimated", usage.estimated}};
}

TokenUsage usage_from_json(const json& j) {
    TokenUsage u;
    u.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
    u.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
    u.estimated = j.at("estimated").get<bool>();
    return u;
}

json verification_to_json(const VerificationRecord& record) {
    json j;
    j["target_layer"] = record.target_layer;
    j["target_step"] = record.target_step;
    j["masked_question"] = record.masked_question;
    j["original_value"] = answer_to_json(record.original_value);
    j["reconstructed_value"] =
        record.reconstructed_value ? answer_to_json(*record.reconstructed_value) : json(nullptr);
    j["verdict"] = verification_verdict_name(record.verdict);
    j["attempts"] = record.attempts;
    j["detail"] = record.detail;
    j["backward_logprob"] = record.backward_logprob ? json(*record.backward_logprob) : json(nullptr);
    return j;
}

VerificationRecord verification_from_json(const json& j) {
    VerificationRecord r;
    r.target_layer = j.at("target_layer").get<int>();
    r.target_step = j.at("target_step").get<int>();
    r.masked_question = j.at("masked_question").get<std::string>();
    r.original_value = answer_from_json(j.at("original_value"));
    if (!j.at("reconstructed_value").is_null()) {
        r.reconstructed_value = answer_from_json(j.at("reconstructed_value"));
    }
    const std::string verdict = j.at("verdict").get<std::string>();
    if (verdict == "pass") r.verdict = VerificationVerdict::pass;
    else if (verdict == "fail") r.verdict = VerificationVerdict::fail;
    else r.verdict = VerificationVerdict::inconclusive;
    r.attempts = j.at("attempts").get<int>();
    r.detail = j.value("detail", std::string());
    if (j.contains("backward_logprob") && !j.at("backward_logprob").is_null()) {
        r.backward_logprob = j.at("backward_logprob").get<double>();
    }
    return r;
}

} // namespace

json trace_to_json(const ReasoningTrace& trace) {
    json j;
    j["schema"] = "clot.trace.v1";
    j["problem_id"] = trace.problem_id;
    j["mode"] = trace.mode.name();
    j["final_answer"] = trace.final_answer ? answer_to_json(*trace.final_answer) : json(nullptr);
    j["verified_final"] = trace.verified_final;
    j["rhmc_score"] = trace.rhmc_score ? json(*trace.rhmc_score) : json(nullptr);
    j["usage"] = usage_to_json(trace.usage);
    j["call_count"] = trace.call_count;
    json calls = json::array();
    for (const auto& call : trace.calls) {
        json c;
        c["tag"] = prompt_tag_name(call.tag);
        c["layer"] = call.layer_index;
        c["usage"] = usage_to_json(call.usage);
        c["logprob_sum"] = call.logprob_sum ? json(*call.logprob_sum) : json(nullptr);
        calls.push_back(std::move(c));
    }
    j["calls"] = std::move(calls);
    json layers = json::array();
    for (const auto& layer : trace.layers) {
        json l;
        l["layer_index"] = layer.layer_index;
        l["layer_verdict"] = trace_layer_verdict_name(layer.layer_verdict);
        json states = json::array();
        for (const auto& state : layer.states) {
            json s;
            s["layer_index"] = state.layer_index;
            s["step_index"] = state.step_index;
            s["question"] = state.question;
            s["derivation"] = state.derivation;
            s["answer"] = state.answer ? answer_to_json(*state.answer) : json(nullptr);
            states.push_back(std::move(s));
        }
        l["states"] = std::move(states);
        json records = json::array();
        for (const auto& record : layer.verifications) records.push_back(verification_to_json(record));
        l["verifications"] = std::move(records);
        layers.push_back(std::move(l));
    }
    j["layers"] = std::move(layers);
    return j;
}

ReasoningTrace trace_from_json(const json& j) {
    ReasoningTrace t;
    t.problem_id = j.at("problem_id").get<std::string>();
    if (auto mode = HarnessMode::from_name(j.at("mode").get<std::string>())) t.mode = *mode;
    if (!j.at("final_answer").is_null()) t.final_answer = answer_from_json(j.at("final_answer"));
    t.verified_final = j.at("verified_final").get<bool>();
    if (!j.at("rhmc_score").is_null()) t.rhmc_score = j.at("rhmc_score").get<double>();
    t.usage = usage_from_json(j.at("usage"));
    t.call_count = j.at("call_count").get<int>();
    for (const auto& c : j.at("calls")) {
        CallRecord call;
        if (auto tag = prompt_tag_from_name(c.at("tag").get<std::string>())) call.tag = *tag;
        call.layer_index = c.at("layer").get<int>();
        call.usage = usage_from_json(c.at("usage"));
        if (!c.at("logprob_sum").is_null()) call.logprob_sum = c.at("logprob_sum").get<double>();
        t.calls.push_back(std::move(call));
    }
    for (const auto& l : j.at("layers")) {
        LayerRecord layer;
        layer.layer_index = l.at("layer_index").get<int>();
        const std::string verdict = l.at("layer_verdict").get<std::string>();
        if (verdict == "verified") layer.layer_verdict = TraceLayerVerdict::verified;
        else if (verdict == "failed") layer.layer_verdict = TraceLayerVerdict::failed;
        else if (verdict == "pruned") layer.layer_verdict = TraceLayerVerdict::pruned;
        else layer.layer_verdict = TraceLayerVerdict::unvisited;
        for (const auto& s : l.at("states")) {
            LayerState state;
            state.layer_index = s.at("layer_index").get<int>();
            state.step_index = s.at("step_index").get<int>();
            state.question = s.at("question").get<std::string>();
            state.derivation = s.at("derivation").get<std::string>();
            if (!s.at("answer").is_null()) state.answer = answer_from_json(s.at("answer"));
            layer.states.push_back(std::move(state));
        }
        for (const auto& r : l.at("verifications")) {
            layer.verifications.push_back(verification_from_json(r));
        }
        t.layers.push_back(std::move(layer));
    }
    return t;
}

} // namespace clot
