// SPDX-License-Identifier: Apache-2.0
#include "clot/engine.hpp"

#include "clot/error.hpp"
#include "clot/judge.hpp"

#include <algorithm>
#include <cassert>

namespace clot::engine {

LayerVerdict layer_consistency(const std::vector<VerificationRecord>& records,
                               const TauPolicy& policy) {
    if (records.empty()) throw Error(Errc::length_mismatch, "layer_consistency needs records");
    LayerVerdict verdict;
    verdict.layer_index = records.front().target_layer;
    verdict.total_steps = static_cast<int>(records.size());
    for (const auto& record : records) {
        if (record.verdict == VerificationVerdict::pass) ++verdict.passed_steps;
    }
    if (policy.kind == TauPolicyKind::all_steps_pass) {
        verdict.value =
            verdict.passed_steps == verdict.total_steps ? LayerGate::verified : LayerGate::failed;
        return verdict;
    }
    double sum = 0.0;
    for (const auto& record : records) {
        if (!record.backward_logprob) {
            throw Error(Errc::missing_logprobs,
                        "logprob_threshold policy needs backward logprobs on every record");
        }
        sum += *record.backward_logprob;
    }
    verdict.logprob_sum = sum;
    verdict.value = sum > policy.tau ? LayerGate::verified : LayerGate::failed;
    return verdict;
}

PruneAction prune_decision(const LayerVerdict& verdict, int current_layer) {
    if (verdict.verified()) return {PruneActionKind::prune_below};
    if (current_layer > 1) return {PruneActionKind::descend};
    return {PruneActionKind::halt_at_bottom};
}

double rhmc_score(const ReasoningTrace& trace) {
    double sum = 0.0;
    for (const auto& call : trace.calls) {
        if (call.tag != PromptTag::forward && call.tag != PromptTag::resolve &&
            call.tag != PromptTag::backward_solve) {
            continue;
        }
        if (!call.logprob_sum) {
            throw Error(Errc::missing_logprobs, "call without logprobs in scored trace");
        }
        sum += *call.logprob_sum;
    }
    return sum;
}

namespace {

using prompts::Prompts;
using prompts::SubQA;

std::string failure_summary(const Answer& bad_answer, const VerificationRecord& record) {
    std::string out = "A previous attempt produced the answer " + bad_answer.raw_span +
                      ", which failed backward verification";
    if (record.reconstructed_value) {
        out += ": solving the masked problem gave " + record.reconstructed_value->raw_span +
               " but the masked condition was " + record.original_value.raw_span;
    }
    out += ".";
    return out;
}

// One solve in flight: owns the trace under construction and the hard call
// budget derived from the config.
struct Run {
    Backend& backend;
    const Prompts& prompts;
    const EngineConfig& config;
    ReasoningTrace trace;
    std::int64_t budget;
    bool budget_exhausted = false;
    // (layer, problem) of the deepest forward state so far; the no-pruning
    // descent continues from here.
    std::optional<std::pair<int, Problem>> deepest;

    Run(Backend& backend_in, const Prompts& prompts_in, const EngineConfig& config_in)
        : backend(backend_in), prompts(prompts_in), config(config_in),
          budget(call_budget_bound(config_in)) {}

    std::optional<Completion> call(PromptRequest request, int layer_index) {
        if (static_cast<std::int64_t>(trace.call_count) >= budget) {
            budget_exhausted = true;
            return std::nullopt;
        }
        request.temperature = config.temperature;
        request.seed = config.seed;
        if (config.score_mode == ScoreMode::logprob) request.want_logprobs = true;
        Completion completion;
        try {
            completion = backend.complete(request);
        } catch (const Error&) {
            return std::nullopt;
        }
        CallRecord record;
        record.tag = request.tag;
        record.layer_index = layer_index;
        record.usage = usage_or_estimate(request, completion);
        record.logprob_sum = completion.logprob_sum();
        trace.usage = usage_add(trace.usage, record.usage);
        trace.calls.push_back(std::move(record));
        trace.call_count = static_cast<int>(trace.calls.size());
        return completion;
    }

    struct ForwardResult {
        std::optional<Answer> answer;
        int step_index = 0; // 0 when the call itself failed
    };

    // Forward (or resolve / backward_solve) ask; records the layer state.
    ForwardResult forward(const Problem& problem, int layer_index,
                          const std::vector<SubQA>* sub_answers, PromptTag tag) {
        auto completion = call(prompts.render_forward(problem, sub_answers, tag), layer_index);
        auto& layer = trace.layer_mut(layer_index);
        LayerState state;
        state.layer_index = layer_index;
        state.step_index = static_cast<int>(layer.states.size()) + 1;
        state.question = problem.text;
        if (!deepest || layer_index < deepest->first) deepest = {layer_index, problem};
        if (!completion) {
            layer.states.push_back(std::move(state));
            return {std::nullopt, 0};
        }
        state.derivation = completion->text;
        try {
            state.answer = prompts::extract_answer(completion->text, problem.answer_kind);
        } catch (const Error&) {
            state.answer = std::nullopt;
        }
        auto answer = state.answer;
        const int step = state.step_index;
        layer.states.push_back(std::move(state));
        return {answer, step};
    }

    void record_verification(int layer_index, VerificationRecord record) {
        trace.layer_mut(layer_index).verifications.push_back(std::move(record));
    }

    VerificationRecord synthetic_inconclusive(int layer_index, int step, const std::string& why) {
        VerificationRecord record;
        record.target_layer = layer_index;
        record.target_step = step;
        record.original_value = Answer::make_text("", "");
        record.verdict = VerificationVerdict::inconclusive;
        record.attempts = 1;
        record.detail = why;
        return record;
    }

    // Mask -> parse -> backward solve -> judge, retried on parse trouble.
    // Every attempt costs at most two calls: a successful mask parse is
    // reused, and a missing answer tag re-asks with a reminder on the next
    // attempt instead of re-masking.
    VerificationRecord verify(const Problem& problem, const Answer& answer, int layer_index,
                              int step) {
        VerificationRecord record;
        record.target_layer = layer_index;
        record.target_step = step;
        record.original_value = Answer::make_text("", "");
        record.verdict = VerificationVerdict::inconclusive;

        const int attempts_allowed = 1 + config.verify_retry_budget;
        std::optional<prompts::MaskedProblem> masked;
        bool remind = false;
        int attempt = 0;
        while (attempt < attempts_allowed) {
            ++attempt;
            record.attempts = attempt;
            if (!masked) {
                auto completion = call(prompts.render_mask(problem, answer), layer_index);
                if (!completion) {
                    record.detail = "mask call failed";
                    if (budget_exhausted) break;
                    continue;
                }
                try {
                    masked = prompts.parse_masked(completion->text, problem, answer);
                } catch (const Error& e) {
                    record.detail = e.what();
                    continue;
                }
                record.masked_question = masked->text;
                record.original_value = masked->masked_value;
            }

            Problem inverted;
            inverted.id = problem.id + ".verify";
            inverted.text = masked->text;
            inverted.answer_kind = masked->masked_value.kind == AnswerKind::numeric
                                       ? AnswerKind::numeric
                                       : AnswerKind::free_text;
            PromptRequest request = prompts.render_forward(inverted, nullptr, PromptTag::backward_solve);
            if (remind) request.user += "\n" + prompts.extraction_reminder();
            auto completion = call(request, layer_index);
            if (!completion) {
                record.detail = "backward solve call failed";
                if (budget_exhausted) break;
                continue;
            }
            record.backward_logprob = completion->logprob_sum();
            Answer reconstructed;
            try {
                reconstructed = prompts::extract_answer(completion->text, inverted.answer_kind);
            } catch (const Error& e) {
                record.detail = e.what();
                remind = true;
                continue;
            }

            judge::Verdict verdict;
            if (masked->masked_value.kind == AnswerKind::numeric) {
                verdict = judge::compare_numeric(reconstructed, masked->masked_value,
                                                 config.numeric_tolerance);
            } else {
                verdict =
                    judge::compare_semantic(reconstructed, masked->masked_value, backend, prompts);
            }
            if (verdict.outcome == VerificationVerdict::inconclusive) {
                record.detail = verdict.detail;
                continue; // judge could not decide; spend another attempt
            }
            record.reconstructed_value = reconstructed;
            record.verdict = verdict.outcome;
            record.detail = verdict.detail;
            return record;
        }
        return record; // inconclusive: extraction or masking failed on every attempt
    }

    struct NodeResult {
        std::optional<Answer> answer;
        bool verified = false;
    };

    // layer_consistency with one engine-side guard: under the logprob
    // policy, a record that is inconclusive *because a backend call failed*
    // carries no logprobs; that gates the layer as failed instead of
    // propagating the strict missing-logprobs error out of solve().
    LayerVerdict gate(const std::vector<VerificationRecord>& records) {
        if (config.tau_policy.kind == TauPolicyKind::logprob_threshold) {
            for (const auto& record : records) {
                if (!record.backward_logprob &&
                    record.verdict == VerificationVerdict::inconclusive) {
                    LayerVerdict verdict;
                    verdict.layer_index = records.front().target_layer;
                    verdict.value = LayerGate::failed;
                    verdict.total_steps = static_cast<int>(records.size());
                    for (const auto& r : records) {
                        if (r.verdict == VerificationVerdict::pass) ++verdict.passed_steps;
                    }
                    return verdict;
                }
            }
        }
        return layer_consistency(records, config.tau_policy);
    }

    NodeResult solve_node(const Problem& problem, int layer_index) {
        auto fwd = forward(problem, layer_index, nullptr, PromptTag::forward);
        if (!fwd.answer) {
            const int step =
                fwd.step_index > 0
                    ? fwd.step_index
                    : static_cast<int>(trace.layer_mut(layer_index).states.size());
            record_verification(layer_index,
                                synthetic_inconclusive(layer_index, step, "no forward answer"));
            return {std::nullopt, false};
        }
        VerificationRecord record = verify(problem, *fwd.answer, layer_index, fwd.step_index);
        const LayerVerdict layer_gate = gate({record});
        const std::string summary = failure_summary(*fwd.answer, record);
        record_verification(layer_index, std::move(record));
        const PruneAction action = prune_decision(layer_gate, layer_index);
        if (action.action == PruneActionKind::prune_below) return {fwd.answer, true};
        if (action.action == PruneActionKind::halt_at_bottom) return {fwd.answer, false};
        return drill(problem, *fwd.answer, layer_index, summary);
    }

    std::vector<Problem> decompose(const Problem& problem, const std::string& summary,
                                   int layer_index) {
        const int attempts_allowed = 1 + config.decompose_retry_budget;
        for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
            auto completion = call(prompts.render_decompose(problem, summary), layer_index);
            if (!completion) {
                if (budget_exhausted) break;
                continue;
            }
            try {
                return prompts.parse_subproblems(completion->text, problem, config.subproblem_cap)
                    .problems;
            } catch (const Error&) {
                continue;
            }
        }
        return {};
    }

    // Descend below a failed verification at `layer_index`: decompose once,
    // solve and verify every sub-problem one level down, drill into the
    // first failing sub-problem if any, then re-solve the parent with the
    // verified sub-answers.
    NodeResult drill(const Problem& problem, const Answer& bad_answer, int layer_index,
                     const std::string& summary) {
        if (layer_index <= 1) return {bad_answer, false};
        const std::vector<Problem> subs = decompose(problem, summary, layer_index);
        if (subs.empty()) return {bad_answer, false};

        const int sub_layer = layer_index - 1;
        std::vector<SubQA> sub_answers;
        std::vector<bool> passed(subs.size(), false);
        std::vector<std::optional<Answer>> answers(subs.size());
        std::vector<VerificationRecord> gate_records;
        int first_fail = -1;
        for (std::size_t i = 0; i < subs.size(); ++i) {
            auto fwd = forward(subs[i], sub_layer, nullptr, PromptTag::forward);
            answers[i] = fwd.answer;
            if (!fwd.answer) {
                const int step =
                    fwd.step_index > 0
                        ? fwd.step_index
                        : static_cast<int>(trace.layer_mut(sub_layer).states.size());
                auto record = synthetic_inconclusive(sub_layer, step, "no forward answer");
                gate_records.push_back(record);
                record_verification(sub_layer, std::move(record));
                if (first_fail < 0) first_fail = static_cast<int>(i);
                continue;
            }
            VerificationRecord record = verify(subs[i], *fwd.answer, sub_layer, fwd.step_index);
            passed[i] = record.verdict == VerificationVerdict::pass;
            gate_records.push_back(record);
            record_verification(sub_layer, std::move(record));
            if (!passed[i] && first_fail < 0) first_fail = static_cast<int>(i);
        }

        if (first_fail >= 0 && answers[first_fail]) {
            // one drill per layer: chase the first concrete failure down
            NodeResult fixed =
                drill(subs[first_fail], *answers[first_fail], sub_layer,
                      failure_summary(*answers[first_fail], gate_records[first_fail]));
            if (fixed.verified && fixed.answer) {
                answers[first_fail] = fixed.answer;
                passed[first_fail] = true;
                gate_records[first_fail].verdict = VerificationVerdict::pass;
            }
        }

        const LayerVerdict layer_gate = gate(gate_records);
        trace.layer_mut(sub_layer).layer_verdict =
            layer_gate.verified() ? TraceLayerVerdict::verified : TraceLayerVerdict::failed;
        if (!layer_gate.verified()) return {bad_answer, false};

        for (std::size_t i = 0; i < subs.size(); ++i) {
            sub_answers.push_back({subs[i].text, *answers[i]});
        }
        auto fwd = forward(problem, layer_index, &sub_answers, PromptTag::resolve);
        if (!fwd.answer) return {bad_answer, false};
        if (!config.reverify_final) return {fwd.answer, true};
        VerificationRecord record = verify(problem, *fwd.answer, layer_index, fwd.step_index);
        const bool ok = record.verdict == VerificationVerdict::pass;
        record_verification(layer_index, std::move(record));
        return {fwd.answer, ok};
    }

    // The no-pruning ablation keeps verifying below the deepest layer the
    // main pass reached: decompose, verify each sub, chain into the first
    // one. Outcomes are recorded but never change the final answer.
    void descend_for_verification() {
        if (!deepest) return;
        int layer_index = deepest->first;
        Problem chain = deepest->second;
        while (layer_index > 1 && !budget_exhausted) {
            const std::vector<Problem> subs = decompose(chain, "", layer_index);
            if (subs.empty()) return;
            const int sub_layer = layer_index - 1;
            std::vector<VerificationRecord> gate_records;
            for (const auto& sub : subs) {
                auto fwd = forward(sub, sub_layer, nullptr, PromptTag::forward);
                if (!fwd.answer) {
                    const int step =
                        fwd.step_index > 0
                            ? fwd.step_index
                            : static_cast<int>(trace.layer_mut(sub_layer).states.size());
                    auto record = synthetic_inconclusive(sub_layer, step, "no forward answer");
                    gate_records.push_back(record);
                    record_verification(sub_layer, std::move(record));
                    continue;
                }
                VerificationRecord record = verify(sub, *fwd.answer, sub_layer, fwd.step_index);
                gate_records.push_back(record);
                record_verification(sub_layer, std::move(record));
            }
            if (!gate_records.empty()) {
                const LayerVerdict layer_gate = gate(gate_records);
                trace.layer_mut(sub_layer).layer_verdict =
                    layer_gate.verified() ? TraceLayerVerdict::verified : TraceLayerVerdict::failed;
            }
            chain = subs.front();
            layer_index = sub_layer;
        }
    }
};

} // namespace

Engine::Engine(std::shared_ptr<Backend> backend, prompts::Prompts prompts)
    : backend_(std::move(backend)), prompts_(std::move(prompts)) {}

ReasoningTrace Engine::solve(const Problem& problem, const EngineConfig& config,
                             HarnessMode mode) const {
    config.validate();
    const auto problem_issues = problem.violations();
    if (!problem_issues.empty()) {
        throw Error(Errc::config_invalid, "invalid problem: " + problem_issues.front());
    }

    Run run(*backend_, prompts_, config);
    run.trace.problem_id = problem.id;
    run.trace.mode = mode;

    const int top = config.max_layers;
    const bool pruning = config.pruning && mode.kind != HarnessModeKind::cot_rhmc;

    Run::NodeResult result = run.solve_node(problem, top);
    run.trace.layer_mut(top).layer_verdict =
        result.verified ? TraceLayerVerdict::verified : TraceLayerVerdict::failed;
    run.trace.final_answer = result.answer;
    run.trace.verified_final = result.verified;

    if (!pruning) run.descend_for_verification();

    if (pruning) {
        // explicit prune marks for every layer skipped below a verified one
        bool verified_above = false;
        for (int layer_index = top; layer_index >= 1; --layer_index) {
            const LayerRecord* existing = run.trace.layer(layer_index);
            const bool has_activity =
                existing && (!existing->states.empty() || !existing->verifications.empty());
            if (has_activity) {
                verified_above = verified_above ||
                                 existing->layer_verdict == TraceLayerVerdict::verified;
                continue;
            }
            if (verified_above) {
                run.trace.layer_mut(layer_index).layer_verdict = TraceLayerVerdict::pruned;
            }
        }
    }

    if (config.score_mode == ScoreMode::logprob) {
        try {
            run.trace.rhmc_score = rhmc_score(run.trace);
        } catch (const Error&) {
            // backend exposed no logprobs: degrade, score stays unset
        }
    }

    assert(static_cast<std::int64_t>(run.trace.call_count) <= run.budget);
    return std::move(run.trace);
}

VerificationRecord Engine::backward_verify(const Problem& problem, const Answer& answer,
                                           const EngineConfig& config) const {
    config.validate();
    if (!answer.well_formed()) throw Error(Errc::config_invalid, "backward_verify needs an answer");
    Run run(*backend_, prompts_, config);
    run.trace.problem_id = problem.id;
    return run.verify(problem, answer, config.max_layers, 1);
}

} // namespace clot::engine
