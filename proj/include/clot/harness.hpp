// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/backend.hpp"
#include "clot/core.hpp"
#include "clot/engine.hpp"
#include "clot/scripted_backend.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace clot::harness {

struct Metrics {
    double accuracy = 0.0;
    double one_step_verification_accuracy = 0.0;
    double total_verification_accuracy = 0.0;
    double error_omission_rate = 0.0;
    std::map<int, std::int64_t> max_layer_histogram; // visited layer count -> problems
    TokenUsage total_usage;
    std::int64_t total_calls = 0;
};

struct ProblemSummary {
    std::string problem_id;
    std::optional<Answer> final_answer;
    bool correct = false;
    bool verified_final = false;
    int visited_layers = 0;
    int call_count = 0;
    TokenUsage usage;
    bool run_failed = false;
    std::string error;
};

struct EvalReport {
    HarnessMode mode;
    json config_snapshot;
    bool degraded = false;
    std::vector<ProblemSummary> summaries;
    std::vector<ReasoningTrace> traces;
    Metrics metrics;
};

// Accuracy plus the verification metrics:
//   one-step  — correct final AND the top layer's first verification passed
//               on its first attempt
//   total     — correct final OR (incorrect AND flagged unverified)
//   omission  — incorrect finals that still carried a verified flag, over
//               all incorrect finals (0 when nothing is incorrect)
// Free-text grading here is offline (normalized equality); run_eval grades
// free text through the semantic judge while the backend is at hand.
Metrics compute_metrics(const std::vector<ReasoningTrace>& traces,
                        const std::vector<Answer>& ground_truths, double tolerance = 1e-6);

// Runs one evaluation campaign. Problems need ground truth. Worker pool is
// bounded by `workers`; per-problem failures are recorded and the run keeps
// going (>50% failures marks the report degraded).
EvalReport run_eval(const std::vector<Problem>& problems, HarnessMode mode,
                    const EngineConfig& config, std::shared_ptr<Backend> backend,
                    int workers = 1);

json report_to_json(const EvalReport& report);
EvalReport report_from_json(const json& j);

enum class ReportFormat { text_table, json_format, csv };

std::optional<ReportFormat> report_format_from_name(const std::string& name);

// Stable column order; rates as percent with one decimal, tokens in
// k-units.
std::string render_report(const EvalReport& report, ReportFormat format);

// Deterministic two-step arithmetic problems (a*b + c) with a matching
// script: each forward answer is wrong with probability error_rate, masks
// are well-formed, and backward solves are computed exactly from the
// injected answer, so wrong answers always fail verification and correct
// ones always pass. The script also covers the decomposition descent, so
// wrong answers recover and no-pruning runs have entries to consume.
struct SynthResult {
    std::vector<Problem> problems;
    std::vector<ScriptEntry> script;
    std::vector<bool> forward_wrong; // per problem: scripted first answer is wrong
};

SynthResult synth_generate(std::uint64_t seed, std::size_t count, double error_rate);

} // namespace clot::harness
