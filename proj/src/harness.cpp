// SPDX-License-Identifier: Apache-2.0
#include "clot/harness.hpp"

#include "clot/error.hpp"
#include "clot/judge.hpp"
#include "clot/prompts.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cstdio>
#include <sstream>
#include <thread>

namespace clot::harness {

namespace {

using prompts::Prompts;
using prompts::SubQA;

// Trace construction for the non-engine modes (cot, cot_sc, cot_sv,
// cot_hmc): same call accounting as the engine, no verification machinery.
struct FlatRun {
    Backend& backend;
    const Prompts& prompts;
    const EngineConfig& config;
    ReasoningTrace trace;

    std::optional<Completion> call(PromptRequest request, int layer_index,
                                   std::optional<std::int64_t> seed_override = std::nullopt) {
        request.temperature = config.temperature;
        request.seed = seed_override ? seed_override : config.seed;
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

    std::optional<Answer> forward_state(const Problem& problem, int layer_index,
                                        const std::vector<SubQA>* subs, PromptTag tag,
                                        std::optional<std::int64_t> seed_override = std::nullopt,
                                        std::optional<std::string> user_override = std::nullopt) {
        PromptRequest request = prompts.render_forward(problem, subs, tag);
        if (user_override) request.user = *user_override;
        auto completion = call(std::move(request), layer_index, seed_override);
        auto& layer = trace.layer_mut(layer_index);
        LayerState state;
        state.layer_index = layer_index;
        state.step_index = static_cast<int>(layer.states.size()) + 1;
        state.question = problem.text;
        if (completion) {
            state.derivation = completion->text;
            try {
                state.answer = prompts::extract_answer(completion->text, problem.answer_kind);
            } catch (const Error&) {
            }
        }
        auto answer = state.answer;
        layer.states.push_back(std::move(state));
        return answer;
    }
};

Answer majority_answer(const std::vector<Answer>& answers) {
    // first-seen majority: ties go to the earliest-seen value
    std::vector<std::pair<std::string, int>> groups;
    for (const auto& answer : answers) {
        const std::string key = answer.canonical_value();
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) groups.emplace_back(key, 1);
        else it->second += 1;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < groups.size(); ++i) {
        if (groups[i].second > groups[best].second) best = i;
    }
    const std::string& winner = groups[best].first;
    for (const auto& answer : answers) {
        if (answer.canonical_value() == winner) return answer;
    }
    return answers.front();
}

ReasoningTrace run_cot(const Problem& problem, const EngineConfig& config, Backend& backend,
                       const Prompts& prompts, HarnessMode mode) {
    FlatRun run{backend, prompts, config, {}};
    run.trace.problem_id = problem.id;
    run.trace.mode = mode;
    const int top = config.max_layers;
    const int samples = mode.kind == HarnessModeKind::cot_sc ? mode.sc_n : 1;

    std::vector<Answer> answers;
    for (int i = 0; i < samples; ++i) {
        std::optional<std::int64_t> seed = config.seed;
        if (mode.kind == HarnessModeKind::cot_sc && config.seed) seed = *config.seed + i;
        auto answer = run.forward_state(problem, top, nullptr, PromptTag::forward, seed);
        if (answer) answers.push_back(*answer);
    }
    if (!answers.empty()) run.trace.final_answer = majority_answer(answers);
    run.trace.verified_final = false;
    run.trace.layer_mut(top).layer_verdict = TraceLayerVerdict::failed;
    return std::move(run.trace);
}

ReasoningTrace run_cot_sv(const Problem& problem, const EngineConfig& config, Backend& backend,
                          const Prompts& prompts) {
    FlatRun run{backend, prompts, config, {}};
    run.trace.problem_id = problem.id;
    run.trace.mode = HarnessMode::cot_sv();
    const int top = config.max_layers;

    auto first = run.forward_state(problem, top, nullptr, PromptTag::forward);
    std::optional<Answer> second;
    if (first) {
        const std::string user =
            prompts.templates()
                .get("self_verify")
                .render({{"question", prompts::question_block(problem)},
                         {"answer", first->raw_span},
                         {"format_instruction",
                          problem.answer_kind == AnswerKind::numeric
                              ? prompts.templates().get("format_numeric").body
                              : (problem.answer_kind == AnswerKind::multiple_choice
                                     ? prompts.templates().get("format_choice").body
                                     : prompts.templates().get("format_free_text").body)}});
        second = run.forward_state(problem, top, nullptr, PromptTag::forward, std::nullopt, user);
    }
    run.trace.final_answer = second ? second : first;
    // maintained answer = the model vouched for it
    run.trace.verified_final =
        first && second &&
        judge::compare_offline(*second, *first, config.numeric_tolerance).passed();
    run.trace.layer_mut(top).layer_verdict = run.trace.verified_final
                                                 ? TraceLayerVerdict::verified
                                                 : TraceLayerVerdict::failed;
    return std::move(run.trace);
}

ReasoningTrace run_cot_hmc(const Problem& problem, const EngineConfig& config, Backend& backend,
                           const Prompts& prompts) {
    FlatRun run{backend, prompts, config, {}};
    run.trace.problem_id = problem.id;
    run.trace.mode = HarnessMode::cot_hmc();
    const int top = config.max_layers;

    // decomposition-first, no verification anywhere
    std::vector<Problem> subs;
    for (int attempt = 0; attempt <= config.decompose_retry_budget && subs.empty(); ++attempt) {
        auto completion = run.call(prompts.render_decompose(problem, ""), top);
        if (!completion) continue;
        try {
            subs = prompts.parse_subproblems(completion->text, problem, config.subproblem_cap)
                       .problems;
        } catch (const Error&) {
        }
    }
    if (subs.empty() || top == 1) {
        auto answer = run.forward_state(problem, top, nullptr, PromptTag::forward);
        run.trace.final_answer = answer;
        run.trace.verified_final = false;
        run.trace.layer_mut(top).layer_verdict = TraceLayerVerdict::failed;
        return std::move(run.trace);
    }
    const int sub_layer = top - 1;
    std::vector<SubQA> sub_answers;
    for (const auto& sub : subs) {
        auto answer = run.forward_state(sub, sub_layer, nullptr, PromptTag::forward);
        if (answer) sub_answers.push_back({sub.text, *answer});
    }
    run.trace.layer_mut(sub_layer).layer_verdict = TraceLayerVerdict::failed;
    std::optional<Answer> final_answer;
    if (!sub_answers.empty()) {
        final_answer = run.forward_state(problem, top, &sub_answers, PromptTag::resolve);
    } else {
        final_answer = run.forward_state(problem, top, nullptr, PromptTag::forward);
    }
    run.trace.final_answer = final_answer;
    run.trace.verified_final = false;
    run.trace.layer_mut(top).layer_verdict = TraceLayerVerdict::failed;
    return std::move(run.trace);
}

bool grade(const std::optional<Answer>& final_answer, const Answer& ground_truth,
           double tolerance, Backend* backend, const Prompts& prompts) {
    if (!final_answer) return false;
    if (final_answer->kind == AnswerKind::free_text &&
        ground_truth.kind == AnswerKind::free_text && backend) {
        auto offline = judge::compare_offline(*final_answer, ground_truth, tolerance);
        if (offline.passed()) return true;
        return judge::compare_semantic(*final_answer, ground_truth, *backend, prompts).passed();
    }
    return judge::compare_offline(*final_answer, ground_truth, tolerance).passed();
}

bool first_attempt_verified(const ReasoningTrace& trace, const Answer& ground_truth,
                            double tolerance) {
    if (trace.layers.empty()) return false;
    const LayerRecord& top = trace.layers.front();
    if (top.states.empty() || top.verifications.empty()) return false;
    const auto& first_state = top.states.front();
    const auto& first_record = top.verifications.front();
    if (!first_state.answer) return false;
    if (!judge::compare_offline(*first_state.answer, ground_truth, tolerance).passed()) return false;
    return first_record.verdict == VerificationVerdict::pass && first_record.attempts == 1;
}

} // namespace

namespace {

// shared reduction: `correct_flags` carries the grading (offline for the
// standalone operation, judge-escalated inside run_eval)
Metrics reduce_metrics(const std::vector<ReasoningTrace>& traces,
                       const std::vector<Answer>& ground_truths,
                       const std::vector<bool>& correct_flags, double tolerance) {
    Metrics m;
    if (traces.empty()) return m;
    const auto total = static_cast<std::int64_t>(traces.size());
    std::int64_t correct = 0;
    std::int64_t one_step = 0;
    std::int64_t incorrect = 0;
    std::int64_t missed_incorrect = 0; // incorrect but still flagged verified
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& trace = traces[i];
        const bool is_correct = correct_flags[i];
        if (is_correct) {
            ++correct;
            if (first_attempt_verified(trace, ground_truths[i], tolerance)) ++one_step;
        } else {
            ++incorrect;
            if (trace.verified_final) ++missed_incorrect;
        }
        m.max_layer_histogram[trace.visited_layer_count()] += 1;
        m.total_usage = usage_add(m.total_usage, trace.usage);
        m.total_calls += trace.call_count;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    m.one_step_verification_accuracy = static_cast<double>(one_step) / static_cast<double>(total);
    m.total_verification_accuracy =
        1.0 - static_cast<double>(missed_incorrect) / static_cast<double>(total);
    m.error_omission_rate =
        incorrect == 0 ? 0.0
                       : static_cast<double>(missed_incorrect) / static_cast<double>(incorrect);

    // total-verification identity: covered set = correct plus flagged incorrect
    assert(correct + (incorrect - missed_incorrect) == total - missed_incorrect);
    assert(m.accuracy >= 0.0 && m.accuracy <= 1.0);
    assert(m.one_step_verification_accuracy <= m.accuracy);
    assert(m.error_omission_rate >= 0.0 && m.error_omission_rate <= 1.0);
    return m;
}

} // namespace

Metrics compute_metrics(const std::vector<ReasoningTrace>& traces,
                        const std::vector<Answer>& ground_truths, double tolerance) {
    if (traces.size() != ground_truths.size()) {
        throw Error(Errc::length_mismatch, "traces and ground truths differ in length");
    }
    Prompts no_prompts;
    std::vector<bool> correct_flags;
    correct_flags.reserve(traces.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
        correct_flags.push_back(
            grade(traces[i].final_answer, ground_truths[i], tolerance, nullptr, no_prompts));
    }
    return reduce_metrics(traces, ground_truths, correct_flags, tolerance);
}

EvalReport run_eval(const std::vector<Problem>& problems, HarnessMode mode,
                    const EngineConfig& config, std::shared_ptr<Backend> backend, int workers) {
    config.validate();
    if (mode.kind == HarnessModeKind::cot_sc && mode.sc_n < 1) {
        throw Error(Errc::config_invalid, "cot_sc needs n >= 1");
    }
    for (const auto& problem : problems) {
        if (!problem.ground_truth) {
            throw Error(Errc::config_invalid, "problem '" + problem.id + "' has no ground truth");
        }
    }

    EvalReport report;
    report.mode = mode;
    report.degraded = false;
    report.config_snapshot = engine_config_to_json(config);
    report.config_snapshot["mode"] = mode.name();
    report.config_snapshot["workers"] = workers;
    report.summaries.resize(problems.size());
    report.traces.resize(problems.size());

    const engine::Engine eng(backend);
    const Prompts& prompts = eng.prompts();

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= problems.size()) return;
            const Problem& problem = problems[i];
            ProblemSummary summary;
            summary.problem_id = problem.id;
            ReasoningTrace trace;
            try {
                switch (mode.kind) {
                    case HarnessModeKind::cot:
                    case HarnessModeKind::cot_sc:
                        trace = run_cot(problem, config, *backend, prompts, mode);
                        break;
                    case HarnessModeKind::cot_sv:
                        trace = run_cot_sv(problem, config, *backend, prompts);
                        break;
                    case HarnessModeKind::cot_hmc:
                        trace = run_cot_hmc(problem, config, *backend, prompts);
                        break;
                    case HarnessModeKind::cot_rhmc:
                    case HarnessModeKind::cot_rhmc_hp:
                        trace = eng.solve(problem, config, mode);
                        break;
                }
            } catch (const std::exception& e) {
                summary.run_failed = true;
                summary.error = e.what();
                failures.fetch_add(1);
                trace = ReasoningTrace{};
                trace.problem_id = problem.id;
                trace.mode = mode;
            }
            summary.final_answer = trace.final_answer;
            summary.correct = grade(trace.final_answer, *problem.ground_truth,
                                    config.numeric_tolerance, backend.get(), prompts);
            summary.verified_final = trace.verified_final;
            summary.visited_layers = trace.visited_layer_count();
            summary.call_count = trace.call_count;
            summary.usage = trace.usage;
            report.summaries[i] = std::move(summary);
            report.traces[i] = std::move(trace);
        }
    };
    const int thread_count =
        std::max(1, std::min<int>(workers, static_cast<int>(problems.size())));
    if (thread_count <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(work);
        for (auto& thread : pool) thread.join();
    }

    std::vector<Answer> ground_truths;
    ground_truths.reserve(problems.size());
    for (const auto& problem : problems) ground_truths.push_back(*problem.ground_truth);
    // metrics share the run's own grading (free text may have gone through
    // the semantic judge above)
    std::vector<bool> correct_flags;
    correct_flags.reserve(report.summaries.size());
    for (const auto& summary : report.summaries) correct_flags.push_back(summary.correct);
    report.metrics =
        reduce_metrics(report.traces, ground_truths, correct_flags, config.numeric_tolerance);
    report.degraded = !problems.empty() && failures.load() * 2 > problems.size();
    return report;
}

namespace {

json metrics_to_json(const Metrics& m) {
    json histogram;
    for (const auto& [layers, count] : m.max_layer_histogram) {
        histogram[std::to_string(layers)] = count;
    }
    json j;
    j["accuracy"] = m.accuracy;
    j["one_step_verification_accuracy"] = m.one_step_verification_accuracy;
    j["total_verification_accuracy"] = m.total_verification_accuracy;
    j["error_omission_rate"] = m.error_omission_rate;
    j["max_layer_histogram"] = std::move(histogram);
    j["total_usage"] = json{{"prompt_tokens", m.total_usage.prompt_tokens},
                            {"completion_tokens", m.total_usage.completion_tokens},
                            {"estimated", m.total_usage.estimated}};
    j["total_calls"] = m.total_calls;
    return j;
}

Metrics metrics_from_json(const json& j) {
    Metrics m;
    m.accuracy = j.at("accuracy").get<double>();
    m.one_step_verification_accuracy = j.at("one_step_verification_accuracy").get<double>();
    m.total_verification_accuracy = j.at("total_verification_accuracy").get<double>();
    m.error_omission_rate = j.at("error_omission_rate").get<double>();
    for (const auto& [key, value] : j.at("max_layer_histogram").items()) {
        m.max_layer_histogram[std::stoi(key)] = value.get<std::int64_t>();
    }
    const auto& usage = j.at("total_usage");
    m.total_usage.prompt_tokens = usage.at("prompt_tokens").get<std::int64_t>();
    m.total_usage.completion_tokens = usage.at("completion_tokens").get<std::int64_t>();
    m.total_usage.estimated = usage.at("estimated").get<bool>();
    m.total_calls = j.at("total_calls").get<std::int64_t>();
    return m;
}

} // namespace

json report_to_json(const EvalReport& report) {
    json j;
    j["schema"] = "clot.report.v1";
    j["mode"] = report.mode.name();
    j["degraded"] = report.degraded;
    j["config"] = report.config_snapshot;
    j["metrics"] = metrics_to_json(report.metrics);
    json problems = json::array();
    for (const auto& summary : report.summaries) {
        json s;
        s["id"] = summary.problem_id;
        s["final_answer"] =
            summary.final_answer ? answer_to_json(*summary.final_answer) : json(nullptr);
        s["correct"] = summary.correct;
        s["verified_final"] = summary.verified_final;
        s["visited_layers"] = summary.visited_layers;
        s["calls"] = summary.call_count;
        s["usage"] = json{{"prompt_tokens", summary.usage.prompt_tokens},
                          {"completion_tokens", summary.usage.completion_tokens},
                          {"estimated", summary.usage.estimated}};
        s["run_failed"] = summary.run_failed;
        s["error"] = summary.error;
        problems.push_back(std::move(s));
    }
    j["problems"] = std::move(problems);
    return j;
}

EvalReport report_from_json(const json& j) {
    EvalReport report;
    if (auto mode = HarnessMode::from_name(j.at("mode").get<std::string>())) report.mode = *mode;
    report.degraded = j.at("degraded").get<bool>();
    report.config_snapshot = j.at("config");
    report.metrics = metrics_from_json(j.at("metrics"));
    for (const auto& s : j.at("problems")) {
        ProblemSummary summary;
        summary.problem_id = s.at("id").get<std::string>();
        if (!s.at("final_answer").is_null()) {
            summary.final_answer = answer_from_json(s.at("final_answer"));
        }
        summary.correct = s.at("correct").get<bool>();
        summary.verified_final = s.at("verified_final").get<bool>();
        summary.visited_layers = s.at("visited_layers").get<int>();
        summary.call_count = s.at("calls").get<int>();
        summary.usage.prompt_tokens = s.at("usage").at("prompt_tokens").get<std::int64_t>();
        summary.usage.completion_tokens = s.at("usage").at("completion_tokens").get<std::int64_t>();
        summary.usage.estimated = s.at("usage").at("estimated").get<bool>();
        summary.run_failed = s.at("run_failed").get<bool>();
        summary.error = s.at("error").get<std::string>();
        report.summaries.push_back(std::move(summary));
    }
    return report;
}

std::optional<ReportFormat> report_format_from_name(const std::string& name) {
    if (name == "text" || name == "text_table" || name == "table") return ReportFormat::text_table;
    if (name == "json") return ReportFormat::json_format;
    if (name == "csv") return ReportFormat::csv;
    return std::nullopt;
}

namespace {

std::string percent(double rate) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.1f%%", rate * 100.0);
    return buffer;
}

std::string tokens_k(std::int64_t tokens) {
    char buffer[32];
    const double k = static_cast<double>(tokens) / 1000.0;
    if (k < 10.0) std::snprintf(buffer, sizeof(buffer), "%.1fk", k);
    else std::snprintf(buffer, sizeof(buffer), "%.0fk", k);
    return buffer;
}

std::string histogram_cell(const std::map<int, std::int64_t>& histogram) {
    std::string out;
    for (const auto& [layers, count] : histogram) {
        if (!out.empty()) out += ' ';
        out += std::to_string(layers) + ":" + std::to_string(count);
    }
    return out.empty() ? "-" : out;
}

} // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
    if (format == ReportFormat::json_format) return report_to_json(report).dump(2) + "\n";

    const Metrics& m = report.metrics;
    const std::vector<std::string> header = {"mode",    "problems", "accuracy", "osva", "tva",
                                             "eor",     "tokens",   "calls",    "max_layers"};
    std::vector<std::string> row;
    if (!report.summaries.empty()) {
        const std::int64_t tokens =
            m.total_usage.prompt_tokens + m.total_usage.completion_tokens;
        row = {report.mode.name(),
               std::to_string(report.summaries.size()),
               percent(m.accuracy),
               percent(m.one_step_verification_accuracy),
               percent(m.total_verification_accuracy),
               percent(m.error_omission_rate),
               tokens_k(tokens),
               std::to_string(m.total_calls),
               histogram_cell(m.max_layer_histogram)};
    }

    if (format == ReportFormat::csv) {
        std::ostringstream out;
        for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
        out << "\n";
        if (!row.empty()) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::string cell = row[i];
                if (cell.find(',') != std::string::npos) cell = "\"" + cell + "\"";
                out << (i ? "," : "") << cell;
            }
            out << "\n";
        }
        return out.str();
    }

    std::vector<std::size_t> widths(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) {
        widths[i] = header[i].size();
        if (!row.empty()) widths[i] = std::max(widths[i], row[i].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << "  ";
            out << cells[i];
            if (i + 1 < cells.size()) {
                for (std::size_t pad = cells[i].size(); pad < widths[i]; ++pad) out << ' ';
            }
        }
        out << "\n";
    };
    emit(header);
    if (!row.empty()) emit(row);
    if (report.degraded) out << "warning: degraded run (more than half of the problems failed)\n";
    return out.str();
}

namespace {

// splitmix64: identical sequences on every platform, unlike <random>'s
// distribution templates.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::int64_t between(std::int64_t lo, std::int64_t hi) { // inclusive
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
};

} // namespace

SynthResult synth_generate(std::uint64_t seed, std::size_t count, double error_rate) {
    if (error_rate < 0.0 || error_rate > 1.0) {
        throw Error(Errc::config_invalid, "error_rate must be in [0,1]");
    }
    static const char* kNames[] = {"Avery", "Blake", "Casey", "Devon", "Emery",
                                   "Finley", "Harper", "Jordan", "Morgan", "Riley"};
    static const char* kItems[] = {"marbles", "stickers", "pencils", "apples", "coins",
                                   "buttons", "beads",    "cards",   "shells", "stamps"};
    Rng rng(seed);
    SynthResult out;
    const TokenUsage entry_usage{25, 15, false};

    for (std::size_t i = 0; i < count; ++i) {
        const std::string name = kNames[rng.next() % 10];
        const std::string item = kItems[rng.next() % 10];
        std::int64_t a = rng.between(3, 12);
        std::int64_t b = rng.between(4, 15);
        std::int64_t c = rng.between(2, 20);
        while (b == a) b = rng.between(4, 15);
        while (c == a || c == b || c == a * b) c = rng.between(2, 20);
        const std::int64_t product = a * b;
        const std::int64_t total = product + c;

        const std::string tag = "Task " + std::to_string(i + 1);
        const std::string text = tag + ": " + name + " packs " + std::to_string(a) +
                                 " boxes with " + std::to_string(b) + " " + item +
                                 " in each box, and then adds " + std::to_string(c) +
                                 " more loose " + item + ". How many " + item + " does " + name +
                                 " have in total?";

        Problem problem;
        problem.id = "synth-" + std::to_string(i + 1);
        problem.text = text;
        problem.answer_kind = AnswerKind::numeric;
        problem.ground_truth = Answer::make_numeric(Decimal::of_int(total));
        out.problems.push_back(problem);

        const bool wrong = rng.unit() < error_rate;
        out.forward_wrong.push_back(wrong);
        const std::int64_t k = rng.between(1, 3);
        const std::int64_t first = wrong ? total + b * k : total;
        const std::int64_t wrong_c = c + b * k; // what the masked slot solves to if first is wrong

        auto entry = [&](PromptTag tag_in, const std::string& key,
                         std::vector<std::string> responses) {
            ScriptEntry e;
            e.tag = tag_in;
            e.key = key;
            e.responses = std::move(responses);
            e.usage = entry_usage;
            out.script.push_back(std::move(e));
        };
        auto answer_text = [](std::int64_t value, const std::string& note) {
            return note + " <answer>" + std::to_string(value) + "</answer>";
        };

        // every "Knowing that" sentence carries the task tag: backward-solve
        // entries key on it, and it must never collide across problems
        const std::string masked_body = tag + ": " + name + " packs " + std::to_string(a) +
                                        " boxes with " + std::to_string(b) + " " + item +
                                        " in each box, and then adds X more loose " + item + ".";
        const std::string knowing_first = "Knowing that " + name + " has " +
                                          std::to_string(first) + " " + item + " in total for " +
                                          tag + ".";
        const std::string knowing_correct = "Knowing that " + name + " has " +
                                            std::to_string(total) + " " + item + " in total for " +
                                            tag + ".";
        const std::string masked_first = masked_body + " " + knowing_first + " What is X?";
        const std::string masked_correct = masked_body + " " + knowing_correct + " What is X?";

        // forward solve for the original problem
        entry(PromptTag::forward, text, {answer_text(first, "Count the boxes, then the extras.")});
        // mask requests: first verification cycle, then the post-recovery one
        entry(PromptTag::mask, text,
              wrong ? std::vector<std::string>{masked_first, masked_correct}
                    : std::vector<std::string>{masked_correct});
        // backward solves are exact functions of the injected answer
        entry(PromptTag::backward_solve, knowing_correct,
              {answer_text(c, "Subtract the boxed amount from the total.")});
        if (wrong) {
            entry(PromptTag::backward_solve, knowing_first,
                  {answer_text(wrong_c, "Subtract the boxed amount from the total.")});
        }

        // decomposition descent: used on recovery, and by no-pruning runs
        const std::string sub1 = tag + "a: How many " + item + " are in the " +
                                 std::to_string(a) + " boxes if each box holds " +
                                 std::to_string(b) + " " + item + "?";
        const std::string sub2 = tag + "b: If the boxes hold " + std::to_string(product) + " " +
                                 item + " in total and " + std::to_string(c) + " loose " + item +
                                 " are added, how many " + item + " are there overall?";
        entry(PromptTag::decompose, text, {"q1: " + sub1 + "\nq2: " + sub2});
        entry(PromptTag::forward, sub1, {answer_text(product, "Multiply boxes by contents.")});
        const std::string sub1_knowing = "Knowing that the " + std::to_string(a) +
                                         " boxes hold " + std::to_string(product) + " " + item +
                                         " altogether for " + tag + "a.";
        entry(PromptTag::mask, sub1,
              {tag + "a: How many " + item + " are in the " + std::to_string(a) +
               " boxes if each box holds X " + item + "? " + sub1_knowing + " What is X?"});
        entry(PromptTag::backward_solve, sub1_knowing,
              {answer_text(b, "Divide the boxed total by the box count.")});
        entry(PromptTag::forward, sub2, {answer_text(total, "Add the loose items.")});
        const std::string sub2_knowing = "Knowing that there are " + std::to_string(total) + " " +
                                         item + " overall for " + tag + "b.";
        entry(PromptTag::mask, sub2,
              {tag + "b: If the boxes hold " + std::to_string(product) + " " + item +
               " in total and X loose " + item + " are added, how many " + item +
               " are there overall? " + sub2_knowing + " What is X?"});
        entry(PromptTag::backward_solve, sub2_knowing,
              {answer_text(c, "Subtract the boxed amount.")});
        // re-solve with verified sub-answers
        entry(PromptTag::resolve, text, {answer_text(total, "Combine the verified sub-answers.")});
    }
    return out;
}

} // namespace clot::harness
