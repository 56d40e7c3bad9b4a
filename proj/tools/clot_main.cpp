// SPDX-License-Identifier: Apache-2.0
//
// clot — run the reasoning loop from the command line.
//   solve          one problem, canonical trace JSON on stdout
//   eval           a dataset in one harness mode, report + traces
//   build-dataset  instruction samples from verified solves
//   report         re-render a stored report
//   synth          synthetic problems + matching script for offline runs
//
// stdout carries data; diagnostics go to stderr. Exit codes: 0 ok, 1 run
// error, 2 usage error.

#include "clot/core.hpp"
#include "clot/dataset.hpp"
#include "clot/engine.hpp"
#include "clot/error.hpp"
#include "clot/harness.hpp"
#include "clot/http_backend.hpp"
#include "clot/scripted_backend.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace clot;

struct CliOptions {
    std::string config_path;
    // backend
    std::optional<std::string> script_path;
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    std::optional<std::string> api_key_env;
    std::optional<int> timeout_s;
    std::optional<int> http_retries;
    // engine
    std::optional<int> max_layers;
    std::optional<int> verify_retry_budget;
    std::optional<int> decompose_retry_budget;
    std::optional<double> tolerance;
    std::optional<std::string> tau_policy;
    std::optional<double> tau;
    std::optional<std::string> score_mode;
    std::optional<double> temperature;
    std::optional<std::int64_t> seed;
    std::optional<int> subproblem_cap;
    std::optional<bool> reverify_final;
    // run
    std::optional<std::string> mode;
    std::optional<int> workers;
    std::optional<std::string> prompt_dir;
    std::optional<std::string> dataset_path;
    std::optional<std::string> dataset_format;
    std::optional<std::size_t> limit;
    bool dry_run = false;
};

struct Resolved {
    EngineConfig engine;
    std::string backend_type = "scripted"; // scripted | http
    std::string script_path;
    std::string endpoint;
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_s = 60;
    int http_retries = 3;
    HarnessMode mode = HarnessMode::cot_rhmc_hp();
    int workers = 1;
    std::string prompt_dir;
    std::string dataset_path;
    dataset::BenchmarkFormat dataset_format = dataset::BenchmarkFormat::generic_jsonl;
    std::size_t limit = 0;

    json to_json() const {
        json j;
        j["backend"] = json{{"type", backend_type},
                            {"script", script_path},
                            {"endpoint", endpoint},
                            {"model", model},
                            {"api_key_env", api_key_env},
                            {"timeout_s", timeout_s},
                            {"max_retries", http_retries}};
        j["engine"] = engine_config_to_json(engine);
        j["mode"] = mode.name();
        j["workers"] = workers;
        j["prompt_dir"] = prompt_dir;
        j["dataset"] = json{{"path", dataset_path},
                            {"format", dataset::benchmark_format_name(dataset_format)},
                            {"limit", limit}};
        return j;
    }
};

void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) throw Error(Errc::config_invalid, where + ": unknown key '" + key + "'");
    }
}

Resolved resolve(const CliOptions& options) {
    Resolved r;
    if (!options.config_path.empty()) {
        std::ifstream in(options.config_path);
        if (!in) throw Error(Errc::io_error, "cannot open config '" + options.config_path + "'");
        json config;
        try {
            in >> config;
        } catch (const std::exception& e) {
            throw Error(Errc::format_error, options.config_path + ": " + e.what());
        }
        reject_unknown_keys(config, {"backend", "engine", "mode", "workers", "prompt_dir", "dataset"},
                            options.config_path);
        if (config.contains("engine")) r.engine = engine_config_from_json(config["engine"]);
        if (config.contains("backend")) {
            const json& backend = config["backend"];
            reject_unknown_keys(backend,
                                {"type", "script", "endpoint", "model", "api_key_env", "timeout_s",
                                 "max_retries"},
                                options.config_path + " backend");
            r.backend_type = backend.value("type", r.backend_type);
            r.script_path = backend.value("script", r.script_path);
            r.endpoint = backend.value("endpoint", r.endpoint);
            r.model = backend.value("model", r.model);
            r.api_key_env = backend.value("api_key_env", r.api_key_env);
            r.timeout_s = backend.value("timeout_s", r.timeout_s);
            r.http_retries = backend.value("max_retries", r.http_retries);
        }
        if (config.contains("mode")) {
            const auto mode = HarnessMode::from_name(config["mode"].get<std::string>());
            if (!mode) throw Error(Errc::config_invalid, "unknown mode in config");
            r.mode = *mode;
        }
        r.workers = config.value("workers", r.workers);
        r.prompt_dir = config.value("prompt_dir", r.prompt_dir);
        if (config.contains("dataset")) {
            const json& data = config["dataset"];
            reject_unknown_keys(data, {"path", "format", "limit"},
                                options.config_path + " dataset");
            r.dataset_path = data.value("path", r.dataset_path);
            if (data.contains("format")) {
                const auto format =
                    dataset::benchmark_format_from_name(data["format"].get<std::string>());
                if (!format) throw Error(Errc::config_invalid, "unknown dataset format in config");
                r.dataset_format = *format;
            }
            r.limit = data.value("limit", r.limit);
        }
    }

    // flags win over the config file
    if (options.script_path) {
        r.backend_type = "scripted";
        r.script_path = *options.script_path;
    }
    if (options.endpoint) {
        r.backend_type = "http";
        r.endpoint = *options.endpoint;
    }
    if (options.model) r.model = *options.model;
    if (options.api_key_env) r.api_key_env = *options.api_key_env;
    if (options.timeout_s) r.timeout_s = *options.timeout_s;
    if (options.http_retries) r.http_retries = *options.http_retries;
    if (options.max_layers) r.engine.max_layers = *options.max_layers;
    if (options.verify_retry_budget) r.engine.verify_retry_budget = *options.verify_retry_budget;
    if (options.decompose_retry_budget) {
        r.engine.decompose_retry_budget = *options.decompose_retry_budget;
    }
    if (options.tolerance) r.engine.numeric_tolerance = *options.tolerance;
    if (options.tau_policy) {
        if (*options.tau_policy == "all_steps_pass") {
            r.engine.tau_policy.kind = TauPolicyKind::all_steps_pass;
        } else if (*options.tau_policy == "logprob_threshold") {
            r.engine.tau_policy.kind = TauPolicyKind::logprob_threshold;
        } else {
            throw CLI::ValidationError("--tau-policy",
                                       "must be all_steps_pass or logprob_threshold");
        }
    }
    if (options.tau) r.engine.tau_policy.tau = *options.tau;
    if (options.score_mode) {
        if (*options.score_mode == "off") r.engine.score_mode = ScoreMode::off;
        else if (*options.score_mode == "logprob") r.engine.score_mode = ScoreMode::logprob;
        else throw CLI::ValidationError("--score-mode", "must be off or logprob");
    }
    if (options.temperature) r.engine.temperature = *options.temperature;
    if (options.seed) r.engine.seed = *options.seed;
    if (options.subproblem_cap) r.engine.subproblem_cap = *options.subproblem_cap;
    if (options.reverify_final) r.engine.reverify_final = *options.reverify_final;
    if (options.mode) {
        const auto mode = HarnessMode::from_name(*options.mode);
        if (!mode) throw CLI::ValidationError("--mode", "unknown mode '" + *options.mode + "'");
        r.mode = *mode;
    }
    if (options.workers) r.workers = *options.workers;
    if (options.prompt_dir) r.prompt_dir = *options.prompt_dir;
    if (options.dataset_path) r.dataset_path = *options.dataset_path;
    if (options.dataset_format) {
        const auto format = dataset::benchmark_format_from_name(*options.dataset_format);
        if (!format) {
            throw CLI::ValidationError("--format",
                                       "unknown dataset format '" + *options.dataset_format + "'");
        }
        r.dataset_format = *format;
    }
    if (options.limit) r.limit = *options.limit;
    r.engine.validate();
    return r;
}

std::shared_ptr<Backend> make_backend(const Resolved& resolved) {
    if (resolved.backend_type == "scripted") {
        if (resolved.script_path.empty()) {
            throw Error(Errc::config_invalid, "scripted backend needs --backend <script.json>");
        }
        return std::make_shared<ScriptedBackend>(
            ScriptedBackend::from_file(resolved.script_path));
    }
    if (resolved.backend_type == "http") {
        if (resolved.endpoint.empty() || resolved.model.empty()) {
            throw Error(Errc::config_invalid, "http backend needs --endpoint and --model");
        }
        HttpBackendConfig config;
        config.base_url = resolved.endpoint;
        config.model = resolved.model;
        config.timeout_seconds = resolved.timeout_s;
        config.max_retries = resolved.http_retries;
        if (const char* key = std::getenv(resolved.api_key_env.c_str())) config.api_key = key;
        return std::make_shared<HttpBackend>(config);
    }
    throw Error(Errc::config_invalid, "unknown backend type '" + resolved.backend_type + "'");
}

prompts::Prompts make_prompts(const Resolved& resolved) {
    if (resolved.prompt_dir.empty()) return prompts::Prompts();
    return prompts::Prompts(prompts::TemplateSet::with_overrides(resolved.prompt_dir));
}

void write_or_print(const std::string& payload, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << payload;
        if (payload.empty() || payload.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write '" + output_path + "'");
    out << payload;
}

void print_dry_run(const Resolved& resolved, std::size_t problem_count) {
    json plan;
    plan["config"] = resolved.to_json();
    plan["problems"] = problem_count;
    plan["call_budget_per_problem"] = call_budget_bound(resolved.engine);
    plan["call_budget_total"] =
        call_budget_bound(resolved.engine) * static_cast<std::int64_t>(problem_count);
    plan["backend_calls_performed"] = 0;
    std::cout << plan.dump(2) << "\n";
}

std::vector<Problem> load_problems(const Resolved& resolved) {
    if (resolved.dataset_path.empty()) {
        throw Error(Errc::config_invalid, "no dataset given (--dataset PATH --format FORMAT)");
    }
    return dataset::load_benchmark(resolved.dataset_path, resolved.dataset_format, resolved.limit);
}

int run_solve(const CliOptions& options, const std::string& question, const std::string& kind,
              const std::string& output_path) {
    const Resolved resolved = resolve(options);
    Problem problem;
    if (!question.empty()) {
        problem.id = "cli";
        problem.text = question;
        const auto parsed_kind = answer_kind_from_name(kind);
        if (!parsed_kind) throw Error(Errc::config_invalid, "unknown answer kind '" + kind + "'");
        problem.answer_kind = *parsed_kind;
    } else {
        const auto problems = load_problems(resolved);
        if (problems.empty()) throw Error(Errc::config_invalid, "dataset is empty");
        problem = problems.front();
    }
    if (options.dry_run) {
        print_dry_run(resolved, 1);
        return 0;
    }
    const engine::Engine engine(make_backend(resolved), make_prompts(resolved));
    const ReasoningTrace trace = engine.solve(problem, resolved.engine, resolved.mode);
    write_or_print(trace_to_json(trace).dump(2), output_path);
    return 0;
}

int run_eval_cmd(const CliOptions& options, const std::string& output_path,
                 const std::string& traces_path, const std::string& render_format) {
    const Resolved resolved = resolve(options);
    const std::vector<Problem> problems = load_problems(resolved);
    if (options.dry_run) {
        print_dry_run(resolved, problems.size());
        return 0;
    }
    const auto format = harness::report_format_from_name(render_format);
    if (!format) throw Error(Errc::config_invalid, "unknown render format '" + render_format + "'");

    harness::EvalReport report = harness::run_eval(problems, resolved.mode, resolved.engine,
                                                   make_backend(resolved), resolved.workers);
    report.config_snapshot = resolved.to_json();
    if (!traces_path.empty()) {
        std::ofstream out(traces_path, std::ios::binary);
        if (!out) throw Error(Errc::io_error, "cannot write '" + traces_path + "'");
        for (const auto& trace : report.traces) out << trace_to_json(trace).dump() << "\n";
    }
    if (!output_path.empty()) {
        write_or_print(harness::report_to_json(report).dump(2) + "\n", output_path);
    }
    std::cout << harness::render_report(report, *format);
    return report.degraded ? 1 : 0;
}

int run_build_dataset(const CliOptions& options, const std::string& output_path) {
    const Resolved resolved = resolve(options);
    const std::vector<Problem> problems = load_problems(resolved);
    if (options.dry_run) {
        print_dry_run(resolved, problems.size());
        return 0;
    }
    if (output_path.empty()) throw Error(Errc::config_invalid, "build-dataset needs --output");
    const engine::Engine engine(make_backend(resolved), make_prompts(resolved));
    std::vector<dataset::ClotInstructSample> samples;
    std::size_t skipped = 0;
    for (const auto& problem : problems) {
        try {
            if (auto sample = dataset::build_instruct_sample(problem, resolved.engine, engine)) {
                samples.push_back(std::move(*sample));
            } else {
                ++skipped;
            }
        } catch (const Error& e) {
            ++skipped;
            std::cerr << "skip " << problem.id << ": " << e.what() << "\n";
        }
    }
    const std::size_t written = dataset::write_instruct(samples, output_path);
    std::cerr << "wrote " << written << " samples to " << output_path << " (skipped " << skipped
              << ")\n";
    return 0;
}

int run_report(const CliOptions& options, const std::string& input_path,
               const std::string& render_format, const std::string& output_path) {
    const auto format = harness::report_format_from_name(render_format);
    if (!format) throw Error(Errc::config_invalid, "unknown render format '" + render_format + "'");
    if (options.dry_run) {
        print_dry_run(resolve(options), 0);
        return 0;
    }
    std::ifstream in(input_path);
    if (!in) throw Error(Errc::io_error, "cannot open report '" + input_path + "'");
    json stored;
    try {
        in >> stored;
    } catch (const std::exception& e) {
        throw Error(Errc::format_error, input_path + ": " + e.what());
    }
    const harness::EvalReport report = harness::report_from_json(stored);
    write_or_print(harness::render_report(report, *format), output_path);
    return 0;
}

int run_synth(const CliOptions& options, std::uint64_t seed, std::size_t count, double error_rate,
              const std::string& output_dir) {
    if (options.dry_run) {
        Resolved resolved = resolve(options);
        print_dry_run(resolved, count);
        return 0;
    }
    const harness::SynthResult synth = harness::synth_generate(seed, count, error_rate);
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    const fs::path problems_path = fs::path(output_dir) / "problems.jsonl";
    const fs::path script_path = fs::path(output_dir) / "script.json";
    {
        std::ofstream out(problems_path, std::ios::binary);
        if (!out) throw Error(Errc::io_error, "cannot write '" + problems_path.string() + "'");
        for (const auto& problem : synth.problems) {
            json record;
            record["id"] = problem.id;
            record["question"] = problem.text;
            record["answer"] = problem.ground_truth->numeric_value->str();
            out << record.dump() << "\n";
        }
    }
    {
        std::ofstream out(script_path, std::ios::binary);
        if (!out) throw Error(Errc::io_error, "cannot write '" + script_path.string() + "'");
        out << ScriptedBackend::to_json(synth.script).dump(2) << "\n";
    }
    std::cerr << "wrote " << synth.problems.size() << " problems and a "
              << synth.script.size() << "-entry script under " << output_dir << "\n";
    std::cout << problems_path.string() << "\n" << script_path.string() << "\n";
    return 0;
}

void add_common_flags(CLI::App* cmd, CliOptions& options) {
    cmd->add_option("--config", options.config_path, "JSON config file (flags win over it)");
    cmd->add_option("--backend", options.script_path, "script file for the offline backend");
    cmd->add_option("--endpoint", options.endpoint, "OpenAI-compatible chat endpoint URL");
    cmd->add_option("--model", options.model, "model name for the http backend");
    cmd->add_option("--api-key-env", options.api_key_env,
                    "environment variable holding the API key (default OPENAI_API_KEY)");
    cmd->add_option("--timeout", options.timeout_s, "http timeout, seconds");
    cmd->add_option("--http-retries", options.http_retries, "transient-failure retries");
    cmd->add_option("--max-layers", options.max_layers, "layer budget (top layer index)");
    cmd->add_option("--verify-retry-budget", options.verify_retry_budget,
                    "extra verification cycles on inconclusive parses");
    cmd->add_option("--decompose-retry-budget", options.decompose_retry_budget,
                    "extra decomposition asks when no items parse");
    cmd->add_option("--tolerance", options.tolerance, "relative tolerance for non-integers");
    cmd->add_option("--tau-policy", options.tau_policy, "all_steps_pass | logprob_threshold");
    cmd->add_option("--tau", options.tau, "logprob threshold (natural-log units)");
    cmd->add_option("--score-mode", options.score_mode, "off | logprob");
    cmd->add_option("--temperature", options.temperature, "sampling temperature");
    cmd->add_option("--seed", options.seed, "backend seed hint");
    cmd->add_option("--subproblem-cap", options.subproblem_cap, "max sub-problems per layer");
    cmd->add_option("--reverify-final", options.reverify_final,
                    "re-verify the re-solved answer (default true)");
    cmd->add_option("--mode", options.mode,
                    "cot | cot_scN | cot_sv | cot_hmc | cot_rhmc | cot_rhmc_hp");
    cmd->add_option("--workers", options.workers, "worker pool size");
    cmd->add_option("--prompt-dir", options.prompt_dir, "prompt template override directory");
    cmd->add_option("--dataset", options.dataset_path, "benchmark file");
    cmd->add_option("--format", options.dataset_format,
                    "gsm8k_jsonl | svamp_json | addsub_json | aqua_jsonl | csqa_jsonl | "
                    "generic_jsonl");
    cmd->add_option("--limit", options.limit, "evaluate only the first N problems");
    cmd->add_flag("--dry-run", options.dry_run,
                  "print the resolved config and call budget; no backend calls");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLoT reasoning loop: forward solve, backward verification, "
                 "hierarchical decomposition, consistency-gated pruning"};
    app.require_subcommand(1);

    CliOptions options;
    std::string question;
    std::string kind = "numeric";
    std::string output_path;
    std::string traces_path;
    std::string render_format = "text";
    std::string input_path;
    std::uint64_t synth_seed = 7;
    std::size_t synth_count = 100;
    double synth_error_rate = 0.3;
    std::string synth_dir = "synth";

    CLI::App* solve = app.add_subcommand("solve", "solve one problem and print its trace");
    add_common_flags(solve, options);
    solve->add_option("--question", question, "problem text (numeric unless --kind says otherwise)");
    solve->add_option("--kind", kind, "numeric | multiple_choice | free_text");
    solve->add_option("--output", output_path, "trace file (default stdout)");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a dataset in one mode");
    add_common_flags(eval, options);
    eval->add_option("--output", output_path, "report JSON file");
    eval->add_option("--traces-out", traces_path, "trace JSONL file");
    eval->add_option("--render-format", render_format, "text | json | csv");

    CLI::App* build = app.add_subcommand("build-dataset", "emit instruction samples");
    add_common_flags(build, options);
    build->add_option("--output", output_path, "samples JSONL file");

    CLI::App* report = app.add_subcommand("report", "re-render a stored report");
    add_common_flags(report, options);
    report->add_option("--input", input_path, "report JSON file")->required();
    report->add_option("--render-format", render_format, "text | json | csv");
    report->add_option("--output", output_path, "rendered file (default stdout)");

    CLI::App* synth = app.add_subcommand("synth", "write synthetic problems and script");
    add_common_flags(synth, options); // --seed doubles as the generator seed here
    synth->add_option("--count", synth_count, "number of problems");
    synth->add_option("--error-rate", synth_error_rate, "probability of a wrong first answer");
    synth->add_option("--output-dir", synth_dir, "directory for problems.jsonl and script.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) return run_solve(options, question, kind, output_path);
        if (eval->parsed()) return run_eval_cmd(options, output_path, traces_path, render_format);
        if (build->parsed()) return run_build_dataset(options, output_path);
        if (report->parsed()) return run_report(options, input_path, render_format, output_path);
        if (synth->parsed()) {
            if (options.seed) synth_seed = static_cast<std::uint64_t>(*options.seed);
            return run_synth(options, synth_seed, synth_count, synth_error_rate, synth_dir);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
