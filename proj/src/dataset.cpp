// SPDX-License-Identifier: Apache-2.0
#include "clot/dataset.hpp"

#include "clot/error.hpp"
#include "clot/judge.hpp"
#include "clot/prompts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace clot::dataset {

std::optional<BenchmarkFormat> benchmark_format_from_name(const std::string& name) {
    if (name == "gsm8k_jsonl") return BenchmarkFormat::gsm8k_jsonl;
    if (name == "svamp_json") return BenchmarkFormat::svamp_json;
    if (name == "addsub_json") return BenchmarkFormat::addsub_json;
    if (name == "aqua_jsonl") return BenchmarkFormat::aqua_jsonl;
    if (name == "csqa_jsonl") return BenchmarkFormat::csqa_jsonl;
    if (name == "generic_jsonl") return BenchmarkFormat::generic_jsonl;
    return std::nullopt;
}

const char* benchmark_format_name(BenchmarkFormat format) {
    switch (format) {
        case BenchmarkFormat::gsm8k_jsonl: return "gsm8k_jsonl";
        case BenchmarkFormat::svamp_json: return "svamp_json";
        case BenchmarkFormat::addsub_json: return "addsub_json";
        case BenchmarkFormat::aqua_jsonl: return "aqua_jsonl";
        case BenchmarkFormat::csqa_jsonl: return "csqa_jsonl";
        case BenchmarkFormat::generic_jsonl: return "generic_jsonl";
    }
    return "generic_jsonl";
}

namespace {

Decimal decimal_from_json_number(const json& j, const std::string& where) {
    if (j.is_number_integer()) return Decimal::of(std::to_string(j.get<std::int64_t>()));
    if (j.is_number_unsigned()) return Decimal::of(std::to_string(j.get<std::uint64_t>()));
    if (j.is_number_float()) {
        char buffer[64];
        std::snprintf(buffer, sizeof(buffer), "%.10g", j.get<double>());
        if (auto parsed = Decimal::parse(buffer)) return *parsed;
        throw Error(Errc::format_error, where + ": numeric value '" + std::string(buffer) +
                                            "' is not a plain decimal");
    }
    if (j.is_string()) {
        if (auto parsed = Decimal::parse(j.get<std::string>())) return *parsed;
    }
    throw Error(Errc::format_error, where + ": expected a number");
}

// GSM8K convention: rationale text ending in "#### <value>".
Decimal gsm8k_final_value(const std::string& answer_text, const std::string& where) {
    const auto marker = answer_text.rfind("####");
    if (marker == std::string::npos) {
        throw Error(Errc::format_error, where + ": no '####' answer marker");
    }
    std::string tail = answer_text.substr(marker + 4);
    std::string cleaned;
    for (char c : tail) {
        if (c == ',' || c == '$' || c == ' ') continue;
        if (c == '\n') break;
        cleaned += c;
    }
    while (!cleaned.empty() && std::isspace(static_cast<unsigned char>(cleaned.back()))) {
        cleaned.pop_back();
    }
    if (auto parsed = Decimal::parse(cleaned)) return *parsed;
    throw Error(Errc::format_error, where + ": '" + cleaned + "' after #### is not a number");
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
    std::vector<json> out;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const std::exception& e) {
            throw Error(Errc::format_error,
                        path + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    return out;
}

json read_json_array(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
    json parsed;
    try {
        in >> parsed;
    } catch (const std::exception& e) {
        throw Error(Errc::format_error, path + ": " + e.what());
    }
    if (!parsed.is_array()) throw Error(Errc::format_error, path + ": expected a JSON array");
    return parsed;
}

Problem parse_aqua_record(const json& record, const std::string& where, std::size_t index) {
    Problem p;
    p.id = "aqua-" + std::to_string(index);
    p.text = record.at("question").get<std::string>();
    p.answer_kind = AnswerKind::multiple_choice;
    for (const auto& option : record.at("options")) {
        const std::string entry = option.get<std::string>();
        if (entry.empty()) throw Error(Errc::format_error, where + ": empty option");
        std::string label(1, static_cast<char>(std::toupper(static_cast<unsigned char>(entry[0]))));
        std::size_t start = 1;
        if (start < entry.size() && (entry[start] == ')' || entry[start] == '.')) ++start;
        while (start < entry.size() && entry[start] == ' ') ++start;
        p.choices.push_back({label, entry.substr(start)});
    }
    const std::string correct = record.at("correct").get<std::string>();
    if (correct.empty()) throw Error(Errc::format_error, where + ": empty 'correct' label");
    p.ground_truth = Answer::make_choice(std::string(1, correct[0]), correct);
    return p;
}

Problem parse_csqa_record(const json& record, const std::string& where, std::size_t index) {
    Problem p;
    p.id = record.value("id", "csqa-" + std::to_string(index));
    const auto& question = record.at("question");
    p.text = question.at("stem").get<std::string>();
    p.answer_kind = AnswerKind::multiple_choice;
    for (const auto& choice : question.at("choices")) {
        p.choices.push_back(
            {choice.at("label").get<std::string>(), choice.at("text").get<std::string>()});
    }
    const std::string key = record.at("answerKey").get<std::string>();
    if (key.empty()) throw Error(Errc::format_error, where + ": empty answerKey");
    p.ground_truth = Answer::make_choice(key, key);
    return p;
}

Problem parse_generic_record(const json& record, std::size_t index) {
    Problem p;
    p.id = record.value("id", "item-" + std::to_string(index));
    p.text = record.at("question").get<std::string>();
    if (record.contains("choices") && record.at("choices").is_array() &&
        !record.at("choices").empty()) {
        p.answer_kind = AnswerKind::multiple_choice;
        for (const auto& choice : record.at("choices")) {
            if (choice.is_object()) {
                p.choices.push_back(
                    {choice.at("label").get<std::string>(), choice.at("text").get<std::string>()});
            } else {
                const std::string entry = choice.get<std::string>();
                std::string label(1, entry.empty() ? 'A' : entry[0]);
                std::size_t start = entry.size() > 1 && (entry[1] == ')' || entry[1] == '.') ? 2 : 1;
                while (start < entry.size() && entry[start] == ' ') ++start;
                p.choices.push_back({label, entry.substr(start)});
            }
        }
    }
    if (record.contains("answer") && !record.at("answer").is_null()) {
        const auto& answer = record.at("answer");
        if (p.answer_kind == AnswerKind::multiple_choice) {
            const std::string label = answer.get<std::string>();
            p.ground_truth = Answer::make_choice(label, label);
        } else if (answer.is_number()) {
            p.ground_truth = Answer::make_numeric(decimal_from_json_number(answer, p.id));
        } else {
            const std::string text = answer.get<std::string>();
            if (auto numeric = Decimal::parse(text)) {
                p.ground_truth = Answer::make_numeric(*numeric, text);
            } else {
                p.answer_kind = AnswerKind::free_text;
                p.ground_truth = Answer::make_text(text, text);
            }
        }
    }
    return p;
}

} // namespace

std::vector<Problem> load_benchmark(const std::string& path, BenchmarkFormat format,
                                    std::size_t limit) {
    std::vector<Problem> problems;
    switch (format) {
        case BenchmarkFormat::gsm8k_jsonl: {
            const auto records = read_jsonl(path);
            for (std::size_t i = 0; i < records.size(); ++i) {
                const std::string where = path + " record " + std::to_string(i);
                Problem p;
                p.id = "gsm8k-" + std::to_string(i);
                p.text = records[i].at("question").get<std::string>();
                p.answer_kind = AnswerKind::numeric;
                p.ground_truth = Answer::make_numeric(
                    gsm8k_final_value(records[i].at("answer").get<std::string>(), where));
                problems.push_back(std::move(p));
            }
            break;
        }
        case BenchmarkFormat::svamp_json: {
            const auto records = read_json_array(path);
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto& record = records[i];
                Problem p;
                p.id = record.value("ID", "svamp-" + std::to_string(i));
                std::string body = record.at("Body").get<std::string>();
                const std::string question = record.at("Question").get<std::string>();
                if (!body.empty() && body.back() != ' ' && body.back() != '\n') body += ' ';
                p.text = body + question;
                p.answer_kind = AnswerKind::numeric;
                p.ground_truth = Answer::make_numeric(
                    decimal_from_json_number(record.at("Answer"), p.id));
                problems.push_back(std::move(p));
            }
            break;
        }
        case BenchmarkFormat::addsub_json: {
            const auto records = read_json_array(path);
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto& record = records[i];
                Problem p;
                p.id = record.contains("iIndex")
                           ? "addsub-" + std::to_string(record.at("iIndex").get<std::int64_t>())
                           : "addsub-" + std::to_string(i);
                p.text = record.at("sQuestion").get<std::string>();
                p.answer_kind = AnswerKind::numeric;
                const auto& solutions = record.at("lSolutions");
                if (!solutions.is_array() || solutions.empty()) {
                    throw Error(Errc::format_error, p.id + ": lSolutions empty");
                }
                p.ground_truth =
                    Answer::make_numeric(decimal_from_json_number(solutions[0], p.id));
                problems.push_back(std::move(p));
            }
            break;
        }
        case BenchmarkFormat::aqua_jsonl: {
            const auto records = read_jsonl(path);
            for (std::size_t i = 0; i < records.size(); ++i) {
                problems.push_back(
                    parse_aqua_record(records[i], path + " record " + std::to_string(i), i));
            }
            break;
        }
        case BenchmarkFormat::csqa_jsonl: {
            const auto records = read_jsonl(path);
            for (std::size_t i = 0; i < records.size(); ++i) {
                problems.push_back(
                    parse_csqa_record(records[i], path + " record " + std::to_string(i), i));
            }
            break;
        }
        case BenchmarkFormat::generic_jsonl: {
            const auto records = read_jsonl(path);
            for (std::size_t i = 0; i < records.size(); ++i) {
                problems.push_back(parse_generic_record(records[i], i));
            }
            break;
        }
    }
    for (const auto& p : problems) {
        const auto issues = p.violations();
        if (!issues.empty()) {
            throw Error(Errc::format_error, p.id + ": " + issues.front());
        }
    }
    if (limit > 0 && problems.size() > limit) problems.resize(limit);
    return problems;
}

std::optional<ClotInstructSample> sample_from_trace(const Problem& problem,
                                                    const ReasoningTrace& trace,
                                                    double numeric_tolerance) {
    if (!problem.ground_truth || !trace.final_answer) return std::nullopt;
    const auto verdict =
        judge::compare_offline(*trace.final_answer, *problem.ground_truth, numeric_tolerance);
    if (!verdict.passed()) return std::nullopt;

    ClotInstructSample sample;
    sample.q_origin = problem.text;
    sample.a_gt = *problem.ground_truth;

    // Engine layers run top (max index) to bottom; samples index the top
    // layer as 0 and deepen from there. Only steps with a verification pair
    // qualify (one bidirectional instance per step).
    for (const auto& layer : trace.layers) {
        if (layer.states.empty()) continue;
        InstructLayer out;
        for (const auto& state : layer.states) {
            const VerificationRecord* record = nullptr;
            for (const auto& candidate : layer.verifications) {
                if (candidate.target_step == state.step_index) record = &candidate;
            }
            if (!record || record->verdict != VerificationVerdict::pass) continue;
            if (out.question.empty()) {
                out.question = state.question;
            } else if (out.question != state.question) {
                out.question += "\n" + state.question;
            }
            out.steps.push_back(state.derivation);
            out.verify_pairs.emplace_back(record->masked_question, record->original_value);
        }
        if (!out.steps.empty()) sample.layers.push_back(std::move(out));
    }
    // layer 0 must hold the original question's verified trajectory; a trace
    // whose top layer contributed no verified step cannot anchor the sample
    if (sample.layers.empty() || sample.layers.front().question != problem.text) {
        return std::nullopt;
    }
    sample.max_layer = static_cast<int>(sample.layers.size()) - 1;
    return sample;
}

std::optional<ClotInstructSample> build_instruct_sample(const Problem& problem,
                                                        const EngineConfig& config,
                                                        const engine::Engine& engine) {
    if (!problem.ground_truth) return std::nullopt;
    const ReasoningTrace trace = engine.solve(problem, config);
    if (!trace.verified_final) return std::nullopt;
    return sample_from_trace(problem, trace, config.numeric_tolerance);
}

std::vector<std::string> validate_sample(const ClotInstructSample& sample) {
    std::vector<std::string> out;
    if (sample.q_origin.empty()) out.push_back("q_origin is empty");
    if (!sample.a_gt.well_formed()) out.push_back("a_gt is malformed");
    for (std::size_t l = 0; l < sample.layers.size(); ++l) {
        const auto& layer = sample.layers[l];
        if (layer.verify_pairs.size() != layer.steps.size()) {
            out.push_back("verify_pairs/steps mismatch at layer " + std::to_string(l));
        }
        if (layer.question.empty()) out.push_back("empty question at layer " + std::to_string(l));
        for (const auto& [q_verify, a_verify] : layer.verify_pairs) {
            if (!a_verify.well_formed()) {
                out.push_back("unparseable a_verify at layer " + std::to_string(l));
            }
        }
    }
    if (sample.max_layer != static_cast<int>(sample.layers.size()) - 1) {
        out.push_back("max_layer inconsistent");
    }
    return out;
}

json sample_to_json(const ClotInstructSample& sample) {
    json j;
    j["schema_version"] = "clot.instruct.v1";
    j["q_origin"] = sample.q_origin;
    j["a_gt"] = answer_to_json(sample.a_gt);
    json layers = json::array();
    for (const auto& layer : sample.layers) {
        json l;
        l["q"] = layer.question;
        l["steps"] = layer.steps;
        json pairs = json::array();
        for (const auto& [q_verify, a_verify] : layer.verify_pairs) {
            pairs.push_back(json{{"q_verify", q_verify}, {"a_verify", answer_to_json(a_verify)}});
        }
        l["verify_pairs"] = std::move(pairs);
        layers.push_back(std::move(l));
    }
    j["layers"] = std::move(layers);
    j["max_layer"] = sample.max_layer;
    return j;
}

ClotInstructSample sample_from_json(const json& j) {
    ClotInstructSample sample;
    sample.q_origin = j.at("q_origin").get<std::string>();
    sample.a_gt = answer_from_json(j.at("a_gt"));
    for (const auto& l : j.at("layers")) {
        InstructLayer layer;
        layer.question = l.at("q").get<std::string>();
        for (const auto& step : l.at("steps")) layer.steps.push_back(step.get<std::string>());
        for (const auto& pair : l.at("verify_pairs")) {
            layer.verify_pairs.emplace_back(pair.at("q_verify").get<std::string>(),
                                            answer_from_json(pair.at("a_verify")));
        }
        sample.layers.push_back(std::move(layer));
    }
    sample.max_layer = j.at("max_layer").get<int>();
    return sample;
}

std::size_t write_instruct(const std::vector<ClotInstructSample>& samples,
                           const std::string& path) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto issues = validate_sample(samples[i]);
        if (!issues.empty()) {
            throw Error(Errc::format_error,
                        "sample " + std::to_string(i) + " invalid: " + issues.front());
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
    for (const auto& sample : samples) {
        out << sample_to_json(sample).dump() << "\n";
    }
    if (!out) throw Error(Errc::io_error, "short write to '" + path + "'");
    return samples.size();
}

std::vector<ClotInstructSample> read_instruct(const std::string& path) {
    std::vector<ClotInstructSample> out;
    for (const auto& record : read_jsonl(path)) {
        out.push_back(sample_from_json(record));
    }
    return out;
}

} // namespace clot::dataset
