// SPDX-License-Identifier: Apache-2.0
#include "clot/prompts.hpp"

#include "clot/error.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace clot::prompts {

namespace {

constexpr const char* kForwardBody =
    "{question}\n"
    "Let's think step by step.\n"
    "{format_instruction}";

constexpr const char* kForwardResolveBody =
    "{question}\n"
    "Let's think step by step. Please refer to the following sub-problems and sub-answers.\n"
    "{sub_qa}\n"
    "{format_instruction}";

constexpr const char* kMaskNumericBody =
    "Please replace one numerical value in the original problem with X and incorporate the "
    "answer as a known condition. Reply with only the rewritten problem.\n"
    "\n"
    "Original problem: {question}\n"
    "Answer: {answer}";

constexpr const char* kMaskEntityBody =
    "Please replace one key entity in the original problem with X and incorporate the "
    "answer as a known condition. Reply with only the rewritten problem.\n"
    "\n"
    "Original problem: {question}\n"
    "Answer: {answer}";

constexpr const char* kDecomposeBody =
    "You are tasked with breaking down a math problem reasoning process into sub-problems.\n"
    "\n"
    "Problem: {question}\n"
    "{failure_summary}\n"
    "List the sub-problems as q1, q2, q3, ... with one sub-problem per line. "
    "Each sub-problem must be self-contained.";

constexpr const char* kSemanticJudgeBody =
    "Are the following two answers synonyms or near-synonyms referring to the same thing? "
    "Reply with exactly \"yes\" or \"no\".\n"
    "\n"
    "Answer 1: {a}\n"
    "Answer 2: {b}";

constexpr const char* kSelfVerifyBody =
    "{question}\n"
    "Your previous answer was: {answer}\n"
    "If you are very confident about your answer, maintain your answer. "
    "Otherwise, update your answer.\n"
    "{format_instruction}";

constexpr const char* kFormatNumeric =
    "You can freely reason in your response, but please enclose the final answer within "
    "<answer></answer> tags(pure number without units and explanations)";

constexpr const char* kFormatChoice =
    "You can freely reason in your response, but please enclose the final option within "
    "<answer></answer> tags(pure uppercase option without explanations)";

constexpr const char* kFormatFreeText =
    "You can freely reason in your response, but please enclose the final answer within "
    "<answer></answer> tags(a short phrase without explanations)";

constexpr const char* kExtractionReminder =
    "Please enclose the final answer within <answer></answer> tags.";

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

} // namespace

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
    std::string out = body;
    for (const auto& [name, value] : bindings) {
        const std::string marker = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(marker, pos)) != std::string::npos) {
            out.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    for (const auto& required : required_placeholders) {
        if (!bindings.count(required)) {
            throw Error(Errc::format_error,
                        "template '" + name + "' missing binding for {" + required + "}");
        }
        if (out.find("{" + required + "}") != std::string::npos) {
            throw Error(Errc::format_error,
                        "template '" + name + "' left residual {" + required + "}");
        }
    }
    return out;
}

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    auto put = [&](const std::string& name, const char* body,
                   std::vector<std::string> placeholders) {
        set.templates_[name] = PromptTemplate{name, body, std::move(placeholders)};
    };
    put("forward", kForwardBody, {"question", "format_instruction"});
    put("forward_resolve", kForwardResolveBody, {"question", "sub_qa", "format_instruction"});
    put("mask_numeric", kMaskNumericBody, {"question", "answer"});
    put("mask_entity", kMaskEntityBody, {"question", "answer"});
    put("decompose", kDecomposeBody, {"question", "failure_summary"});
    put("semantic_judge", kSemanticJudgeBody, {"a", "b"});
    put("self_verify", kSelfVerifyBody, {"question", "answer", "format_instruction"});
    put("format_numeric", kFormatNumeric, {});
    put("format_choice", kFormatChoice, {});
    put("format_free_text", kFormatFreeText, {});
    put("extraction_reminder", kExtractionReminder, {});
    return set;
}

TemplateSet TemplateSet::with_overrides(const std::string& directory) {
    TemplateSet set = builtin();
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory)) {
        throw Error(Errc::io_error, "prompt override directory '" + directory + "' not found");
    }
    for (auto& [name, tmpl] : set.templates_) {
        const fs::path candidate = fs::path(directory) / (name + ".txt");
        if (!fs::exists(candidate)) continue;
        std::ifstream in(candidate);
        std::stringstream buffer;
        buffer << in.rdbuf();
        std::string body = buffer.str();
        // strip one trailing newline that most editors append
        if (!body.empty() && body.back() == '\n') body.pop_back();
        tmpl.body = std::move(body);
    }
    return set;
}

const PromptTemplate& TemplateSet::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(Errc::format_error, "no template named '" + name + "'");
    return it->second;
}

std::vector<std::string> TemplateSet::names() const {
    std::vector<std::string> out;
    for (const auto& [name, tmpl] : templates_) out.push_back(name);
    return out;
}

std::string Prompts::format_instruction(AnswerKind kind) const {
    switch (kind) {
        case AnswerKind::numeric: return templates_.get("format_numeric").body;
        case AnswerKind::multiple_choice: return templates_.get("format_choice").body;
        case AnswerKind::free_text: return templates_.get("format_free_text").body;
    }
    return templates_.get("format_numeric").body;
}

std::string question_block(const Problem& problem) {
    if (problem.choices.empty()) return problem.text;
    std::string out = problem.text + "\nOptions:";
    for (const auto& choice : problem.choices) {
        out += "\n" + choice.label + ") " + choice.text;
    }
    return out;
}

PromptRequest Prompts::render_forward(const Problem& problem, const std::vector<SubQA>* sub_answers,
                                      std::optional<PromptTag> tag_override) const {
    PromptRequest request;
    if (sub_answers && !sub_answers->empty()) {
        std::string listing;
        for (std::size_t i = 0; i < sub_answers->size(); ++i) {
            const auto& qa = (*sub_answers)[i];
            if (!qa.answer.well_formed()) {
                throw Error(Errc::config_invalid, "sub-answer " + std::to_string(i + 1) + " is unset");
            }
            if (i > 0) listing += "\n";
            listing += "q" + std::to_string(i + 1) + ": " + qa.question;
            listing += "\na" + std::to_string(i + 1) + ": " + qa.answer.raw_span;
        }
        request.user = templates_.get("forward_resolve")
                           .render({{"question", question_block(problem)},
                                    {"sub_qa", listing},
                                    {"format_instruction", format_instruction(problem.answer_kind)}});
        request.tag = tag_override.value_or(PromptTag::resolve);
    } else {
        request.user = templates_.get("forward").render(
            {{"question", question_block(problem)},
             {"format_instruction", format_instruction(problem.answer_kind)}});
        request.tag = tag_override.value_or(PromptTag::forward);
    }
    return request;
}

PromptRequest Prompts::render_mask(const Problem& problem, const Answer& answer) const {
    if (!answer.well_formed() || answer.raw_span.empty()) {
        throw Error(Errc::config_invalid, "render_mask needs a set answer with a raw span");
    }
    const char* which =
        problem.answer_kind == AnswerKind::numeric ? "mask_numeric" : "mask_entity";
    PromptRequest request;
    request.user = templates_.get(which).render(
        {{"question", question_block(problem)}, {"answer", answer.raw_span}});
    request.tag = PromptTag::mask;
    return request;
}

std::vector<NumericToken> find_numeric_tokens(const std::string& text) {
    std::vector<NumericToken> out;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (!std::isdigit(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        bool negative = false;
        if (start > 0 && text[start - 1] == '-' &&
            (start == 1 || !std::isalnum(static_cast<unsigned char>(text[start - 2])))) {
            negative = true;
        }
        std::string digits;
        while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
        // thousands groups: ",ddd" not followed by a fourth digit
        auto digit_at = [&](std::size_t k) {
            return k < n && std::isdigit(static_cast<unsigned char>(text[k]));
        };
        while (i < n && text[i] == ',' && digit_at(i + 1) && digit_at(i + 2) && digit_at(i + 3) &&
               !digit_at(i + 4)) {
            digits += text.substr(i + 1, 3);
            i += 4;
        }
        std::string fraction;
        if (i + 1 < n && text[i] == '.' && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            ++i;
            while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) fraction += text[i++];
        }
        std::size_t surface_begin = start;
        if (negative) surface_begin -= 1;
        if (surface_begin > 0 && text[surface_begin - 1] == '$') surface_begin -= 1;
        std::size_t end = i;
        if (end < n && text[end] == '%') ++end;

        std::string literal = (negative ? "-" : "") + digits;
        if (!fraction.empty()) literal += "." + fraction;
        if (auto value = Decimal::parse(literal)) {
            out.push_back({text.substr(surface_begin, end - surface_begin), *value, surface_begin});
        }
        i = end;
    }
    return out;
}

namespace {

// A sentence that only asks for X ("What is X?", "What's the X?") is the
// conventional closing of a masked problem, not a second slot.
bool is_ask_for_x_sentence(const std::string& text, std::size_t begin, std::size_t end) {
    bool saw_x = false;
    std::size_t i = begin;
    while (i < end) {
        while (i < end && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < end && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '\'')) {
            ++i;
        }
        if (i == start) break;
        std::string word = text.substr(start, i - start);
        for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (word == "x") {
            saw_x = true;
        } else if (word != "what" && word != "what's" && word != "whats" && word != "is" &&
                   word != "the") {
            return false;
        }
    }
    return saw_x;
}

// Positions where X appears as a standalone masked slot; X inside a pure
// ask-for-X closing sentence does not count.
std::vector<std::size_t> find_mask_slots(const std::string& text) {
    std::vector<std::pair<std::size_t, std::size_t>> ignored;
    std::size_t sentence_begin = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        const bool boundary =
            i == text.size() || text[i] == '.' || text[i] == '?' || text[i] == '!';
        if (!boundary) continue;
        if (i > sentence_begin && is_ask_for_x_sentence(text, sentence_begin, i)) {
            ignored.emplace_back(sentence_begin, i);
        }
        sentence_begin = i + 1;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != 'X') continue;
        const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        const bool right_ok =
            i + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1]));
        if (!left_ok || !right_ok) continue;
        const bool in_ask = std::any_of(ignored.begin(), ignored.end(), [&](const auto& range) {
            return i >= range.first && i < range.second;
        });
        if (!in_ask) out.push_back(i);
    }
    return out;
}

struct WordToken {
    std::string text;
    bool ends_sentence = false;
};

std::vector<WordToken> word_tokens(const std::string& text) {
    std::vector<WordToken> out;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        bool sentence_end = false;
        std::size_t begin = 0, end = current.size();
        auto is_edge = [](char c) {
            return std::ispunct(static_cast<unsigned char>(c)) && c != '$' && c != '%';
        };
        while (begin < end && is_edge(current[begin])) ++begin;
        while (end > begin && is_edge(current[end - 1])) {
            if (current[end - 1] == '.' || current[end - 1] == '?' || current[end - 1] == '!') {
                sentence_end = true;
            }
            --end;
        }
        if (end > begin) out.push_back({current.substr(begin, end - begin), sentence_end});
        current.clear();
    };
    for (char raw : text) {
        if (std::isspace(static_cast<unsigned char>(raw))) {
            flush();
            continue;
        }
        current += raw;
    }
    flush();
    return out;
}

bool tokens_match_at(const std::vector<WordToken>& haystack, std::size_t at,
                     const std::vector<WordToken>& needle) {
    if (at + needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i < needle.size(); ++i) {
        if (haystack[at + i].text != needle[i].text) return false;
    }
    return true;
}

// Aligns the X slot in the masked token stream back onto the original
// problem's tokens; returns the original tokens the mask replaced.
std::optional<std::string> align_masked_span(const std::string& original_text,
                                             const std::string& masked_text) {
    std::vector<WordToken> original = word_tokens(original_text);
    std::vector<WordToken> masked = word_tokens(masked_text);
    auto x_it = std::find_if(masked.begin(), masked.end(),
                             [](const WordToken& t) { return t.text == "X"; });
    if (x_it == masked.end()) return std::nullopt;
    const std::size_t x_index = static_cast<std::size_t>(x_it - masked.begin());

    std::size_t span_begin = std::string::npos;
    for (int pre_len = static_cast<int>(std::min<std::size_t>(3, x_index)); pre_len >= 0; --pre_len) {
        std::vector<WordToken> pre(masked.begin() + (x_index - pre_len), masked.begin() + x_index);
        for (std::size_t p = 0; p + pre.size() <= original.size(); ++p) {
            if (tokens_match_at(original, p, pre)) {
                span_begin = p + pre.size();
                break;
            }
        }
        if (span_begin != std::string::npos) break;
        if (pre_len == 0) span_begin = 0;
    }
    if (span_begin >= original.size()) return std::nullopt;

    auto join = [&](std::size_t begin, std::size_t end) {
        std::string out;
        for (std::size_t k = begin; k < end; ++k) {
            if (!out.empty()) out += ' ';
            out += original[k].text;
        }
        return out;
    };

    const std::size_t post_available = masked.size() - x_index - 1;
    for (int post_len = static_cast<int>(std::min<std::size_t>(3, post_available)); post_len >= 1;
         --post_len) {
        std::vector<WordToken> post(masked.begin() + x_index + 1,
                                    masked.begin() + x_index + 1 + post_len);
        for (std::size_t q = span_begin; q + post.size() <= original.size(); ++q) {
            if (tokens_match_at(original, q, post)) {
                if (q == span_begin) return std::nullopt; // empty span: X aligns to nothing
                return join(span_begin, q);
            }
        }
    }
    // no post context survives (the mask cut the sentence short): take the
    // rest of the original sentence
    std::size_t span_end = span_begin;
    while (span_end < original.size()) {
        ++span_end;
        if (original[span_end - 1].ends_sentence) break;
    }
    return join(span_begin, span_end);
}

} // namespace

MaskedProblem Prompts::parse_masked(const std::string& text, const Problem& problem,
                                    const Answer& injected_answer) const {
    std::string masked_text = trim(text);
    const auto slots = find_mask_slots(masked_text);
    if (slots.empty()) throw Error(Errc::no_x_found, "mask output contains no standalone X");
    if (slots.size() > 1) {
        throw Error(Errc::multiple_x_found,
                    "mask output contains " + std::to_string(slots.size()) + " X slots");
    }

    std::optional<Answer> masked_value;
    if (problem.answer_kind == AnswerKind::numeric) {
        // Multiset diff of numeric values: the one original value missing
        // from the masked text is the masked condition.
        std::map<std::string, int> counts;
        std::map<std::string, std::string> surfaces;
        for (const auto& token : find_numeric_tokens(problem.text)) {
            counts[token.value.str()] += 1;
            surfaces.emplace(token.value.str(), token.surface);
        }
        for (const auto& token : find_numeric_tokens(masked_text)) {
            auto it = counts.find(token.value.str());
            if (it != counts.end()) it->second -= 1;
        }
        std::vector<std::string> missing;
        for (const auto& [value, count] : counts) {
            if (count > 0) missing.push_back(value);
        }
        if (missing.size() == 1) {
            masked_value = Answer::make_numeric(Decimal::of(missing[0]), surfaces[missing[0]]);
        }
    }
    if (!masked_value) {
        auto span = align_masked_span(problem.text, masked_text);
        if (span) {
            if (auto numeric = Decimal::parse(*span)) {
                masked_value = Answer::make_numeric(*numeric, *span);
            } else if (auto tokens = find_numeric_tokens(*span);
                       problem.answer_kind == AnswerKind::numeric && tokens.size() == 1) {
                masked_value = Answer::make_numeric(tokens[0].value, tokens[0].surface);
            } else if (problem.answer_kind != AnswerKind::numeric) {
                masked_value = Answer::make_text(*span);
            }
        }
    }
    if (!masked_value) {
        throw Error(Errc::masked_value_unresolvable, "cannot align X to an original condition");
    }

    // The verification question is only solvable if the produced answer is
    // stated in it; append it when the model forgot.
    const std::string canonical = injected_answer.kind == AnswerKind::numeric && injected_answer.numeric_value
                                      ? injected_answer.numeric_value->str()
                                      : injected_answer.raw_span;
    if (masked_text.find(injected_answer.raw_span) == std::string::npos &&
        (canonical.empty() || masked_text.find(canonical) == std::string::npos)) {
        masked_text += " Knowing that the answer is " + injected_answer.raw_span + ". What is X?";
    }

    return MaskedProblem{masked_text, *masked_value, injected_answer};
}

PromptRequest Prompts::render_decompose(const Problem& problem,
                                        const std::string& failed_trace_summary) const {
    PromptRequest request;
    request.user = templates_.get("decompose")
                       .render({{"question", question_block(problem)},
                                {"failure_summary", failed_trace_summary}});
    request.tag = PromptTag::decompose;
    return request;
}

ParsedSubproblems Prompts::parse_subproblems(const std::string& text, const Problem& parent,
                                             int cap) const {
    if (cap < 1) throw Error(Errc::config_invalid, "subproblem cap must be >= 1");

    struct Marker {
        std::size_t begin; // marker start
        std::size_t end;   // first char of the item text
    };
    std::vector<Marker> markers;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        const bool line_start = i == 0 || text[i - 1] == '\n';
        std::size_t j = i;
        if (c == 'q' || c == 'Q') {
            const bool word_start = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
            if (!word_start) continue;
            ++j;
            std::size_t digits = 0;
            while (j < n && std::isdigit(static_cast<unsigned char>(text[j])) && digits < 3) {
                ++j;
                ++digits;
            }
            if (digits == 0) continue;
            if (j < n && (text[j] == '.' || text[j] == ')' || text[j] == ':')) ++j;
            else continue;
        } else if (std::isdigit(static_cast<unsigned char>(c)) && line_start) {
            std::size_t digits = 0;
            while (j < n && std::isdigit(static_cast<unsigned char>(text[j])) && digits < 3) {
                ++j;
                ++digits;
            }
            if (j < n && (text[j] == '.' || text[j] == ')')) ++j;
            else continue;
            if (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) continue; // e.g. "3.5"
        } else {
            continue;
        }
        while (j < n && (text[j] == ' ' || text[j] == '\t')) ++j;
        markers.push_back({i, j});
        i = j > i ? j - 1 : i;
    }
    if (markers.empty()) throw Error(Errc::no_items_found, "no enumerated sub-problems in output");

    std::vector<std::string> items;
    for (std::size_t m = 0; m < markers.size(); ++m) {
        const std::size_t begin = markers[m].end;
        const std::size_t end = m + 1 < markers.size() ? markers[m + 1].begin : n;
        std::string item = trim(text.substr(begin, end - begin));
        if (!item.empty()) items.push_back(std::move(item));
    }
    if (items.empty()) throw Error(Errc::no_items_found, "enumeration markers with no item text");

    ParsedSubproblems out;
    out.truncated = static_cast<int>(items.size()) > cap;
    const std::size_t take = std::min<std::size_t>(items.size(), static_cast<std::size_t>(cap));
    for (std::size_t k = 0; k < take; ++k) {
        Problem sub;
        sub.id = parent.id + ".sub" + std::to_string(k + 1);
        sub.text = items[k];
        sub.answer_kind = AnswerKind::numeric;
        out.problems.push_back(std::move(sub));
    }
    return out;
}

PromptRequest Prompts::render_semantic_judge(const Answer& a, const Answer& b) const {
    PromptRequest request;
    request.user = templates_.get("semantic_judge")
                       .render({{"a", a.raw_span.empty() ? a.canonical_value() : a.raw_span},
                                {"b", b.raw_span.empty() ? b.canonical_value() : b.raw_span}});
    request.tag = PromptTag::semantic_judge;
    return request;
}

std::string Prompts::extraction_reminder() const {
    return templates_.get("extraction_reminder").body;
}

namespace {

std::string normalize_numeric_span(const std::string& span) {
    std::string out;
    out.reserve(span.size());
    for (std::size_t i = 0; i < span.size(); ++i) {
        const char c = span[i];
        if (c == '$' || c == ',') continue;
        // strip common multibyte currency marks
        if (static_cast<unsigned char>(c) == 0xC2 && i + 1 < span.size() &&
            (static_cast<unsigned char>(span[i + 1]) == 0xA3 ||  // £
             static_cast<unsigned char>(span[i + 1]) == 0xA5)) { // ¥
            ++i;
            continue;
        }
        if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < span.size() &&
            static_cast<unsigned char>(span[i + 1]) == 0x82 &&
            static_cast<unsigned char>(span[i + 2]) == 0xAC) { // €
            i += 2;
            continue;
        }
        out += c;
    }
    out = trim(out);
    while (!out.empty() && (out.back() == '%' || out.back() == '.')) out.pop_back();
    return trim(out);
}

} // namespace

Answer extract_answer(const std::string& text, AnswerKind kind) {
    const std::string open = "<answer>";
    const std::string close = "</answer>";
    std::size_t best_begin = std::string::npos;
    std::size_t best_end = std::string::npos;
    std::size_t search = 0;
    while (true) {
        const std::size_t tag = text.find(open, search);
        if (tag == std::string::npos) break;
        const std::size_t content = tag + open.size();
        const std::size_t end = text.find(close, content);
        if (end == std::string::npos) break; // unterminated: not well-formed
        best_begin = content;
        best_end = end;
        search = end + close.size();
    }
    if (best_begin == std::string::npos) {
        throw Error(Errc::no_tag_found, "no well-formed <answer></answer> span");
    }
    const std::string raw = trim(text.substr(best_begin, best_end - best_begin));

    switch (kind) {
        case AnswerKind::numeric: {
            const std::string normalized = normalize_numeric_span(raw);
            auto value = Decimal::parse(normalized);
            if (!value) {
                throw Error(Errc::parse_failed, "tag contents '" + raw + "' are not a number");
            }
            return Answer::make_numeric(*value, raw);
        }
        case AnswerKind::multiple_choice: {
            std::string label = trim(raw);
            while (!label.empty() &&
                   (label.back() == '.' || label.back() == ')' || label.back() == ':')) {
                label.pop_back();
            }
            if (!label.empty() && label.front() == '(') label.erase(label.begin());
            label = trim(label);
            if (label.size() != 1 || !std::isalpha(static_cast<unsigned char>(label[0]))) {
                throw Error(Errc::parse_failed, "tag contents '" + raw + "' are not a single option");
            }
            label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
            return Answer::make_choice(label, raw);
        }
        case AnswerKind::free_text: {
            if (raw.empty()) throw Error(Errc::parse_failed, "empty answer tag");
            return Answer::make_text(raw, raw);
        }
    }
    throw Error(Errc::parse_failed, "unreachable answer kind");
}

} // namespace clot::prompts
