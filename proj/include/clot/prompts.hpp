// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/backend.hpp"
#include "clot/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace clot::prompts {

struct PromptTemplate {
    std::string name;
    std::string body; // named {placeholder} slots
    std::vector<std::string> required_placeholders;

    // Throws Error(format_error) if a required placeholder is unbound or a
    // registered placeholder marker survives rendering.
    std::string render(const std::map<std::string, std::string>& bindings) const;
};

// The protocol's template set. Built-ins are compiled in; any template can
// be overridden by a <name>.txt file in a directory, so prompt experiments
// don't require rebuilds.
class TemplateSet {
public:
    static TemplateSet builtin();
    static TemplateSet with_overrides(const std::string& directory);

    const PromptTemplate& get(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

// Original problem text with exactly one condition replaced by a standalone
// X and the produced answer stated as a known condition.
struct MaskedProblem {
    std::string text;
    Answer masked_value;
    Answer injected_answer;
};

struct SubQA {
    std::string question;
    Answer answer;
};

struct ParsedSubproblems {
    std::vector<Problem> problems;
    bool truncated = false;
};

class Prompts {
public:
    explicit Prompts(TemplateSet templates = TemplateSet::builtin())
        : templates_(std::move(templates)) {}

    // Forward chain-of-thought ask. With sub_answers set, renders the
    // re-solve variant that lists the verified sub-QA pairs before the
    // answer-format instruction (and tags the request `resolve` unless the
    // caller overrides, e.g. `backward_solve` for masked problems).
    PromptRequest render_forward(const Problem& problem,
                                 const std::vector<SubQA>* sub_answers = nullptr,
                                 std::optional<PromptTag> tag_override = std::nullopt) const;

    // Ask the model to mask one condition with X and state `answer` as known.
    // Numeric problems mask a numerical value; other kinds mask a key entity.
    PromptRequest render_mask(const Problem& problem, const Answer& answer) const;

    // Reads the mask-construction output. Errors: no_x_found,
    // multiple_x_found, masked_value_unresolvable.
    MaskedProblem parse_masked(const std::string& text, const Problem& problem,
                               const Answer& injected_answer) const;

    PromptRequest render_decompose(const Problem& problem,
                                   const std::string& failed_trace_summary) const;

    // Enumerated sub-problems ("q1:", "1.", "1)"). Order preserved; at most
    // `cap` items (truncation flagged). Errors: no_items_found.
    ParsedSubproblems parse_subproblems(const std::string& text, const Problem& parent,
                                        int cap = 6) const;

    PromptRequest render_semantic_judge(const Answer& a, const Answer& b) const;

    // Reminder appended when re-asking after a missing answer tag.
    std::string extraction_reminder() const;

    const TemplateSet& templates() const { return templates_; }

private:
    std::string format_instruction(AnswerKind kind) const;

    TemplateSet templates_;
};

// Takes the LAST well-formed <answer>…</answer> span. Numeric contents are
// normalized (currency symbols and thousands separators stripped) and
// parsed as a signed decimal; choice contents must reduce to one letter.
// Errors: no_tag_found, parse_failed.
Answer extract_answer(const std::string& text, AnswerKind kind);

// Problem text plus the lettered options block, when present.
std::string question_block(const Problem& problem);

// Numeric surface forms found in free text, with their parsed values.
// Handles "$5", "60%", "1,200", "3.5".
struct NumericToken {
    std::string surface;
    Decimal value;
    std::size_t offset = 0;
};
std::vector<NumericToken> find_numeric_tokens(const std::string& text);

} // namespace clot::prompts
