// SPDX-License-Identifier: Apache-2.0
#include "clot/answer.hpp"

#include "clot/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace clot {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::transport_exhausted: return "transport_exhausted";
        case Errc::auth_failed: return "auth_failed";
        case Errc::malformed_response: return "malformed_response";
        case Errc::script_miss: return "script_miss";
        case Errc::no_tag_found: return "no_tag_found";
        case Errc::parse_failed: return "parse_failed";
        case Errc::no_x_found: return "no_x_found";
        case Errc::multiple_x_found: return "multiple_x_found";
        case Errc::masked_value_unresolvable: return "masked_value_unresolvable";
        case Errc::no_items_found: return "no_items_found";
        case Errc::kind_mismatch: return "kind_mismatch";
        case Errc::missing_logprobs: return "missing_logprobs";
        case Errc::overflow: return "overflow";
        case Errc::config_invalid: return "config_invalid";
        case Errc::io_error: return "io_error";
        case Errc::format_error: return "format_error";
        case Errc::length_mismatch: return "length_mismatch";
    }
    return "unknown";
}

std::optional<Decimal> Decimal::parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string int_part;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        int_part += text[pos++];
    }
    std::string frac_part;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            frac_part += text[pos++];
        }
    }
    if (pos != text.size()) return std::nullopt;
    if (int_part.empty() && frac_part.empty()) return std::nullopt;

    // canonicalize
    std::size_t first = int_part.find_first_not_of('0');
    int_part = first == std::string::npos ? "0" : int_part.substr(first);
    if (int_part.empty()) int_part = "0";
    std::size_t last = frac_part.find_last_not_of('0');
    frac_part = last == std::string::npos ? "" : frac_part.substr(0, last + 1);

    std::string canonical;
    if (negative && !(int_part == "0" && frac_part.empty())) canonical += '-';
    canonical += int_part;
    if (!frac_part.empty()) {
        canonical += '.';
        canonical += frac_part;
    }
    return Decimal(std::move(canonical));
}

Decimal Decimal::of(const std::string& literal) {
    auto parsed = parse(literal);
    if (!parsed) throw Error(Errc::parse_failed, "not a decimal: '" + literal + "'");
    return *parsed;
}

Decimal Decimal::of_int(long long v) { return of(std::to_string(v)); }

bool Decimal::is_integer() const { return canonical_.find('.') == std::string::npos; }

double Decimal::to_double() const { return std::strtod(canonical_.c_str(), nullptr); }

const char* answer_kind_name(AnswerKind kind) {
    switch (kind) {
        case AnswerKind::numeric: return "numeric";
        case AnswerKind::multiple_choice: return "multiple_choice";
        case AnswerKind::free_text: return "free_text";
    }
    return "numeric";
}

std::optional<AnswerKind> answer_kind_from_name(const std::string& name) {
    if (name == "numeric") return AnswerKind::numeric;
    if (name == "multiple_choice") return AnswerKind::multiple_choice;
    if (name == "free_text") return AnswerKind::free_text;
    return std::nullopt;
}

Answer Answer::make_numeric(Decimal value, std::string raw_span) {
    Answer a;
    a.kind = AnswerKind::numeric;
    a.raw_span = raw_span.empty() ? value.str() : std::move(raw_span);
    a.numeric_value = std::move(value);
    return a;
}

Answer Answer::make_choice(std::string label, std::string raw_span) {
    Answer a;
    a.kind = AnswerKind::multiple_choice;
    a.raw_span = raw_span.empty() ? label : std::move(raw_span);
    a.choice_label = std::move(label);
    return a;
}

Answer Answer::make_text(std::string value, std::string raw_span) {
    Answer a;
    a.kind = AnswerKind::free_text;
    a.raw_span = raw_span.empty() ? value : std::move(raw_span);
    a.text_value = std::move(value);
    return a;
}

std::string Answer::canonical_value() const {
    switch (kind) {
        case AnswerKind::numeric:
            return numeric_value ? numeric_value->str() : std::string();
        case AnswerKind::multiple_choice: {
            std::string label = choice_label.value_or("");
            std::transform(label.begin(), label.end(), label.begin(),
                           [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            return label;
        }
        case AnswerKind::free_text:
            return normalize_text(text_value.value_or(""));
    }
    return {};
}

bool Answer::well_formed() const {
    const int set = (numeric_value ? 1 : 0) + (choice_label ? 1 : 0) + (text_value ? 1 : 0);
    if (set != 1) return false;
    switch (kind) {
        case AnswerKind::numeric: return numeric_value.has_value();
        case AnswerKind::multiple_choice:
            return choice_label.has_value() && choice_label->size() == 1 &&
                   std::isalpha(static_cast<unsigned char>((*choice_label)[0]));
        case AnswerKind::free_text: return text_value.has_value();
    }
    return false;
}

bool Answer::operator==(const Answer& other) const {
    return kind == other.kind && numeric_value == other.numeric_value &&
           choice_label == other.choice_label && text_value == other.text_value &&
           raw_span == other.raw_span;
}

std::string normalize_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

} // namespace clot
