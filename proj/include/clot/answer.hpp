// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

namespace clot {

// Exact decimal, string-backed. Benchmark answers are overwhelmingly
// integers; storing them as canonical digit strings keeps integer equality
// literal instead of hostage to binary-float parsing.
class Decimal {
public:
    // Parses [+-]?digits[.digits]?. No currency/grouping handling here;
    // surface normalization happens in the answer extractor.
    static std::optional<Decimal> parse(const std::string& text);

    // Convenience for trusted literals; throws Error(parse_failed) otherwise.
    static Decimal of(const std::string& literal);
    static Decimal of_int(long long v);

    const std::string& str() const { return canonical_; }
    bool is_integer() const;
    bool negative() const { return !canonical_.empty() && canonical_[0] == '-'; }
    double to_double() const;

    bool operator==(const Decimal& other) const { return canonical_ == other.canonical_; }
    bool operator!=(const Decimal& other) const { return canonical_ != other.canonical_; }

private:
    explicit Decimal(std::string canonical) : canonical_(std::move(canonical)) {}

    // Canonical form: optional '-', no leading zeros (except "0"), no
    // trailing fraction zeros, no trailing '.', never "-0".
    std::string canonical_;
};

enum class AnswerKind { numeric, multiple_choice, free_text };

const char* answer_kind_name(AnswerKind kind);
std::optional<AnswerKind> answer_kind_from_name(const std::string& name);

// One extracted or ground-truth answer. Exactly one value slot is set,
// matching `kind`; the verbatim tag contents survive in raw_span for audit.
struct Answer {
    AnswerKind kind = AnswerKind::numeric;
    std::optional<Decimal> numeric_value;
    std::optional<std::string> choice_label; // single uppercase letter
    std::optional<std::string> text_value;
    std::string raw_span;

    static Answer make_numeric(Decimal value, std::string raw_span = {});
    static Answer make_choice(std::string label, std::string raw_span = {});
    static Answer make_text(std::string value, std::string raw_span = {});

    // Kind-specific canonical value string: digits for numeric, uppercase
    // letter for choice, case/whitespace-normalized text otherwise. Used
    // for grouping (self-consistency majorities) and identity short-circuits.
    std::string canonical_value() const;

    // Structural validity: exactly one slot set and it matches kind.
    bool well_formed() const;

    bool operator==(const Answer& other) const;
};

// Lowercase + collapse internal whitespace + trim. Shared by the judge's
// identity short-circuit and free-text grouping.
std::string normalize_text(const std::string& text);

} // namespace clot
