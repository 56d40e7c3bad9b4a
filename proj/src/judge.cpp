// SPDX-License-Identifier: Apache-2.0
#include "clot/judge.hpp"

#include "clot/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace clot::judge {

Verdict compare_numeric(const Answer& a, const Answer& b, double tolerance) {
    if (a.kind != AnswerKind::numeric || b.kind != AnswerKind::numeric) {
        throw Error(Errc::kind_mismatch, "compare_numeric needs two numeric answers");
    }
    if (!a.numeric_value || !b.numeric_value) {
        return {VerificationVerdict::inconclusive, Method::exact_numeric, "missing numeric value"};
    }
    const Decimal& x = *a.numeric_value;
    const Decimal& y = *b.numeric_value;
    if (x.is_integer() && y.is_integer()) {
        const bool equal = x == y;
        return {equal ? VerificationVerdict::pass : VerificationVerdict::fail,
                Method::exact_numeric, x.str() + (equal ? " = " : " != ") + y.str()};
    }
    const double xd = x.to_double();
    const double yd = y.to_double();
    const double scale = std::max({1.0, std::abs(xd), std::abs(yd)});
    const bool within = std::abs(xd - yd) <= tolerance * scale;
    return {within ? VerificationVerdict::pass : VerificationVerdict::fail,
            Method::tolerant_numeric,
            x.str() + (within ? " ~= " : " !~= ") + y.str()};
}

Verdict compare_choice(const Answer& a, const Answer& b) {
    if (a.kind != AnswerKind::multiple_choice || b.kind != AnswerKind::multiple_choice) {
        throw Error(Errc::kind_mismatch, "compare_choice needs two multiple_choice answers");
    }
    if (!a.choice_label || !b.choice_label) {
        return {VerificationVerdict::inconclusive, Method::choice_letter, "missing choice label"};
    }
    const std::string x = a.canonical_value();
    const std::string y = b.canonical_value();
    const bool equal = x == y;
    return {equal ? VerificationVerdict::pass : VerificationVerdict::fail, Method::choice_letter,
            x + (equal ? " = " : " != ") + y};
}

Verdict compare_semantic(const Answer& a, const Answer& b, Backend& backend,
                         const prompts::Prompts& prompts) {
    if (a.kind != AnswerKind::free_text || b.kind != AnswerKind::free_text) {
        throw Error(Errc::kind_mismatch, "compare_semantic needs two free_text answers");
    }
    if (a.canonical_value() == b.canonical_value()) {
        return {VerificationVerdict::pass, Method::semantic, "identical after normalization"};
    }
    Completion completion;
    try {
        completion = backend.complete(prompts.render_semantic_judge(a, b));
    } catch (const Error& e) {
        return {VerificationVerdict::inconclusive, Method::semantic,
                std::string("backend error: ") + e.what()};
    }
    std::string reply = normalize_text(completion.text);
    // first word decides
    const auto space = reply.find(' ');
    if (space != std::string::npos) reply = reply.substr(0, space);
    while (!reply.empty() && std::ispunct(static_cast<unsigned char>(reply.back()))) reply.pop_back();
    if (reply == "yes") return {VerificationVerdict::pass, Method::semantic, "judged synonym"};
    if (reply == "no") return {VerificationVerdict::fail, Method::semantic, "judged distinct"};
    return {VerificationVerdict::inconclusive, Method::semantic,
            "unparseable judge reply: '" + completion.text.substr(0, 40) + "'"};
}

Verdict compare_offline(const Answer& a, const Answer& b, double tolerance) {
    if (a.kind != b.kind) {
        return {VerificationVerdict::fail, Method::semantic, "kind mismatch"};
    }
    switch (a.kind) {
        case AnswerKind::numeric: return compare_numeric(a, b, tolerance);
        case AnswerKind::multiple_choice: return compare_choice(a, b);
        case AnswerKind::free_text: {
            const bool equal = a.canonical_value() == b.canonical_value();
            return {equal ? VerificationVerdict::pass : VerificationVerdict::fail, Method::semantic,
                    equal ? "identical after normalization" : "texts differ"};
        }
    }
    return {VerificationVerdict::inconclusive, Method::semantic, "unreachable"};
}

} // namespace clot::judge
