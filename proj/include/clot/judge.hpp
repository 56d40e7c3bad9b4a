// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/backend.hpp"
#include "clot/core.hpp"
#include "clot/prompts.hpp"

namespace clot::judge {

enum class Method { exact_numeric, tolerant_numeric, choice_letter, semantic };

struct Verdict {
    VerificationVerdict outcome = VerificationVerdict::inconclusive;
    Method method = Method::exact_numeric;
    std::string detail;

    bool passed() const { return outcome == VerificationVerdict::pass; }
};

// Integers compare exactly; once either side is non-integer the comparison
// is tolerant: |a-b| <= tolerance * max(1, |a|, |b|). Throws
// Error(kind_mismatch) when either answer is not numeric.
Verdict compare_numeric(const Answer& a, const Answer& b, double tolerance);

// Case-normalized letter equality.
Verdict compare_choice(const Answer& a, const Answer& b);

// Synonym equivalence via one yes/no semantic_judge completion. Equal
// normalized strings short-circuit to pass with zero backend calls; backend
// failures surface as inconclusive, never as exceptions.
Verdict compare_semantic(const Answer& a, const Answer& b, Backend& backend,
                         const prompts::Prompts& prompts);

// Kind-dispatched comparison without a backend: free_text falls back to
// normalized string equality. Used by offline metrics and the trace
// validator.
Verdict compare_offline(const Answer& a, const Answer& b, double tolerance);

} // namespace clot::judge
