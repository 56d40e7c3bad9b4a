// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/core.hpp"
#include "clot/scripted_backend.hpp"

#include <memory>
#include <string>
#include <vector>

namespace clot::testing {

inline const char* kKylarText =
    "Kylar went to the store to buy glasses for his new apartment. One glass costs $5, but "
    "every second glass costs only 60% of the price. Kylar wants to buy 16 glasses. How much "
    "does he need to pay?";

inline Problem kylar_problem() {
    Problem p;
    p.id = "kylar";
    p.text = kKylarText;
    p.answer_kind = AnswerKind::numeric;
    p.ground_truth = Answer::make_numeric(Decimal::of("64"));
    return p;
}

inline std::string kylar_masked(const std::string& amount) {
    return "Kylar went to the store to buy glasses for his new apartment. One glass costs X, "
           "but every second glass costs only 60% of the price. Kylar wants to buy 16 glasses. "
           "Knowing that he need to pay $" +
           amount + " for them. What's the X?";
}

// Happy path: forward answer verifies on the first cycle.
inline std::vector<ScriptEntry> kylar_success_script() {
    std::vector<ScriptEntry> script;
    script.push_back({PromptTag::forward, ScriptKeyMode::contains, "Kylar went to the store",
                      {"Odd glasses cost $5 and even ones $3, so 8*5 + 8*3 = 64. "
                       "<answer>64</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::mask, ScriptKeyMode::contains, "Kylar went to the store",
                      {kylar_masked("64")},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::backward_solve, ScriptKeyMode::contains, "pay $64 for them",
                      {"Each pair costs X + 0.6X; 8 pairs cost 64, so X = 5. <answer>5</answer>"},
                      std::nullopt,
                      {}});
    return script;
}

// Failure path: wrong first answer, failed verification, decomposition,
// verified sub-problems, re-solve, re-verify.
inline std::vector<ScriptEntry> kylar_recovery_script() {
    const std::string sub1 =
        "Kylar buys 8 glasses at the full price of $5 each. How much do they cost in total?";
    const std::string sub2 =
        "Kylar buys 8 glasses at 60% of the full price of $5 each. How much do they cost in "
        "total?";
    std::vector<ScriptEntry> script;
    script.push_back({PromptTag::forward, ScriptKeyMode::contains, "Kylar went to the store",
                      {"16 glasses at $6 average would be 96. <answer>96</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::mask, ScriptKeyMode::contains, "Kylar went to the store",
                      {kylar_masked("96"), kylar_masked("64")},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::backward_solve, ScriptKeyMode::contains, "pay $96 for them",
                      {"96 over 16 glasses would need X = 10. <answer>10</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::backward_solve, ScriptKeyMode::contains, "pay $64 for them",
                      {"8 pairs at 1.6X = 64 means X = 5. <answer>5</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::decompose, ScriptKeyMode::contains, "Kylar went to the store",
                      {"q1: " + sub1 + "\nq2: " + sub2},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::forward, ScriptKeyMode::contains,
                      "8 glasses at the full price",
                      {"8 * 5 = 40. <answer>40</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::mask, ScriptKeyMode::contains, "8 glasses at the full price",
                      {"Kylar buys 8 glasses at the full price of X each. Knowing that they cost "
                       "$40 in total. What is X?"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::backward_solve, ScriptKeyMode::contains,
                      "they cost $40 in total",
                      {"40 split over 8 glasses is X = 5. <answer>5</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::forward, ScriptKeyMode::contains, "8 glasses at 60%",
                      {"60% of $5 is $3, and 8 * 3 = 24. <answer>24</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::mask, ScriptKeyMode::contains, "8 glasses at 60%",
                      {"Kylar buys 8 glasses at X% of the full price of $5 each. Knowing that "
                       "they cost $24 in total. What is X?"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::backward_solve, ScriptKeyMode::contains,
                      "they cost $24 in total",
                      {"24 over 8 glasses is $3, which is X = 60 percent of 5. "
                       "<answer>60</answer>"},
                      std::nullopt,
                      {}});
    script.push_back({PromptTag::resolve, ScriptKeyMode::contains, "Kylar went to the store",
                      {"With q1 = 40 and q2 = 24, the total is 64. <answer>64</answer>"},
                      std::nullopt,
                      {}});
    return script;
}

inline std::shared_ptr<ScriptedBackend> scripted(std::vector<ScriptEntry> entries) {
    return std::make_shared<ScriptedBackend>(std::move(entries));
}

} // namespace clot::testing
