// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/backend.hpp"
#include "clot/core.hpp"
#include "clot/prompts.hpp"

#include <memory>

namespace clot::engine {

enum class LayerGate { verified, failed };

// Outcome of one layer's consistency gate.
struct LayerVerdict {
    int layer_index = 1;
    LayerGate value = LayerGate::failed;
    int passed_steps = 0;
    int total_steps = 0;
    std::optional<double> logprob_sum;

    bool verified() const { return value == LayerGate::verified; }
};

enum class PruneActionKind { prune_below, descend, halt_at_bottom };

struct PruneAction {
    PruneActionKind action = PruneActionKind::descend;
};

// all_steps_pass: verified iff every record passes (inconclusive is
// not-pass). logprob_threshold: sums the records' backward logprob sums and
// compares against tau; any record without logprobs is an error.
LayerVerdict layer_consistency(const std::vector<VerificationRecord>& records,
                               const TauPolicy& policy);

// verified -> prune everything below; failed above the bottom -> descend;
// failed at layer 1 -> halt with the finest-grained failure.
PruneAction prune_decision(const LayerVerdict& verdict, int current_layer);

// Bi-directional coherence score: forward/resolve call logprob sums plus
// backward-solve call logprob sums. Throws Error(missing_logprobs) when any
// contributing call lacks them.
double rhmc_score(const ReasoningTrace& trace);

// The reasoning loop: forward solve, backward verification by condition
// inversion, consistency-gated pruning, decomposition descent, re-solve.
class Engine {
public:
    explicit Engine(std::shared_ptr<Backend> backend,
                    prompts::Prompts prompts = prompts::Prompts());

    // Never throws for backend trouble: failed calls surface as inconclusive
    // verification records and an unverified final answer. Throws
    // Error(config_invalid) before any call when the config is malformed.
    ReasoningTrace solve(const Problem& problem, const EngineConfig& config,
                         HarnessMode mode = HarnessMode::cot_rhmc_hp()) const;

    // One standalone verification cycle (mask, parse, backward solve, judge)
    // with retries per config.verify_retry_budget. Parse failures downgrade
    // to inconclusive.
    VerificationRecord backward_verify(const Problem& problem, const Answer& answer,
                                       const EngineConfig& config) const;

    Backend& backend() const { return *backend_; }
    const prompts::Prompts& prompts() const { return prompts_; }

private:
    std::shared_ptr<Backend> backend_;
    prompts::Prompts prompts_;
};

} // namespace clot::engine
