// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/core.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace clot {

struct PromptRequest {
    std::optional<std::string> system;
    std::string user;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    bool want_logprobs = false;
    PromptTag tag = PromptTag::forward; // drives scripted lookup and trace audit
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

struct Completion {
    std::string text;
    std::optional<TokenUsage> usage;
    std::optional<std::vector<TokenLogprob>> token_logprobs;

    std::optional<double> logprob_sum() const;
};

// Deterministic fallback when a backend reports no usage: ceil(bytes / 4).
std::int64_t estimate_tokens(const std::string& text);

// Fills in estimated usage for a completion that lacks it.
TokenUsage usage_or_estimate(const PromptRequest& request, const Completion& completion);

class Backend {
public:
    virtual ~Backend() = default;
    // Throws Error with one of: transport_exhausted, auth_failed,
    // malformed_response, script_miss.
    virtual Completion complete(const PromptRequest& request) = 0;
};

// Wraps a backend and keeps every request/completion pair. Tests use it to
// assert which protocol steps actually ran.
class RecordingBackend : public Backend {
public:
    explicit RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

    Completion complete(const PromptRequest& request) override;

    std::vector<std::pair<PromptRequest, Completion>> recorded() const;
    int count_tag(PromptTag tag) const;
    std::size_t call_count() const;
    void reset();

private:
    std::shared_ptr<Backend> inner_;
    mutable std::mutex mutex_;
    std::vector<std::pair<PromptRequest, Completion>> log_;
};

} // namespace clot
