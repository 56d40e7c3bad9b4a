// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/backend.hpp"

#include <map>
#include <string>
#include <vector>

namespace clot {

// How a script entry's key is matched against an incoming prompt.
//   contains   — whitespace-collapsed key is a substring of the collapsed
//                prompt (default; fixtures key on the distinctive part,
//                e.g. the problem text, so template tweaks don't break them)
//   normalized — whitespace-collapsed key equals the collapsed prompt
//   exact      — byte equality against the full prompt (golden tests)
enum class ScriptKeyMode { contains, normalized, exact };

struct ScriptEntry {
    PromptTag tag = PromptTag::forward;
    ScriptKeyMode key_mode = ScriptKeyMode::contains;
    std::string key;
    // Sequenced responses: call 1 gets responses[0], call 2 responses[1], ...
    // and the last one repeats once exhausted.
    std::vector<std::string> responses;
    std::optional<TokenUsage> usage;
    // Optional per-response token logprobs (parallel to responses).
    std::vector<std::vector<TokenLogprob>> logprobs;
};

// Deterministic test double: a pure function of (tag, prompt, per-entry call
// ordinal). Misses raise Error(script_miss). Safe for concurrent callers.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend() = default;
    explicit ScriptedBackend(std::vector<ScriptEntry> entries);

    // movable despite the internal ordinal lock; moving a backend that other
    // threads are using is a caller bug
    ScriptedBackend(ScriptedBackend&& other) noexcept
        : entries_(std::move(other.entries_)), ordinals_(std::move(other.ordinals_)) {}
    ScriptedBackend& operator=(ScriptedBackend&& other) noexcept {
        entries_ = std::move(other.entries_);
        ordinals_ = std::move(other.ordinals_);
        return *this;
    }

    static ScriptedBackend from_json(const json& script);
    static ScriptedBackend from_file(const std::string& path);
    static json to_json(const std::vector<ScriptEntry>& entries);

    void add(ScriptEntry entry);

    Completion complete(const PromptRequest& request) override;

    const std::vector<ScriptEntry>& entries() const { return entries_; }
    void reset_ordinals();

private:
    // Best match wins: exact > normalized > contains; among contains, the
    // longest key; remaining ties go to registration order.
    int find_entry(const PromptRequest& request) const;

    std::vector<ScriptEntry> entries_;
    mutable std::mutex mutex_;
    std::map<int, std::size_t> ordinals_;
};

std::string collapse_whitespace(const std::string& text);

} // namespace clot
