// SPDX-License-Identifier: Apache-2.0
#include "clot/backend.hpp"

#include "clot/error.hpp"
#include "clot/scripted_backend.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace clot {

std::optional<double> Completion::logprob_sum() const {
    if (!token_logprobs) return std::nullopt;
    double sum = 0.0;
    for (const auto& t : *token_logprobs) sum += t.logprob;
    return sum;
}

std::int64_t estimate_tokens(const std::string& text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

TokenUsage usage_or_estimate(const PromptRequest& request, const Completion& completion) {
    if (completion.usage) return *completion.usage;
    TokenUsage u;
    u.prompt_tokens = estimate_tokens(request.user) +
                      (request.system ? estimate_tokens(*request.system) : 0);
    u.completion_tokens = estimate_tokens(completion.text);
    u.estimated = true;
    return u;
}

Completion RecordingBackend::complete(const PromptRequest& request) {
    Completion completion = inner_->complete(request);
    std::lock_guard<std::mutex> lock(mutex_);
    log_.emplace_back(request, completion);
    return completion;
}

std::vector<std::pair<PromptRequest, Completion>> RecordingBackend::recorded() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return log_;
}

int RecordingBackend::count_tag(PromptTag tag) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return static_cast<int>(std::count_if(log_.begin(), log_.end(),
                                          [&](const auto& p) { return p.first.tag == tag; }));
}

std::size_t RecordingBackend::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return log_.size();
}

void RecordingBackend::reset() {
    std::lock_guard<std::mutex> lock(mutex_);
    log_.clear();
}

std::string collapse_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending = false;
    for (char raw : text) {
        if (std::isspace(static_cast<unsigned char>(raw))) {
            pending = !out.empty();
            continue;
        }
        if (pending) {
            out += ' ';
            pending = false;
        }
        out += raw;
    }
    return out;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {}

void ScriptedBackend::add(ScriptEntry entry) { entries_.push_back(std::move(entry)); }

namespace {

const char* key_mode_name(ScriptKeyMode mode) {
    switch (mode) {
        case ScriptKeyMode::contains: return "contains";
        case ScriptKeyMode::normalized: return "normalized";
        case ScriptKeyMode::exact: return "exact";
    }
    return "contains";
}

ScriptKeyMode key_mode_from_name(const std::string& name) {
    if (name == "exact") return ScriptKeyMode::exact;
    if (name == "normalized") return ScriptKeyMode::normalized;
    if (name == "contains") return ScriptKeyMode::contains;
    throw Error(Errc::format_error, "unknown script key_mode '" + name + "'");
}

} // namespace

ScriptedBackend ScriptedBackend::from_json(const json& script) {
    if (!script.is_array()) throw Error(Errc::format_error, "script must be a JSON array");
    std::vector<ScriptEntry> entries;
    for (const auto& e : script) {
        ScriptEntry entry;
        const auto tag = prompt_tag_from_name(e.at("tag").get<std::string>());
        if (!tag) throw Error(Errc::format_error, "unknown script tag");
        entry.tag = *tag;
        entry.key_mode = key_mode_from_name(e.value("key_mode", std::string("contains")));
        entry.key = e.at("key").get<std::string>();
        for (const auto& r : e.at("responses")) entry.responses.push_back(r.get<std::string>());
        if (entry.responses.empty()) throw Error(Errc::format_error, "script entry with no responses");
        if (e.contains("usage") && !e.at("usage").is_null()) {
            TokenUsage u;
            u.prompt_tokens = e.at("usage").at("prompt_tokens").get<std::int64_t>();
            u.completion_tokens = e.at("usage").at("completion_tokens").get<std::int64_t>();
            u.estimated = e.at("usage").value("estimated", false);
            entry.usage = u;
        }
        if (e.contains("logprobs") && !e.at("logprobs").is_null()) {
            for (const auto& per_response : e.at("logprobs")) {
                std::vector<TokenLogprob> lps;
                for (const auto& pair : per_response) {
                    lps.push_back({pair.at(0).get<std::string>(), pair.at(1).get<double>()});
                }
                entry.logprobs.push_back(std::move(lps));
            }
        }
        entries.push_back(std::move(entry));
    }
    return ScriptedBackend(std::move(entries));
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open script file '" + path + "'");
    json parsed;
    try {
        in >> parsed;
    } catch (const std::exception& e) {
        throw Error(Errc::format_error, "script file '" + path + "': " + e.what());
    }
    return from_json(parsed);
}

json ScriptedBackend::to_json(const std::vector<ScriptEntry>& entries) {
    json out = json::array();
    for (const auto& entry : entries) {
        json e;
        e["tag"] = prompt_tag_name(entry.tag);
        e["key_mode"] = key_mode_name(entry.key_mode);
        e["key"] = entry.key;
        e["responses"] = entry.responses;
        if (entry.usage) {
            e["usage"] = json{{"prompt_tokens", entry.usage->prompt_tokens},
                              {"completion_tokens", entry.usage->completion_tokens},
                              {"estimated", entry.usage->estimated}};
        }
        if (!entry.logprobs.empty()) {
            json lps = json::array();
            for (const auto& per_response : entry.logprobs) {
                json one = json::array();
                for (const auto& t : per_response) one.push_back(json::array({t.token, t.logprob}));
                lps.push_back(std::move(one));
            }
            e["logprobs"] = std::move(lps);
        }
        out.push_back(std::move(e));
    }
    return out;
}

int ScriptedBackend::find_entry(const PromptRequest& request) const {
    const std::string collapsed = collapse_whitespace(request.user);
    int best = -1;
    int best_rank = -1; // exact=3, normalized=2, contains=1
    std::size_t best_key_len = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& entry = entries_[i];
        if (entry.tag != request.tag) continue;
        int rank = 0;
        switch (entry.key_mode) {
            case ScriptKeyMode::exact:
                if (entry.key == request.user) rank = 3;
                break;
            case ScriptKeyMode::normalized:
                if (collapse_whitespace(entry.key) == collapsed) rank = 2;
                break;
            case ScriptKeyMode::contains:
                if (collapsed.find(collapse_whitespace(entry.key)) != std::string::npos) rank = 1;
                break;
        }
        if (rank == 0) continue;
        if (rank > best_rank || (rank == best_rank && entry.key.size() > best_key_len)) {
            best = static_cast<int>(i);
            best_rank = rank;
            best_key_len = entry.key.size();
        }
    }
    return best;
}

Completion ScriptedBackend::complete(const PromptRequest& request) {
    std::lock_guard<std::mutex> lock(mutex_);
    const int index = find_entry(request);
    if (index < 0) {
        const std::string excerpt = request.user.substr(0, std::min<std::size_t>(80, request.user.size()));
        throw Error(Errc::script_miss, std::string("no script entry for tag=") +
                                           prompt_tag_name(request.tag) + " prompt='" + excerpt + "…'");
    }
    const auto& entry = entries_[static_cast<std::size_t>(index)];
    std::size_t ordinal = ordinals_[index]++;
    if (ordinal >= entry.responses.size()) ordinal = entry.responses.size() - 1;

    Completion completion;
    completion.text = entry.responses[ordinal];
    if (entry.usage) completion.usage = entry.usage;
    if (ordinal < entry.logprobs.size()) completion.token_logprobs = entry.logprobs[ordinal];
    return completion;
}

void ScriptedBackend::reset_ordinals() {
    std::lock_guard<std::mutex> lock(mutex_);
    ordinals_.clear();
}

} // namespace clot
