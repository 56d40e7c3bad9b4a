// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clot/core.hpp"
#include "clot/engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace clot::dataset {

enum class BenchmarkFormat {
    gsm8k_jsonl,
    svamp_json,
    addsub_json,
    aqua_jsonl,
    csqa_jsonl,
    generic_jsonl,
};

std::optional<BenchmarkFormat> benchmark_format_from_name(const std::string& name);
const char* benchmark_format_name(BenchmarkFormat format);

// Loads and normalizes a benchmark file. Source order is preserved; `limit`
// > 0 keeps only the first N problems. Parse failures name the offending
// line (JSONL) or record index (JSON arrays).
std::vector<Problem> load_benchmark(const std::string& path, BenchmarkFormat format,
                                    std::size_t limit = 0);

// One instruction-tuning record: the original problem and ground truth plus
// per-layer trajectories, each step paired with its inverted verification
// question. Layers are indexed 0 (original question) downward to max_layer
// (deepest sub-problems), re-indexed from the engine's top-to-bottom trace.
struct InstructLayer {
    std::string question;
    std::vector<std::string> steps;
    std::vector<std::pair<std::string, Answer>> verify_pairs;

    bool operator==(const InstructLayer&) const = default;
};

struct ClotInstructSample {
    std::string q_origin;
    Answer a_gt;
    std::vector<InstructLayer> layers;
    int max_layer = 0;

    bool operator==(const ClotInstructSample&) const = default;
};

// Stage 1 runs the engine for hierarchical trajectories; stage 2 extracts
// each step's masked question and masked value as a verification pair.
// Returns nothing unless the final answer matches ground truth.
std::optional<ClotInstructSample> build_instruct_sample(const Problem& problem,
                                                        const EngineConfig& config,
                                                        const engine::Engine& engine);

// Sample built from an existing trace (no backend calls).
std::optional<ClotInstructSample> sample_from_trace(const Problem& problem,
                                                    const ReasoningTrace& trace,
                                                    double numeric_tolerance);

// Schema checks; empty result means valid.
std::vector<std::string> validate_sample(const ClotInstructSample& sample);

json sample_to_json(const ClotInstructSample& sample);
ClotInstructSample sample_from_json(const json& j);

// JSONL, stable field order; refuses invalid samples naming the index.
// Returns the number of samples written.
std::size_t write_instruct(const std::vector<ClotInstructSample>& samples,
                           const std::string& path);

std::vector<ClotInstructSample> read_instruct(const std::string& path);

} // namespace clot::dataset
