// SPDX-License-Identifier: Apache-2.0
//
// _clot: python bindings over the reasoning engine, harness, and dataset
// tools. Values cross the boundary as plain dicts/lists mirroring the
// canonical JSON schemas, so traces and reports look the same in python as
// they do on disk.

#include "clot/dataset.hpp"
#include "clot/engine.hpp"
#include "clot/error.hpp"
#include "clot/harness.hpp"
#include "clot/judge.hpp"
#include "clot/prompts.hpp"
#include "clot/scripted_backend.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace clot;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: return py::none();
    }
}

json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        json out = json::object();
        for (const auto& item : obj.cast<py::dict>()) {
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        }
        return out;
    }
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json out = json::array();
        for (const auto& item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
        return out;
    }
    throw py::type_error("unsupported value type for JSON conversion");
}

EngineConfig config_from_py(const py::dict& config) {
    return engine_config_from_json(py_to_json(config));
}

HarnessMode mode_from_name(const std::string& name) {
    const auto mode = HarnessMode::from_name(name);
    if (!mode) throw Error(Errc::config_invalid, "unknown mode '" + name + "'");
    return *mode;
}

std::shared_ptr<Backend> backend_from_script(const std::string& script_path) {
    return std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(script_path));
}

std::vector<Problem> problems_from_py(const py::list& problems) {
    std::vector<Problem> out;
    for (const auto& item : problems) out.push_back(problem_from_json(py_to_json(item)));
    return out;
}

} // namespace

PYBIND11_MODULE(_clot, m) {
    m.doc() = "reasoning loop with backward verification, hierarchical decomposition, and "
              "consistency-gated pruning";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("estimate_tokens", &estimate_tokens, py::arg("text"),
          "deterministic fallback token estimate: ceil(bytes / 4)");

    m.def(
        "usage_add",
        [](const py::dict& a, const py::dict& b) {
            const json ja = py_to_json(a);
            const json jb = py_to_json(b);
            TokenUsage ua{ja.value("prompt_tokens", 0LL), ja.value("completion_tokens", 0LL),
                          ja.value("estimated", false)};
            TokenUsage ub{jb.value("prompt_tokens", 0LL), jb.value("completion_tokens", 0LL),
                          jb.value("estimated", false)};
            const TokenUsage sum = usage_add(ua, ub);
            return json_to_py(json{{"prompt_tokens", sum.prompt_tokens},
                                   {"completion_tokens", sum.completion_tokens},
                                   {"estimated", sum.estimated}});
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "extract_answer",
        [](const std::string& text, const std::string& kind) {
            const auto parsed_kind = answer_kind_from_name(kind);
            if (!parsed_kind) throw Error(Errc::config_invalid, "unknown kind '" + kind + "'");
            return json_to_py(answer_to_json(prompts::extract_answer(text, *parsed_kind)));
        },
        py::arg("text"), py::arg("kind") = "numeric",
        "last well-formed <answer></answer> span, normalized per kind");

    m.def(
        "compare_numeric",
        [](const std::string& a, const std::string& b, double tolerance) {
            const auto verdict = judge::compare_numeric(
                Answer::make_numeric(Decimal::of(a)), Answer::make_numeric(Decimal::of(b)),
                tolerance);
            return verification_verdict_name(verdict.outcome);
        },
        py::arg("a"), py::arg("b"), py::arg("tolerance") = 1e-6);

    m.def(
        "call_budget_bound",
        [](const py::dict& config) { return call_budget_bound(config_from_py(config)); },
        py::arg("config") = py::dict());

    m.def(
        "load_benchmark",
        [](const std::string& path, const std::string& format, std::size_t limit) {
            const auto parsed = dataset::benchmark_format_from_name(format);
            if (!parsed) throw Error(Errc::config_invalid, "unknown format '" + format + "'");
            py::list out;
            for (const auto& problem : dataset::load_benchmark(path, *parsed, limit)) {
                out.append(json_to_py(problem_to_json(problem)));
            }
            return out;
        },
        py::arg("path"), py::arg("format"), py::arg("limit") = 0);

    m.def(
        "solve",
        [](const py::dict& problem, const std::string& script_path, const py::dict& config,
           const std::string& mode) {
            const engine::Engine engine(backend_from_script(script_path));
            const ReasoningTrace trace = engine.solve(problem_from_json(py_to_json(problem)),
                                                      config_from_py(config),
                                                      mode_from_name(mode));
            return json_to_py(trace_to_json(trace));
        },
        py::arg("problem"), py::arg("script_path"), py::arg("config") = py::dict(),
        py::arg("mode") = "cot_rhmc_hp",
        "run the full loop against a scripted backend; returns the canonical trace");

    m.def(
        "run_eval",
        [](const py::list& problems, const std::string& script_path, const std::string& mode,
           const py::dict& config, int workers) {
            const harness::EvalReport report =
                harness::run_eval(problems_from_py(problems), mode_from_name(mode),
                                  config_from_py(config), backend_from_script(script_path),
                                  workers);
            return json_to_py(harness::report_to_json(report));
        },
        py::arg("problems"), py::arg("script_path"), py::arg("mode") = "cot_rhmc_hp",
        py::arg("config") = py::dict(), py::arg("workers") = 1);

    m.def(
        "compute_metrics",
        [](const py::list& traces, const py::list& ground_truths, double tolerance) {
            std::vector<ReasoningTrace> parsed_traces;
            for (const auto& item : traces) parsed_traces.push_back(trace_from_json(py_to_json(item)));
            std::vector<Answer> truths;
            for (const auto& item : ground_truths) truths.push_back(answer_from_json(py_to_json(item)));
            const harness::Metrics m2 = harness::compute_metrics(parsed_traces, truths, tolerance);
            json histogram;
            for (const auto& [layers, count] : m2.max_layer_histogram) {
                histogram[std::to_string(layers)] = count;
            }
            return json_to_py(json{{"accuracy", m2.accuracy},
                                   {"one_step_verification_accuracy",
                                    m2.one_step_verification_accuracy},
                                   {"total_verification_accuracy", m2.total_verification_accuracy},
                                   {"error_omission_rate", m2.error_omission_rate},
                                   {"max_layer_histogram", histogram},
                                   {"total_calls", m2.total_calls}});
        },
        py::arg("traces"), py::arg("ground_truths"), py::arg("tolerance") = 1e-6);

    m.def(
        "validate_trace",
        [](const py::dict& trace, py::object max_layers) {
            std::optional<int> cap;
            if (!max_layers.is_none()) cap = max_layers.cast<int>();
            return validate_trace(trace_from_json(py_to_json(trace)), cap);
        },
        py::arg("trace"), py::arg("max_layers") = py::none());

    m.def(
        "synth_generate",
        [](std::uint64_t seed, std::size_t count, double error_rate) {
            const harness::SynthResult synth = harness::synth_generate(seed, count, error_rate);
            py::list problems;
            for (const auto& problem : synth.problems) {
                problems.append(json_to_py(problem_to_json(problem)));
            }
            return py::make_tuple(problems, json_to_py(ScriptedBackend::to_json(synth.script)),
                                  synth.forward_wrong);
        },
        py::arg("seed"), py::arg("count"), py::arg("error_rate"),
        "deterministic problems + oracle-faithful script; returns (problems, script, wrong_mask)");

    m.def(
        "build_instruct_samples",
        [](const py::list& problems, const std::string& script_path, const py::dict& config) {
            const engine::Engine engine(backend_from_script(script_path));
            const EngineConfig parsed_config = config_from_py(config);
            py::list out;
            for (const auto& problem : problems_from_py(problems)) {
                if (auto sample =
                        dataset::build_instruct_sample(problem, parsed_config, engine)) {
                    out.append(json_to_py(dataset::sample_to_json(*sample)));
                }
            }
            return out;
        },
        py::arg("problems"), py::arg("script_path"), py::arg("config") = py::dict());

    m.def(
        "render_report",
        [](const py::dict& report, const std::string& format) {
            const auto parsed = harness::report_format_from_name(format);
            if (!parsed) throw Error(Errc::config_invalid, "unknown format '" + format + "'");
            return harness::render_report(harness::report_from_json(py_to_json(report)), *parsed);
        },
        py::arg("report"), py::arg("format") = "text");

    m.attr("__version__") = "0.1.0";
}
