# SPDX-License-Identifier: Apache-2.0
"""Reasoning loop with backward verification and hierarchical pruning.

Thin wrapper over the compiled `_clot` module. Traces, reports, problems and
instruct samples cross the boundary as plain dicts matching the on-disk JSON
schemas.
"""

try:
    from ._clot import (  # type: ignore[attr-defined]
        build_instruct_samples,
        call_budget_bound,
        compare_numeric,
        compute_metrics,
        estimate_tokens,
        extract_answer,
        load_benchmark,
        render_report,
        run_eval,
        solve,
        synth_generate,
        usage_add,
        validate_trace,
        __version__,
    )
except ImportError:  # running from a build tree where _clot sits on sys.path
    from _clot import (  # type: ignore[no-redef]
        build_instruct_samples,
        call_budget_bound,
        compare_numeric,
        compute_metrics,
        estimate_tokens,
        extract_answer,
        load_benchmark,
        render_report,
        run_eval,
        solve,
        synth_generate,
        usage_add,
        validate_trace,
        __version__,
    )

__all__ = [
    "build_instruct_samples",
    "call_budget_bound",
    "compare_numeric",
    "compute_metrics",
    "estimate_tokens",
    "extract_answer",
    "load_benchmark",
    "render_report",
    "run_eval",
    "solve",
    "synth_generate",
    "usage_add",
    "validate_trace",
    "__version__",
]
