"""Python bindings for the mma2a routing library.

The heavy lifting is in the compiled ``_mma2a`` extension; this package only
re-exports it.
"""

from ._mma2a import (
    MAX_INLINE_BYTES,
    BootstrapResult,
    Error,
    McNemarResult,
    PairedTResult,
    bootstrap_ci,
    decide_route,
    load_manifest,
    mcnemar_exact,
    normalize_message,
    paired_t,
    run_experiment,
)

__all__ = [
    "MAX_INLINE_BYTES",
    "BootstrapResult",
    "Error",
    "McNemarResult",
    "PairedTResult",
    "bootstrap_ci",
    "decide_route",
    "load_manifest",
    "mcnemar_exact",
    "normalize_message",
    "paired_t",
    "run_experiment",
]
