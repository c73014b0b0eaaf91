"""Simulation kernel selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_fallback`` is.  Setting ``MARKOV_BANDITS_PURE=1`` forces the
fallback.  Both expose the same ``simulate`` signature and return
bit-identical results.
"""

from __future__ import annotations

import os

from . import _fallback

UCBM, RCAM, RCAM_ADAPTIVE = _fallback.UCBM, _fallback.RCAM, _fallback.RCAM_ADAPTIVE
POLICY_CODES = {"ucbm": UCBM, "rcam": RCAM, "rcam-adaptive": RCAM_ADAPTIVE}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

python_simulate = _fallback.simulate
compiled_simulate = _compiled.simulate if _compiled is not None else None

if compiled_simulate is not None and os.environ.get("MARKOV_BANDITS_PURE", "") not in ("1", "true"):
    BACKEND = "compiled"
    simulate = compiled_simulate
else:
    BACKEND = "python"
    simulate = python_simulate


def get_simulate(backend: str | None = None):
    if backend in (None, "auto"):
        return simulate
    if backend == "python":
        return python_simulate
    if backend == "compiled":
        if compiled_simulate is None:
            raise RuntimeError("compiled kernel is not available; build the extension first")
        return compiled_simulate
    raise ValueError(f"unknown backend {backend!r}")
