"""Kernel backend selection.

The compiled extension (``edgeplace._speedups``) is preferred; the pure
NumPy fallback is used when it is missing or when ``EDGEPLACE_PURE=1`` is
set.  Both expose the same two functions with the same semantics:

    placement_cost(hosts, dist, svc, R, C, D, proc, per_m, cloud, alpha)
    local_search(hosts, dist, svc, R, C, D, proc, per_m, cloud, alpha,
                 max_rounds)

All cost values produced within one backend are mutually consistent bit for
bit; across backends they may differ in the last ulp because NumPy reduces
sums pairwise.  ``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

from . import _fallback


def _select():
    if os.environ.get("EDGEPLACE_PURE", "") not in ("", "0"):
        return _fallback
    try:
        from . import _speedups
        return _speedups
    except ImportError:
        return _fallback


_active = _select()

BACKEND = _active.BACKEND
placement_cost = _active.placement_cost
local_search = _active.local_search


def available_backends() -> dict[str, object]:
    """Importable backends by name (for tests and benchmarks)."""
    out = {"python": _fallback}
    try:
        from . import _speedups
        out["compiled"] = _speedups
    except ImportError:
        pass
    return out
