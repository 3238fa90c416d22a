"""Kernel selection: compiled extension when available, NumPy fallback otherwise.

Set PROMPTGAUGE_PURE_PYTHON=1 to force the fallback (used by the kernel
benchmark and by tests that compare both paths).
"""

import os

from .split_py import best_split_sorted as best_split_sorted_py

try:
    from ._split import best_split_sorted as best_split_sorted_compiled

    HAVE_COMPILED = True
except ImportError:
    best_split_sorted_compiled = None
    HAVE_COMPILED = False

_FORCE_PURE = os.environ.get("PROMPTGAUGE_PURE_PYTHON", "") not in ("", "0")

if HAVE_COMPILED and not _FORCE_PURE:
    best_split_sorted = best_split_sorted_compiled
    ACTIVE_KERNEL = "compiled"
else:
    best_split_sorted = best_split_sorted_py
    ACTIVE_KERNEL = "python"


def active_kernel() -> str:
    return ACTIVE_KERNEL


__all__ = [
    "ACTIVE_KERNEL",
    "HAVE_COMPILED",
    "active_kernel",
    "best_split_sorted",
    "best_split_sorted_compiled",
    "best_split_sorted_py",
]
