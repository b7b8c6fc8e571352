"""Pick the compiled walk kernel when it is importable, else the Python reference.

Set LEVYLAB_PURE_PYTHON=1 to force the fallback.
"""
from __future__ import annotations

import os

from . import _walk_py

BACKEND = "python"
walk_block = _walk_py.walk_block

if os.environ.get("LEVYLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _walk  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        walk_block = _walk.walk_block
        BACKEND = "cython"

STATUS_RUNNING = _walk_py.STATUS_RUNNING
STATUS_LEVEL = _walk_py.STATUS_LEVEL
STATUS_TIME = _walk_py.STATUS_TIME
STATUS_BUDGET = _walk_py.STATUS_BUDGET

__all__ = ["walk_block", "BACKEND", "STATUS_RUNNING", "STATUS_LEVEL", "STATUS_TIME", "STATUS_BUDGET"]
