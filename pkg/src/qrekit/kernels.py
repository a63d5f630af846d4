"""Kernel selection.

The compiled extension is used when it imports; otherwise the pure-Python
versions are.  Setting ``QREKIT_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("QREKIT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

correlate_taps = _impl.correlate_taps
strict_local_maxima = _impl.strict_local_maxima
conn_pair = _impl.conn_pair
mdt_run = _impl.mdt_run

__all__ = ["BACKEND", "correlate_taps", "strict_local_maxima", "conn_pair", "mdt_run"]
