"""Hot combinatorial kernels with a compiled fast path.

Two implementations of the same contract live side by side:

* ``_speedups`` - Cython extension, built by setup.py when a compiler is
  available.
* ``_fallback`` - pure numpy, always available.

The compiled module is preferred at import time; set
``MISODETECT_NO_ACCEL=1`` to force the fallback (used by the benchmark
and by tests that must exercise both backends).
"""

import os

from . import _fallback

if os.environ.get("MISODETECT_NO_ACCEL") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

shapley_combine = _impl.shapley_combine
signed_rank_counts = _impl.signed_rank_counts

__all__ = ["BACKEND", "shapley_combine", "signed_rank_counts"]
