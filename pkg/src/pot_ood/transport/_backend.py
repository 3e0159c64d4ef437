"""Kernel backend selection.

The compiled Cython kernels are preferred when the extension built; the
NumPy twins are the fallback.  ``POT_BACKEND`` overrides the choice:
``python``/``numpy``/``pure`` forces the fallback, ``cython``/``compiled``
requires the extension (and raises if it is missing).
"""

from __future__ import annotations

import os

from . import _purepy

_FORCE = os.environ.get("POT_BACKEND", "").strip().lower()

if _FORCE in {"python", "numpy", "pure"}:
    kernels = _purepy
elif _FORCE in {"cython", "compiled", "c"}:
    from . import _core as kernels  # noqa: F401  (ImportError is the point)
else:
    try:
        from . import _core as kernels
    except ImportError:
        kernels = _purepy


def backend_name() -> str:
    """Name of the active kernel backend: ``"cython"`` or ``"numpy"``."""
    return kernels.BACKEND
