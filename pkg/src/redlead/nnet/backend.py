"""Kernel backend selection.

The compiled Cython extension is preferred when present; the numpy
implementation is the fallback. Override with REDLEAD_KERNELS=python or
REDLEAD_KERNELS=cython (the latter fails loudly if the extension is
missing, useful in CI).
"""

import os

_requested = os.environ.get("REDLEAD_KERNELS", "auto").lower()

if _requested not in ("auto", "cython", "python"):
    raise ValueError(f"REDLEAD_KERNELS must be auto/cython/python, got {_requested!r}")

if _requested == "python":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise
        from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND_NAME = kernels.BACKEND_NAME


def load_backend(name):
    """Explicitly load one backend module ('python' or 'cython').

    Used by the benchmark and the backend-parity tests; normal code goes
    through the module-level ``kernels`` chosen at import.
    """
    if name == "python":
        from . import _kernels_py

        return _kernels_py
    if name == "cython":
        from . import _kernels_cy

        return _kernels_cy
    raise ValueError(f"unknown backend {name!r}")
