"""Kernel backend selection.

The compiled extension is used when importable; set ``P2PMATCH_PURE=1`` to
force the pure-Python implementation.
"""
import os

if os.environ.get("P2PMATCH_PURE"):
    from . import _kernels as kernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels as kernels
        BACKEND = "python"

from . import _kernels as py_kernels  # noqa: E402

__all__ = ["kernels", "py_kernels", "BACKEND"]
