"""Select the compiled or pure-Python hot kernels at import time.

Set ``PDKDE_BACKEND=python`` to force the fallback even when the extension
is built.
"""
import os

from . import _pycore

BACKEND = "python"
reduce_boundary = _pycore.reduce_boundary
bottleneck_distance = _pycore.bottleneck_distance

if os.environ.get("PDKDE_BACKEND", "").lower() != "python":
    try:
        from . import _ccore
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        reduce_boundary = _ccore.reduce_boundary
        bottleneck_distance = _ccore.bottleneck_distance

__all__ = ["BACKEND", "reduce_boundary", "bottleneck_distance"]
