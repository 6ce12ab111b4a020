"""Kernel backend selection.

The compiled extension is used when it imports; set ``GPFQ_PURE_PYTHON=1``
to force the pure-Python fallback.
"""
import os

if os.environ.get("GPFQ_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        from . import _kernels_py as _impl
        BACKEND = "python"

mis_search = _impl.mis_search
count_independent = _impl.count_independent
container_tree = _impl.container_tree
tuple_census = _impl.tuple_census
