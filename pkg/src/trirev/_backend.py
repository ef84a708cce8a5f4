"""Pick the compiled kernel when available; TRIREV_BACKEND=python forces the fallback."""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("TRIREV_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

sphere_search = _impl.sphere_search
