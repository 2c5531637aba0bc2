"""Kernel backend selection.

Prefers the compiled extension when it was built; falls back to the NumPy
implementation otherwise. Set QOEHANDOFF_PURE_PYTHON=1 to force the
fallback (useful for debugging and for the backend benchmark).
"""

import os

if os.environ.get("QOEHANDOFF_PURE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels_c as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

forward = kernels.forward
forward_backward = kernels.forward_backward
BACKEND = kernels.BACKEND
