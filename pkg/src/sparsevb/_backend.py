"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
kernels are used. Setting ``SPARSEVB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _ckernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("SPARSEVB_PURE_PYTHON", "") in ("", "0"):
    kernels = compiled_kernels
else:
    kernels = python_kernels

BACKEND = kernels.NAME
