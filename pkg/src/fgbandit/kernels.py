"""Kernel backend selection.

The compiled extension is used when it was built; ``FGB_KERNELS=python``
forces the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
ucbn_rounds = _pykernels.ucbn_rounds

if os.environ.get("FGB_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        ucbn_rounds = _ckernels.ucbn_rounds


def backends():
    """Mapping of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found
