"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``REFLSPDE_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
psor_sweeps = _pykernels.psor_sweeps
enumerate_active_sets = _pykernels.enumerate_active_sets

if os.environ.get("REFLSPDE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        psor_sweeps = _ckernels.psor_sweeps
        enumerate_active_sets = _ckernels.enumerate_active_sets


def backends():
    """Map backend name to its kernel module, for benchmarks and cross-checks."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
