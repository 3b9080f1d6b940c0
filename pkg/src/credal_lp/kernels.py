"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation. Set ``CREDAL_LP_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("CREDAL_LP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

feasible_mass = _impl.feasible_mass
upper_diff_pairs = _impl.upper_diff_pairs
seqdot = _kernels_py.seqdot


def backends():
    """Available kernel implementations by name."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels_c

        out["cython"] = _kernels_c
    except ImportError:
        pass
    return out
