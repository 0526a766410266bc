"""Kernel backend selection.

Hot inner loops exist twice: a numba @njit kernel and a pure-numpy
fallback.  The active path is chosen once at import time from the
``HEAVYTAILS_BACKEND`` environment variable (``numba`` by default,
``numpy`` to force the fallback, e.g. on machines without a working
numba install).  Both paths draw from the same Philox streams and are
statistically equivalent; they are not guaranteed to be bit-identical
to each other because they consume random numbers in different orders.
"""

import os

_requested = os.environ.get("HEAVYTAILS_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"HEAVYTAILS_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numba":
    try:
        import numba  # noqa: F401
        USE_NUMBA = True
    except ImportError:  # pragma: no cover - env without numba
        USE_NUMBA = False
else:
    USE_NUMBA = False


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
