"""Hot loops: batched path-family assembly, batched LU solves, orbit minima.

Two interchangeable implementations exist: numba-compiled loops and
vectorized pure numpy.  Numba is used when importable unless the environment
variable ``RQGRAPH_DISABLE_NUMBA`` is set to a truthy value ("1", "true",
"yes").  Both paths are importable directly as ``kernels.numpy_impl`` and
``kernels.numba_impl`` (the latter is ``None`` without numba).
"""
from __future__ import annotations

import os

from . import _numpy as numpy_impl

try:
    from . import _numba as numba_impl
except ImportError:  # numba not installed
    numba_impl = None


def _numba_disabled() -> bool:
    return os.environ.get("RQGRAPH_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


if numba_impl is not None and not _numba_disabled():
    active = numba_impl
    BACKEND = "numba"
else:
    active = numpy_impl
    BACKEND = "numpy"

assemble = active.assemble
lu_solve = active.lu_solve
orbit_min = active.orbit_min

__all__ = ["BACKEND", "assemble", "lu_solve", "orbit_min", "numpy_impl", "numba_impl"]
