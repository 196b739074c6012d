"""Selects the compiled core or the numpy fallback at import time.

Set ``PHASEFEM_PURE_PYTHON=1`` to force the fallback. ``NAME`` reports which
one is active.
"""

from __future__ import annotations

import os

from . import _batch_numpy as numpy_impl

compiled_impl = None
if os.environ.get("PHASEFEM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as compiled_impl  # type: ignore[no-redef]
    except ImportError:
        compiled_impl = None

_impl = compiled_impl if compiled_impl is not None else numpy_impl
NAME = "compiled" if compiled_impl is not None else "numpy"

no_tension_split = _impl.no_tension_split
j2_return_map = _impl.j2_return_map
scalar_element_matrices = _impl.scalar_element_matrices
vector_element_matrices = _impl.vector_element_matrices
strain_displacement = numpy_impl.strain_displacement
flow_stress = numpy_impl.flow_stress
