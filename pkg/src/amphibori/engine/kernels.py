"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set AMPHIBORI_PURE_KERNELS=1 to force the pure implementation (useful for
benchmarking and for debugging kernel divergence).
"""

from __future__ import annotations

import os

from . import kernels_py

_FORCE_PURE = os.environ.get("AMPHIBORI_PURE_KERNELS", "") not in ("", "0")

if not _FORCE_PURE:
    try:
        from . import _core as _impl

        KERNEL_BACKEND = "compiled"
    except ImportError:
        _impl = kernels_py
        KERNEL_BACKEND = "pure"
else:
    _impl = kernels_py
    KERNEL_BACKEND = "pure"

transform_points = _impl.transform_points
contact_forces = _impl.contact_forces
integrate_rigid = _impl.integrate_rigid

# quaternion helpers are cheap; the numpy versions serve both backends
quat_to_matrix = kernels_py.quat_to_matrix
quat_multiply = kernels_py.quat_multiply
quat_from_axis_angle = kernels_py.quat_from_axis_angle

PRIM_GROUND = kernels_py.PRIM_GROUND
PRIM_BOX = kernels_py.PRIM_BOX
PRIM_CYLINDER_Y = kernels_py.PRIM_CYLINDER_Y
PRIM_RAMP = kernels_py.PRIM_RAMP
PRIM_ROW_WIDTH = kernels_py.PRIM_ROW_WIDTH


def backends() -> dict:
    """All importable kernel backends, keyed by name."""
    found = {"pure": kernels_py}
    try:
        from . import _core

        found["compiled"] = _core
    except ImportError:
        pass
    return found
