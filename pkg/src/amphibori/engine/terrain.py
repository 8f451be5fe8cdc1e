"""Terrain primitive encoding for the contact kernels.

Obstacles decompose into the kernel's primitive menu (ground plane, boxes,
y-axis cylinders, convex wedges); see ``kernels_py`` for the row layout.
"""

from __future__ import annotations

import math

import numpy as np

from .kernels import PRIM_BOX, PRIM_CYLINDER_Y, PRIM_GROUND, PRIM_RAMP, PRIM_ROW_WIDTH


def _row(kind: int, params) -> np.ndarray:
    row = np.zeros(PRIM_ROW_WIDTH)
    row[0] = kind
    row[1 : 1 + len(params)] = params
    return row


def ground(z0: float = 0.0) -> np.ndarray:
    return _row(PRIM_GROUND, [z0])


def box(center, half_extents) -> np.ndarray:
    cx, cy, cz = center
    hx, hy, hz = half_extents
    if min(hx, hy, hz) <= 0:
        raise ValueError("box half extents must be positive")
    return _row(PRIM_BOX, [cx, cy, cz, hx, hy, hz])


# ground-standing boxes extend below grade so their bottom face can never win
# the minimum-penetration pushout at a base corner
EMBED = 2e-3


def wall(x: float, height: float, thickness: float = 2e-3, y_half: float = 0.5) -> np.ndarray:
    """A wall across the track at position x, standing on the ground."""
    if height <= 0:
        raise ValueError("wall height must be positive")
    return box((x, 0.0, (height - EMBED) / 2.0), (thickness / 2.0, y_half, (height + EMBED) / 2.0))


def stairs(x0: float, gap: float, rise: float, count: int, y_half: float = 0.5,
           descending: bool = False) -> list[np.ndarray]:
    """Spaced steps of increasing height starting at x0.

    Each step is a block of depth ``gap`` separated from the next by ``gap``
    of ground; step k stands k * rise tall (or descends when flagged).
    """
    if gap <= 0 or rise <= 0 or count < 1:
        raise ValueError("stairs need positive gap/rise and count >= 1")
    rows = []
    for k in range(count):
        h = (count - k) * rise if descending else (k + 1) * rise
        x = x0 + k * 2 * gap
        rows.append(box((x + gap / 2.0, 0.0, (h - EMBED) / 2.0), (gap / 2.0, y_half, (h + EMBED) / 2.0)))
    return rows


def incline(x0: float, angle: float, run: float, y_half: float = 0.5) -> list[np.ndarray]:
    """An up-and-over ramp: rises at ``angle`` over ``run``, then falls.

    Walkable-slope primitives (vertical-gap contact), so the base corners
    never wedge the hull.
    """
    if not 0 < angle < math.pi / 2:
        raise ValueError("incline angle must be in (0, 90) degrees")
    if run <= 0:
        raise ValueError("incline run must be positive")
    peak = run * math.tan(angle)
    slope = peak / run
    up = _row(PRIM_RAMP, [x0, x0 + run, 0.0, slope, y_half])
    down = _row(PRIM_RAMP, [x0 + run, x0 + 2 * run, peak, -slope, y_half])
    return [up, down]


def column_array(x0: float, height: float, spacing: float, rows: int = 3, cols: int = 4,
                 side: float = 2e-3) -> list[np.ndarray]:
    """A grid of square posts the robot must ride over."""
    if height <= 0 or spacing <= 0:
        raise ValueError("columns need positive height and spacing")
    out = []
    y0 = -(rows - 1) * spacing / 2.0
    for i in range(cols):
        for j in range(rows):
            out.append(
                box(
                    (x0 + i * spacing, y0 + j * spacing, (height - EMBED) / 2.0),
                    (side / 2.0, side / 2.0, (height + EMBED) / 2.0),
                )
            )
    return out


def cylinder(x: float, diameter: float) -> np.ndarray:
    """A round bar lying across the track (axis along y), resting on the ground."""
    if diameter <= 0:
        raise ValueError("cylinder diameter must be positive")
    r = diameter / 2.0
    return _row(PRIM_CYLINDER_Y, [x, r, r])


def pack(rows: list[np.ndarray]) -> np.ndarray:
    """Stack primitive rows into the (P, 22) array the kernels consume."""
    if not rows:
        return np.zeros((0, PRIM_ROW_WIDTH))
    return np.ascontiguousarray(np.vstack(rows))


def surface_height(prims: np.ndarray, x: float, y: float) -> float:
    """Topmost support height at (x, y); used to settle dropped cargo."""
    z = -math.inf
    for prim in prims:
        kind = int(prim[0])
        if kind == PRIM_GROUND:
            z = max(z, prim[1])
        elif kind == PRIM_BOX:
            if abs(x - prim[1]) <= prim[4] and abs(y - prim[2]) <= prim[5]:
                z = max(z, prim[3] + prim[6])
        elif kind == PRIM_CYLINDER_Y:
            dx = x - prim[1]
            if abs(dx) <= prim[3]:
                z = max(z, prim[2] + math.sqrt(prim[3] ** 2 - dx * dx))
        elif kind == PRIM_RAMP:
            if prim[1] <= x <= prim[2] and abs(y) <= prim[5]:
                z = max(z, prim[3] + prim[4] * (x - prim[1]))
    return z
