"""Pure numpy implementation of the hot dynamics kernels.

The compiled twin in ``_core.pyx`` exposes the same three entry points with
identical semantics; ``kernels.py`` selects whichever is available. Keep the
two in lockstep: any behavioral change here must land there too.

State row layout (float64, length 13):
    [px, py, pz, qw, qx, qy, qz, vx, vy, vz, wx, wy, wz]
with the angular velocity in the world frame.

Terrain primitives are rows of a (P, 22) float64 array: column 0 is the type
code, the rest are parameters:
    0 ground     p0 = z0
    1 box        p0:3 center, p3:6 half extents
    2 cylinder   axis along y: p0 = x0, p1 = z_center, p2 = radius
    3 ramp       walkable slope: p0 = x_start, p1 = x_end, p2 = z_at_start,
                 p3 = dz/dx, p4 = y_half; vertical-gap penetration projected
                 onto the slope normal (heightmap-style, no overhangs)
"""

from __future__ import annotations

import numpy as np

PRIM_GROUND = 0
PRIM_BOX = 1
PRIM_CYLINDER_Y = 2
PRIM_RAMP = 3
PRIM_ROW_WIDTH = 22


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    n = np.linalg.norm(axis)
    if n < 1e-300:
        return np.array([1.0, 0.0, 0.0, 0.0])
    half = 0.5 * angle
    s = np.sin(half) / n
    return np.array([np.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def transform_points(q: np.ndarray, pos: np.ndarray, pts_body: np.ndarray) -> np.ndarray:
    """World positions of body-frame points."""
    return pts_body @ quat_to_matrix(q).T + pos


def _vertex_penetration(p: np.ndarray, prim: np.ndarray):
    """Deepest-face pushout for one vertex against one primitive.

    Returns (penetration, normal) with penetration > 0 when inside, else None.
    """
    kind = int(prim[0])
    if kind == PRIM_GROUND:
        pen = prim[1] - p[2]
        if pen > 0.0:
            return pen, np.array([0.0, 0.0, 1.0])
        return None
    if kind == PRIM_BOX:
        d = p - prim[1:4]
        half = prim[4:7]
        overlap = half - np.abs(d)
        if np.all(overlap > 0.0):
            axis = int(np.argmin(overlap))
            normal = np.zeros(3)
            normal[axis] = 1.0 if d[axis] >= 0.0 else -1.0
            return float(overlap[axis]), normal
        return None
    if kind == PRIM_CYLINDER_Y:
        dx = p[0] - prim[1]
        dz = p[2] - prim[2]
        r = np.hypot(dx, dz)
        if r < prim[3]:
            if r < 1e-12:
                return float(prim[3]), np.array([0.0, 0.0, 1.0])
            return float(prim[3] - r), np.array([dx / r, 0.0, dz / r])
        return None
    if kind == PRIM_RAMP:
        x0, x1, z0, slope, y_half = prim[1:6]
        if not (x0 <= p[0] <= x1) or abs(p[1]) > y_half:
            return None
        z_surf = z0 + slope * (p[0] - x0)
        if p[2] >= z_surf:
            return None
        inv = 1.0 / np.sqrt(1.0 + slope * slope)
        normal = np.array([-slope * inv, 0.0, inv])
        return (z_surf - p[2]) * inv, normal
    return None


def contact_forces(
    pts_world: np.ndarray,
    vel: np.ndarray,
    omega: np.ndarray,
    pos: np.ndarray,
    prims: np.ndarray,
    k_n: float,
    c_n: float,
    mu: float,
    v_slip: float,
    delta_ref: float = 5e-6,
):
    """Penalty contact with tanh-regularized Coulomb friction.

    Normal damping scales with penetration (Hunt-Crossley style), so first
    touch carries no damping kick while settled contacts are fully damped.
    Returns (force, torque_about_pos, contact_count).
    """
    force = np.zeros(3)
    torque = np.zeros(3)
    count = 0
    for p in pts_world:
        for prim in prims:
            hit = _vertex_penetration(p, prim)
            if hit is None:
                continue
            pen, normal = hit
            r = p - pos
            v_point = vel + np.cross(omega, r)
            v_n = float(v_point @ normal)
            f_n = k_n * pen - c_n * v_n * min(pen / delta_ref, 1.0)
            if f_n <= 0.0:
                continue
            f_vec = f_n * normal
            v_t = v_point - v_n * normal
            v_t_mag = float(np.linalg.norm(v_t))
            if v_t_mag > 1e-12:
                f_vec = f_vec - mu * f_n * np.tanh(v_t_mag / v_slip) * (v_t / v_t_mag)
            force += f_vec
            torque += np.cross(r, f_vec)
            count += 1
    return force, torque, count


def integrate_rigid(
    state: np.ndarray,
    force: np.ndarray,
    torque: np.ndarray,
    mass: float,
    inertia_body: np.ndarray,
    inv_inertia_body: np.ndarray,
    dt: float,
) -> np.ndarray:
    """Semi-implicit Newton-Euler step; quaternion renormalized."""
    pos = state[0:3]
    q = state[3:7]
    vel = state[7:10]
    omega_w = state[10:13]

    vel_new = vel + (dt / mass) * force
    pos_new = pos + dt * vel_new

    rot = quat_to_matrix(q)
    omega_b = rot.T @ omega_w
    torque_b = rot.T @ torque
    gyro = np.cross(omega_b, inertia_body @ omega_b)
    omega_b_new = omega_b + dt * (inv_inertia_body @ (torque_b - gyro))
    omega_w_new = rot @ omega_b_new

    ang = float(np.linalg.norm(omega_b_new)) * dt
    if ang > 1e-300:
        dq = quat_from_axis_angle(omega_b_new, ang)
        q_new = quat_multiply(q, dq)
    else:
        q_new = q.copy()
    q_new = q_new / np.linalg.norm(q_new)

    out = np.empty(13)
    out[0:3] = pos_new
    out[3:7] = q_new
    out[7:10] = vel_new
    out[10:13] = omega_w_new
    return out
