# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of kernels_py: contact, point transforms, rigid integration.

Semantics must match kernels_py exactly (same primitive menu, same force law,
same integrator); the pure module is the reference.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, hypot, sin, sqrt, tanh

cnp.import_array()

DEF PRIM_GROUND = 0
DEF PRIM_BOX = 1
DEF PRIM_CYLINDER_Y = 2
DEF PRIM_RAMP = 3


cdef inline void _quat_to_matrix(const double* q, double* r) nogil:
    cdef double w = q[0], x = q[1], y = q[2], z = q[3]
    r[0] = 1 - 2 * (y * y + z * z); r[1] = 2 * (x * y - w * z); r[2] = 2 * (x * z + w * y)
    r[3] = 2 * (x * y + w * z); r[4] = 1 - 2 * (x * x + z * z); r[5] = 2 * (y * z - w * x)
    r[6] = 2 * (x * z - w * y); r[7] = 2 * (y * z + w * x); r[8] = 1 - 2 * (x * x + y * y)


def transform_points(q, pos, pts_body):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q_ = np.ascontiguousarray(q, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pos_ = np.ascontiguousarray(pos, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(pts_body, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, 3))
    cdef double r[9]
    cdef Py_ssize_t i
    cdef double px, py, pz
    _quat_to_matrix(&q_[0], r)
    for i in range(n):
        px = pts[i, 0]; py = pts[i, 1]; pz = pts[i, 2]
        out[i, 0] = r[0] * px + r[1] * py + r[2] * pz + pos_[0]
        out[i, 1] = r[3] * px + r[4] * py + r[5] * pz + pos_[1]
        out[i, 2] = r[6] * px + r[7] * py + r[8] * pz + pos_[2]
    return out


cdef inline int _vertex_penetration(const double* p, const double* prim,
                                    double* pen, double* normal) nogil:
    """Returns 1 and fills (pen, normal) when the vertex is inside the primitive."""
    cdef int kind = <int> prim[0]
    cdef double d0, d1, d2, o0, o1, o2, r, best, sd
    cdef int m, f, axis, best_f
    if kind == PRIM_GROUND:
        d0 = prim[1] - p[2]
        if d0 > 0.0:
            pen[0] = d0
            normal[0] = 0.0; normal[1] = 0.0; normal[2] = 1.0
            return 1
        return 0
    if kind == PRIM_BOX:
        d0 = p[0] - prim[1]; d1 = p[1] - prim[2]; d2 = p[2] - prim[3]
        o0 = prim[4] - fabs(d0); o1 = prim[5] - fabs(d1); o2 = prim[6] - fabs(d2)
        if o0 > 0.0 and o1 > 0.0 and o2 > 0.0:
            axis = 0
            if o1 < o0:
                axis = 1
            if o2 < (o1 if o1 < o0 else o0):
                axis = 2
            normal[0] = 0.0; normal[1] = 0.0; normal[2] = 0.0
            if axis == 0:
                pen[0] = o0; normal[0] = 1.0 if d0 >= 0.0 else -1.0
            elif axis == 1:
                pen[0] = o1; normal[1] = 1.0 if d1 >= 0.0 else -1.0
            else:
                pen[0] = o2; normal[2] = 1.0 if d2 >= 0.0 else -1.0
            return 1
        return 0
    if kind == PRIM_CYLINDER_Y:
        d0 = p[0] - prim[1]; d2 = p[2] - prim[2]
        r = hypot(d0, d2)
        if r < prim[3]:
            if r < 1e-12:
                pen[0] = prim[3]
                normal[0] = 0.0; normal[1] = 0.0; normal[2] = 1.0
            else:
                pen[0] = prim[3] - r
                normal[0] = d0 / r; normal[1] = 0.0; normal[2] = d2 / r
            return 1
        return 0
    if kind == PRIM_RAMP:
        if p[0] < prim[1] or p[0] > prim[2] or fabs(p[1]) > prim[5]:
            return 0
        d0 = prim[3] + prim[4] * (p[0] - prim[1])  # surface z
        if p[2] >= d0:
            return 0
        d1 = 1.0 / sqrt(1.0 + prim[4] * prim[4])
        pen[0] = (d0 - p[2]) * d1
        normal[0] = -prim[4] * d1
        normal[1] = 0.0
        normal[2] = d1
        return 1
    return 0


def contact_forces(pts_world, vel, omega, pos, prims,
                   double k_n, double c_n, double mu, double v_slip,
                   double delta_ref=5e-6):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(pts_world, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_ = np.ascontiguousarray(vel, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_ = np.ascontiguousarray(omega, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pos_ = np.ascontiguousarray(pos, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pr = np.ascontiguousarray(prims, dtype=np.float64)
    cdef Py_ssize_t n_pts = pts.shape[0]
    cdef Py_ssize_t n_prims = pr.shape[0]
    cdef double force[3]
    cdef double torque[3]
    cdef double p[3]
    cdef double r[3]
    cdef double vp[3]
    cdef double normal[3]
    cdef double fvec[3]
    cdef double pen = 0.0
    cdef double v_n, f_n, vt0, vt1, vt2, vt_mag, scale
    cdef Py_ssize_t i, j, k
    cdef int count = 0
    for k in range(3):
        force[k] = 0.0
        torque[k] = 0.0
    for i in range(n_pts):
        p[0] = pts[i, 0]; p[1] = pts[i, 1]; p[2] = pts[i, 2]
        for j in range(n_prims):
            if not _vertex_penetration(p, &pr[j, 0], &pen, normal):
                continue
            r[0] = p[0] - pos_[0]; r[1] = p[1] - pos_[1]; r[2] = p[2] - pos_[2]
            vp[0] = v_[0] + w_[1] * r[2] - w_[2] * r[1]
            vp[1] = v_[1] + w_[2] * r[0] - w_[0] * r[2]
            vp[2] = v_[2] + w_[0] * r[1] - w_[1] * r[0]
            v_n = vp[0] * normal[0] + vp[1] * normal[1] + vp[2] * normal[2]
            scale = pen / delta_ref
            if scale > 1.0:
                scale = 1.0
            f_n = k_n * pen - c_n * v_n * scale
            if f_n <= 0.0:
                continue
            fvec[0] = f_n * normal[0]; fvec[1] = f_n * normal[1]; fvec[2] = f_n * normal[2]
            vt0 = vp[0] - v_n * normal[0]
            vt1 = vp[1] - v_n * normal[1]
            vt2 = vp[2] - v_n * normal[2]
            vt_mag = sqrt(vt0 * vt0 + vt1 * vt1 + vt2 * vt2)
            if vt_mag > 1e-12:
                scale = mu * f_n * tanh(vt_mag / v_slip) / vt_mag
                fvec[0] -= scale * vt0
                fvec[1] -= scale * vt1
                fvec[2] -= scale * vt2
            force[0] += fvec[0]; force[1] += fvec[1]; force[2] += fvec[2]
            torque[0] += r[1] * fvec[2] - r[2] * fvec[1]
            torque[1] += r[2] * fvec[0] - r[0] * fvec[2]
            torque[2] += r[0] * fvec[1] - r[1] * fvec[0]
            count += 1
    f_out = np.array([force[0], force[1], force[2]])
    t_out = np.array([torque[0], torque[1], torque[2]])
    return f_out, t_out, count


def integrate_rigid(state, force, torque, double mass, inertia_body, inv_inertia_body, double dt):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.ascontiguousarray(state, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.ascontiguousarray(force, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(torque, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ib = np.ascontiguousarray(inertia_body, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ibinv = np.ascontiguousarray(inv_inertia_body, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(13)
    cdef double r[9]
    cdef double wb[3]
    cdef double tb[3]
    cdef double iw[3]
    cdef double gyro[3]
    cdef double wb_new[3]
    cdef double q_new[4]
    cdef double dq[4]
    cdef double ang, half, sn, norm
    cdef Py_ssize_t k

    # linear, semi-implicit
    out[7] = s[7] + dt * f[0] / mass
    out[8] = s[8] + dt * f[1] / mass
    out[9] = s[9] + dt * f[2] / mass
    out[0] = s[0] + dt * out[7]
    out[1] = s[1] + dt * out[8]
    out[2] = s[2] + dt * out[9]

    _quat_to_matrix(&s[3], r)
    # omega/torque into the body frame (R^T v)
    wb[0] = r[0] * s[10] + r[3] * s[11] + r[6] * s[12]
    wb[1] = r[1] * s[10] + r[4] * s[11] + r[7] * s[12]
    wb[2] = r[2] * s[10] + r[5] * s[11] + r[8] * s[12]
    tb[0] = r[0] * t[0] + r[3] * t[1] + r[6] * t[2]
    tb[1] = r[1] * t[0] + r[4] * t[1] + r[7] * t[2]
    tb[2] = r[2] * t[0] + r[5] * t[1] + r[8] * t[2]
    iw[0] = ib[0, 0] * wb[0] + ib[0, 1] * wb[1] + ib[0, 2] * wb[2]
    iw[1] = ib[1, 0] * wb[0] + ib[1, 1] * wb[1] + ib[1, 2] * wb[2]
    iw[2] = ib[2, 0] * wb[0] + ib[2, 1] * wb[1] + ib[2, 2] * wb[2]
    gyro[0] = tb[0] - (wb[1] * iw[2] - wb[2] * iw[1])
    gyro[1] = tb[1] - (wb[2] * iw[0] - wb[0] * iw[2])
    gyro[2] = tb[2] - (wb[0] * iw[1] - wb[1] * iw[0])
    wb_new[0] = wb[0] + dt * (ibinv[0, 0] * gyro[0] + ibinv[0, 1] * gyro[1] + ibinv[0, 2] * gyro[2])
    wb_new[1] = wb[1] + dt * (ibinv[1, 0] * gyro[0] + ibinv[1, 1] * gyro[1] + ibinv[1, 2] * gyro[2])
    wb_new[2] = wb[2] + dt * (ibinv[2, 0] * gyro[0] + ibinv[2, 1] * gyro[1] + ibinv[2, 2] * gyro[2])
    # back to world
    out[10] = r[0] * wb_new[0] + r[1] * wb_new[1] + r[2] * wb_new[2]
    out[11] = r[3] * wb_new[0] + r[4] * wb_new[1] + r[5] * wb_new[2]
    out[12] = r[6] * wb_new[0] + r[7] * wb_new[1] + r[8] * wb_new[2]

    norm = sqrt(wb_new[0] * wb_new[0] + wb_new[1] * wb_new[1] + wb_new[2] * wb_new[2])
    ang = norm * dt
    if ang > 1e-300:
        half = 0.5 * ang
        sn = sin(half) / norm
        dq[0] = cos(half)
        dq[1] = wb_new[0] * sn
        dq[2] = wb_new[1] * sn
        dq[3] = wb_new[2] * sn
        q_new[0] = s[3] * dq[0] - s[4] * dq[1] - s[5] * dq[2] - s[6] * dq[3]
        q_new[1] = s[3] * dq[1] + s[4] * dq[0] + s[5] * dq[3] - s[6] * dq[2]
        q_new[2] = s[3] * dq[2] - s[4] * dq[3] + s[5] * dq[0] + s[6] * dq[1]
        q_new[3] = s[3] * dq[3] + s[4] * dq[2] - s[5] * dq[1] + s[6] * dq[0]
    else:
        q_new[0] = s[3]; q_new[1] = s[4]; q_new[2] = s[5]; q_new[3] = s[6]
    norm = sqrt(q_new[0] * q_new[0] + q_new[1] * q_new[1] + q_new[2] * q_new[2] + q_new[3] * q_new[3])
    out[3] = q_new[0] / norm
    out[4] = q_new[1] / norm
    out[5] = q_new[2] / norm
    out[6] = q_new[3] / norm
    return out
