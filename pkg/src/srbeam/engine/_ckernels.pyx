# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels.

Twin of ``pykernels.py``; keep the update algebra and the operand order
in the two files identical (the pi/2 spin-rotation symmetry of the
trajectories is exact in floating point only if x/y expressions stay
structurally symmetric).
"""

from libc.math cimport sqrt, cos, sin, isfinite

import numpy as np

from ..errors import NonFiniteState

DEF CHECK_EVERY = 100


def dipole_sums(double[::1] sx, double[::1] sy, double[::1] sz,
                Py_ssize_t head, Py_ssize_t count):
    cdef Py_ssize_t cap = sx.shape[0]
    cdef Py_ssize_t i, p
    cdef double jx = 0.0, jy = 0.0, tz = 0.0
    for i in range(count):
        p = (head + i) % cap
        jx += sx[p]
        jy += sy[p]
        tz += sz[p]
    return jx, jy, tz


cdef inline void _apply_rotation(double[::1] sx, double[::1] sy,
                                 double[::1] sz, Py_ssize_t head,
                                 Py_ssize_t count, Py_ssize_t cap,
                                 double tx, double ty) noexcept nogil:
    cdef double th = sqrt(tx * tx + ty * ty)
    if th == 0.0:
        return
    cdef double ux = tx / th
    cdef double uy = ty / th
    cdef double c = cos(th)
    cdef double s = sin(th)
    cdef double k = 1.0 - c
    cdef double ax, ay, az, dot
    cdef Py_ssize_t i, p
    for i in range(count):
        p = (head + i) % cap
        ax = sx[p]
        ay = sy[p]
        az = sz[p]
        dot = ux * ax + uy * ay
        sx[p] = ax * c + uy * az * s + ux * dot * k
        sy[p] = ay * c - ux * az * s + uy * dot * k
        sz[p] = az * c + (ux * ay - uy * ax) * s


cdef inline (Py_ssize_t, Py_ssize_t, Py_ssize_t) _retire_inject(
        double[::1] sx, double[::1] sy, double[::1] sz, double[::1] x,
        Py_ssize_t head, Py_ssize_t count, Py_ssize_t entered,
        double w_edge, double w, Py_ssize_t n_in,
        double[:, ::1] entry_spins) noexcept nogil:
    cdef Py_ssize_t cap = sx.shape[0]
    cdef Py_ssize_t m, slot
    while count > 0 and x[head] >= w_edge:
        head = (head + 1) % cap
        count -= 1
    for m in range(n_in):
        if count == cap:
            return head, count, -1
        slot = (head + count) % cap
        sx[slot] = entry_spins[entered + m, 0]
        sy[slot] = entry_spins[entered + m, 1]
        sz[slot] = 1.0
        x[slot] = -w
        count += 1
    return head, count, entered + n_in


def adiabatic_chunk(double[::1] sx, double[::1] sy, double[::1] sz,
                    double[::1] x, Py_ssize_t head, Py_ssize_t count,
                    double dt, double v, double w, double g1, double g2,
                    double[:, ::1] noise, long[::1] entry_counts,
                    double[:, ::1] entry_spins):
    cdef Py_ssize_t cap = sx.shape[0]
    cdef double w_edge = w - 0.5 * v * dt
    cdef Py_ssize_t entered = 0
    cdef Py_ssize_t n_steps = entry_counts.shape[0]
    cdef Py_ssize_t n, i, p
    cdef double jx, jy, tz, dnx, dny, wx, wy, tx, ty
    cdef double th, ux, uy, c, s, k, dot, jx1, jy1, jxm, jym
    cdef bint bad = False
    with nogil:
        for n in range(n_steps):
            jx = 0.0
            jy = 0.0
            tz = 0.0
            for i in range(count):
                p = (head + i) % cap
                jx += sx[p]
                jy += sy[p]
                tz += sz[p]
            if n % CHECK_EVERY == 0 and not (isfinite(jx) and isfinite(jy)):
                bad = True
                break
            dnx = noise[n, 0]
            dny = noise[n, 1]
            wx = g1 * jx + g2 * jy
            wy = -g2 * jx + g1 * jy
            tx = -(wy * dt + dny)
            ty = (wx * dt + dnx)
            th = sqrt(tx * tx + ty * ty)
            if th != 0.0:
                ux = tx / th
                uy = ty / th
                c = cos(th)
                s = sin(th)
                k = 1.0 - c
                dot = ux * jx + uy * jy
                jx1 = jx * c + uy * tz * s + ux * dot * k
                jy1 = jy * c - ux * tz * s + uy * dot * k
            else:
                jx1 = jx
                jy1 = jy
            jxm = 0.5 * (jx + jx1)
            jym = 0.5 * (jy + jy1)
            wx = g1 * jxm + g2 * jym
            wy = -g2 * jxm + g1 * jym
            tx = -(wy * dt + dny)
            ty = (wx * dt + dnx)
            _apply_rotation(sx, sy, sz, head, count, cap, tx, ty)
            for i in range(count):
                p = (head + i) % cap
                x[p] += v * dt
            head, count, entered = _retire_inject(
                sx, sy, sz, x, head, count, entered, w_edge, w,
                <Py_ssize_t> entry_counts[n], entry_spins)
            if entered < 0:
                bad = True
                break
    if bad:
        if entered < 0:
            raise NonFiniteState("ring buffer overflow: entry schedule "
                                 "inconsistent with retirement")
        raise NonFiniteState("collective dipole became non-finite")
    return head, count


def full_chunk(double[::1] sx, double[::1] sy, double[::1] sz,
               double[::1] x, Py_ssize_t head, Py_ssize_t count,
               double complex alpha, double dt, double v, double w,
               double g, double complex decay, double complex drive,
               double noise_std, double[:, ::1] noise,
               long[::1] entry_counts, double[:, ::1] entry_spins):
    cdef Py_ssize_t cap = sx.shape[0]
    cdef double w_edge = w - 0.5 * v * dt
    cdef Py_ssize_t entered = 0
    cdef Py_ssize_t n_steps = entry_counts.shape[0]
    cdef Py_ssize_t n, i, p
    cdef double jx, jy, ax, ay, tx, ty
    cdef double complex j, a_new, a_mid
    cdef bint bad = False
    with nogil:
        for n in range(n_steps):
            jx = 0.0
            jy = 0.0
            for i in range(count):
                p = (head + i) % cap
                jx += sx[p]
                jy += sy[p]
            if n % CHECK_EVERY == 0 and not (
                    isfinite(jx) and isfinite(alpha.real)
                    and isfinite(alpha.imag)):
                bad = True
                break
            j = 0.5 * (jx - 1j * jy)
            a_new = decay * alpha + drive * (-0.5j * g * j) \
                + noise_std * (noise[n, 0] + 1j * noise[n, 1])
            a_mid = 0.5 * (alpha + a_new)
            alpha = a_new
            ax = 2.0 * a_mid.real
            ay = -2.0 * a_mid.imag
            tx = 0.5 * g * dt * ax
            ty = 0.5 * g * dt * ay
            _apply_rotation(sx, sy, sz, head, count, cap, tx, ty)
            for i in range(count):
                p = (head + i) % cap
                x[p] += v * dt
            head, count, entered = _retire_inject(
                sx, sy, sz, x, head, count, entered, w_edge, w,
                <Py_ssize_t> entry_counts[n], entry_spins)
            if entered < 0:
                bad = True
                break
    if bad:
        if entered < 0:
            raise NonFiniteState("ring buffer overflow: entry schedule "
                                 "inconsistent with retirement")
        raise NonFiniteState("field or dipole became non-finite")
    return head, count, alpha
