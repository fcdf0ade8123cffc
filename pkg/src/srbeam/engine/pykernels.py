"""Pure-numpy stepping kernels (fallback backend).

Semantics contract shared with the compiled backend in ``_ckernels.pyx``:

* Atom storage is a ring buffer of capacity ``len(sx)``; the alive atoms
  occupy slots ``(head + i) % cap`` for ``i < count``, oldest first. Alive
  atoms are always inside the box mode (eta = 1): they are inserted at
  x = -w and retired once x >= w, so the collective dipole is a plain sum.
* One step: (1) rotate every alive spin by the shared angular-velocity
  increment -- the equations of motion are an exact global rotation
  generated by (collective dipole + shared noise), evaluated at the
  midpoint dipole (Heun predictor); (2) advance positions; (3) retire
  atoms past the exit edge; (4) insert scheduled entries at x = -w.
* The (x, y) algebra is arranged so that a global pi/2 rotation of entry
  spins and noise maps trajectories onto each other bit-exactly
  (negation and operand swap are exact in floating point). Keep the
  operand order in both backends identical when editing.

The noise array holds pre-scaled increments (already multiplied by
sigma*sqrt(dt)); entry spins are pre-drawn (+/-1 pairs), consumed in
entry order.
"""

import math

import numpy as np

from ..errors import NonFiniteState

_CHECK_EVERY = 100


def dipole_sums(sx, sy, sz, head, count):
    """Sums of spin components over alive atoms: (jx, jy, sz_total)."""
    cap = len(sx)
    idx = (head + np.arange(count)) % cap
    return float(sx[idx].sum()), float(sy[idx].sum()), float(sz[idx].sum())


def _rotate(sx, sy, sz, tx, ty):
    """Rotate spins about the in-plane axis (tx, ty, 0) by |t| radians."""
    th = math.sqrt(tx * tx + ty * ty)
    if th == 0.0:
        return sx, sy, sz
    ux = tx / th
    uy = ty / th
    c = math.cos(th)
    s = math.sin(th)
    k = 1.0 - c
    dot = ux * sx + uy * sy
    nx = sx * c + uy * sz * s + ux * dot * k
    ny = sy * c - ux * sz * s + uy * dot * k
    nz = sz * c + (ux * sy - uy * sx) * s
    return nx, ny, nz


def _retire_inject(sx, sy, sz, x, head, count, entered, v, dt, w_edge, w,
                   n_in, entry_spins):
    cap = len(sx)
    # retire from the old end (FIFO: oldest atoms are furthest along)
    while count > 0 and x[head] >= w_edge:
        head = (head + 1) % cap
        count -= 1
    for m in range(n_in):
        if count == cap:
            raise NonFiniteState("ring buffer overflow: entry schedule "
                                 "inconsistent with retirement")
        slot = (head + count) % cap
        sx[slot] = entry_spins[entered + m, 0]
        sy[slot] = entry_spins[entered + m, 1]
        sz[slot] = 1.0
        x[slot] = -w
        count += 1
    return head, count, entered + n_in


def adiabatic_chunk(sx, sy, sz, x, head, count, dt, v, w, g1, g2,
                    noise, entry_counts, entry_spins):
    """Advance the cavity-eliminated equations by len(entry_counts) steps."""
    cap = len(sx)
    w_edge = w - 0.5 * v * dt
    entered = 0
    n_steps = len(entry_counts)
    for n in range(n_steps):
        idx = (head + np.arange(count)) % cap
        vx_ = sx[idx]
        vy_ = sy[idx]
        vz_ = sz[idx]
        jx = float(vx_.sum())
        jy = float(vy_.sum())
        tz = float(vz_.sum())
        if n % _CHECK_EVERY == 0 and not (math.isfinite(jx) and math.isfinite(jy)):
            raise NonFiniteState("collective dipole became non-finite")
        dnx = noise[n, 0]
        dny = noise[n, 1]
        # predictor: rotate the totals, then use the midpoint dipole
        wx = g1 * jx + g2 * jy
        wy = -g2 * jx + g1 * jy
        tx = -(wy * dt + dny)
        ty = (wx * dt + dnx)
        jx1, jy1, _ = _rotate(jx, jy, tz, tx, ty)
        jxm = 0.5 * (jx + jx1)
        jym = 0.5 * (jy + jy1)
        wx = g1 * jxm + g2 * jym
        wy = -g2 * jxm + g1 * jym
        tx = -(wy * dt + dny)
        ty = (wx * dt + dnx)
        nx, ny, nz = _rotate(vx_, vy_, vz_, tx, ty)
        sx[idx] = nx
        sy[idx] = ny
        sz[idx] = nz
        x[idx] += v * dt
        head, count, entered = _retire_inject(
            sx, sy, sz, x, head, count, entered, v, dt, w_edge, w,
            int(entry_counts[n]), entry_spins)
    return head, count


def full_chunk(sx, sy, sz, x, head, count, alpha, dt, v, w, g,
               decay, drive, noise_std, noise, entry_counts, entry_spins):
    """Advance the coupled field + dipole equations by one chunk.

    The linear cavity part is integrated exactly over each step
    (``decay = exp(-(i*delta + kappa/2) dt)``, ``drive = (1-decay)/lambda``)
    with the dipole source frozen at the step start; spins rotate in the
    midpoint field. ``noise_std`` is the per-quadrature standard deviation
    of the exact Ornstein-Uhlenbeck increment, sqrt((1-exp(-kappa dt))/4).
    """
    cap = len(sx)
    w_edge = w - 0.5 * v * dt
    entered = 0
    n_steps = len(entry_counts)
    for n in range(n_steps):
        idx = (head + np.arange(count)) % cap
        vx_ = sx[idx]
        vy_ = sy[idx]
        vz_ = sz[idx]
        jx = float(vx_.sum())
        jy = float(vy_.sum())
        if n % _CHECK_EVERY == 0 and not (
                math.isfinite(jx) and math.isfinite(alpha.real)
                and math.isfinite(alpha.imag)):
            raise NonFiniteState("field or dipole became non-finite")
        j = 0.5 * (jx - 1j * jy)
        a_new = decay * alpha + drive * (-0.5j * g * j) \
            + noise_std * complex(noise[n, 0], noise[n, 1])
        a_mid = 0.5 * (alpha + a_new)
        alpha = a_new
        ax = 2.0 * a_mid.real
        ay = -2.0 * a_mid.imag
        tx = 0.5 * g * dt * ax
        ty = 0.5 * g * dt * ay
        nx, ny, nz = _rotate(vx_, vy_, vz_, tx, ty)
        sx[idx] = nx
        sy[idx] = ny
        sz[idx] = nz
        x[idx] += v * dt
        head, count, entered = _retire_inject(
            sx, sy, sz, x, head, count, entered, v, dt, w_edge, w,
            int(entry_counts[n]), entry_spins)
    return head, count, alpha
