#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure-numpy stepping kernels.

Runs identical chunks through both backends and reports atom-steps per
second. Typical result: the compiled kernel is one to two orders of
magnitude faster for ensemble sizes of a few hundred atoms, which is
what makes the desk-scale acceptance runs take seconds instead of
minutes.

Usage: python benchmarks/bench_kernels.py [--atoms 500] [--steps 4000]
"""

import argparse
import math
import time

import numpy as np

from srbeam.engine import pykernels

try:
    from srbeam.engine import _ckernels
except ImportError:
    _ckernels = None


def make_state(n_atoms, rng):
    cap = n_atoms + 8
    sx = np.zeros(cap)
    sy = np.zeros(cap)
    sz = np.zeros(cap)
    x = np.zeros(cap)
    # pre-filled mode: one atom per tau/N
    for k in range(n_atoms):
        sx[k] = rng.choice([-1.0, 1.0])
        sy[k] = rng.choice([-1.0, 1.0])
        sz[k] = 1.0
        x[k] = -1.0 + 2.0 * k / n_atoms
    order = np.argsort(-x[:n_atoms])
    sx[:n_atoms] = sx[order]
    sy[:n_atoms] = sy[order]
    sz[:n_atoms] = sz[order]
    x[:n_atoms] = x[order]
    return sx, sy, sz, x


def bench(kernels, label, n_atoms, n_steps, repeats=3):
    rng = np.random.default_rng(7)
    s = 200  # steps per transit
    dt = 1.0 / s
    g = 20.0
    gamma_c = g / n_atoms
    g1 = 0.5 * gamma_c
    g2 = 0.0
    sigma = math.sqrt(gamma_c)
    counts = np.diff((np.arange(n_steps + 1) * n_atoms) // s).astype(np.int64)
    best = math.inf
    for _ in range(repeats):
        sx, sy, sz, x = make_state(n_atoms, rng)
        noise = rng.standard_normal((n_steps, 2)) * (sigma * math.sqrt(dt))
        spins = (rng.integers(0, 2, size=(int(counts.sum()), 2)) * 2 - 1).astype(float)
        t0 = time.perf_counter()
        kernels.adiabatic_chunk(sx, sy, sz, x, 0, n_atoms, dt, 2.0, 1.0,
                                g1, g2, noise, counts, spins)
        best = min(best, time.perf_counter() - t0)
    rate = n_atoms * n_steps / best
    print(f"{label:>8}: {best * 1e3:8.1f} ms for {n_steps} steps "
          f"({rate / 1e6:8.2f} M atom-steps/s)")
    return rate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--atoms", type=int, default=500)
    ap.add_argument("--steps", type=int, default=4000)
    args = ap.parse_args()
    print(f"adiabatic kernel, {args.atoms} atoms, {args.steps} steps")
    r_py = bench(pykernels, "python", args.atoms, args.steps)
    if _ckernels is None:
        print("compiled backend not available")
        return
    r_cy = bench(_ckernels, "cython", args.atoms, args.steps)
    print(f"speedup: {r_cy / r_py:.1f}x")


if __name__ == "__main__":
    main()
