"""Stochastic ensemble integrator for the beam-cavity system.

Two integration modes:

* ``"full"``   -- explicit cavity quadratures driven by vacuum noise,
  exact exponential treatment of the linear cavity part.
* ``"adiabatic"`` -- cavity eliminated (bad-cavity limit); the atoms
  feel their own collective dipole plus a shared white noise pair.

Atoms are classical pseudo-spins transported ballistically through the
box mode: one pseudo-atom per physical atom (method of characteristics,
exact for a single-velocity beam). Dipole updates are exact rotations
generated by the instantaneous angular velocity evaluated at the
midpoint dipole (Stratonovich), so the spin length is conserved to
rounding.
"""

import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import engine
from .errors import NonFiniteState
from .params import SystemParams, mode_function
from .provenance import content_hash

_MAGIC = b"SRBJ"
_BIN_VERSION = 1


@dataclass
class AtomState:
    """View of one beam atom (entry time inferred from position)."""

    entry_time: float
    x: float
    sx: float
    sy: float
    sz: float


@dataclass
class CavityField:
    """Cavity quadratures; complex amplitude alpha = (ax - i ay)/2."""

    ax: float
    ay: float

    @property
    def alpha(self):
        return 0.5 * (self.ax - 1j * self.ay)


class Ensemble:
    """Atoms currently inside the mode plus (full mode) the cavity field.

    Storage is a ring buffer (oldest first); alive atoms always satisfy
    -w <= x < w. The deterministic entry schedule inserts one atom per
    tau/N; with ``poisson=True`` per-step arrival counts are Poissonian
    with the same mean.
    """

    def __init__(self, params: SystemParams, mode="adiabatic", seed_seqs=None,
                 poisson=False):
        if mode not in ("adiabatic", "full"):
            raise ValueError(f"unknown mode {mode!r}")
        self.params = params
        self.mode = mode
        self.poisson = poisson
        n = params.n_atoms
        self.steps_per_tau = int(round(params.tau / params.dt))
        self.dt = params.tau / self.steps_per_tau
        cap = n + 8
        self.sx = np.zeros(cap)
        self.sy = np.zeros(cap)
        self.sz = np.zeros(cap)
        self.x = np.zeros(cap)
        self.head = 0
        self.count = 0
        self.step = 0
        self.entered = 0
        self.alpha = 0.0 + 0.0j
        if seed_seqs is None:
            seed_seqs = np.random.SeedSequence(params.rng_seed).spawn(3)
        self.rng_atoms = np.random.default_rng(seed_seqs[0])
        self.rng_noise = np.random.default_rng(seed_seqs[1])
        self.rng_arrivals = np.random.default_rng(seed_seqs[2])

    @property
    def t(self):
        return self.step * self.dt

    @property
    def atoms(self):
        idx = (self.head + np.arange(self.count)) % len(self.sx)
        t = self.t
        v = self.params.vx
        w = self.params.w
        return [AtomState(entry_time=t - (self.x[p] + w) / v, x=self.x[p],
                          sx=self.sx[p], sy=self.sy[p], sz=self.sz[p])
                for p in idx]

    @property
    def cavity(self):
        return CavityField(ax=2.0 * self.alpha.real, ay=-2.0 * self.alpha.imag)

    def collective_dipole(self):
        """Complex J = (Jx - i Jy)/2 recomputed fresh from the atoms."""
        jx, jy, _ = engine.dipole_sums(self.sx, self.sy, self.sz,
                                       self.head, self.count)
        return 0.5 * (jx - 1j * jy)

    # -- entry schedule -------------------------------------------------
    def _entry_counts(self, n_steps):
        """Arrivals per step for the next n_steps (current step excluded)."""
        n = self.params.n_atoms
        s = self.steps_per_tau
        if self.poisson:
            return self.rng_arrivals.poisson(n / s, size=n_steps).astype(np.int64)
        base = self.step
        tot = (np.arange(base, base + n_steps + 1) * n) // s
        return np.diff(tot).astype(np.int64)

    def _draw_entry_spins(self, n_entries):
        if n_entries == 0:
            return np.empty((0, 2))
        return (self.rng_atoms.integers(0, 2, size=(n_entries, 2)) * 2 - 1).astype(float)

    # -- stepping -------------------------------------------------------
    def _advance(self, n_steps, noise=None, entry_spins=None):
        """Run n_steps through the selected backend kernel."""
        p = self.params
        counts = self._entry_counts(n_steps)
        if entry_spins is None:
            entry_spins = self._draw_entry_spins(int(counts.sum()))
        if self.mode == "adiabatic":
            chi = p.bad_cavity_chi()
            g1 = 0.5 * p.gamma_c * chi.cos * chi.cos
            g2 = -0.5 * p.gamma_c * chi.cos * chi.sin
            sigma = math.sqrt(p.gamma_c) * abs(chi.cos)
            if noise is None:
                noise = self.rng_noise.standard_normal((n_steps, 2))
            noise = noise * (sigma * math.sqrt(self.dt))
            self.head, self.count = engine.adiabatic_chunk(
                self.sx, self.sy, self.sz, self.x, self.head, self.count,
                self.dt, p.vx, p.w, g1, g2, noise, counts, entry_spins)
        else:
            lam = 0.5 * p.kappa + 1j * p.delta
            decay = np.exp(-lam * self.dt)
            drive = (1.0 - decay) / lam
            noise_std = math.sqrt((1.0 - math.exp(-p.kappa * self.dt)) / 4.0)
            if noise is None:
                noise = self.rng_noise.standard_normal((n_steps, 2))
            self.head, self.count, self.alpha = engine.full_chunk(
                self.sx, self.sy, self.sz, self.x, self.head, self.count,
                complex(self.alpha), self.dt, p.vx, p.w, p.g_coupling,
                complex(decay), complex(drive), noise_std, np.ascontiguousarray(noise),
                counts, entry_spins)
        self.step += n_steps
        self.entered += int(counts.sum())
        return self


def inject_and_retire(ensemble, dt=None, rng=None):
    """Boundary flow only: advance positions, retire exits, insert entries.

    Entries follow the deterministic one-per-(tau/N) schedule (or Poisson
    arrivals if the ensemble was built that way); each new atom starts at
    x = -w with sz = 1 and sx, sy drawn independently from {-1, +1}.
    """
    p = ensemble.params
    if dt is None:
        dt = ensemble.dt
    if dt <= 0:
        raise ValueError("dt must be positive")
    rng = rng or ensemble.rng_atoms
    cap = len(ensemble.sx)
    idx = (ensemble.head + np.arange(ensemble.count)) % cap
    ensemble.x[idx] += p.vx * dt
    w_edge = p.w - 0.5 * p.vx * dt
    while ensemble.count > 0 and ensemble.x[ensemble.head] >= w_edge:
        ensemble.head = (ensemble.head + 1) % cap
        ensemble.count -= 1
    t_new = ensemble.t + dt
    if ensemble.poisson:
        n_in = int(ensemble.rng_arrivals.poisson(p.n_atoms * dt / p.tau))
    else:
        total = int(math.floor(t_new * p.n_atoms / p.tau + 1e-9))
        n_in = total - ensemble.entered
    spins = (rng.integers(0, 2, size=(n_in, 2)) * 2 - 1).astype(float)
    for m in range(n_in):
        slot = (ensemble.head + ensemble.count) % cap
        ensemble.sx[slot] = spins[m, 0]
        ensemble.sy[slot] = spins[m, 1]
        ensemble.sz[slot] = 1.0
        ensemble.x[slot] = -p.w
        ensemble.count += 1
    ensemble.entered += n_in
    if abs(dt - ensemble.dt) < 1e-12 * ensemble.dt:
        ensemble.step += 1
    return ensemble


def step_adiabatic(ensemble, params=None, dt=None, rng=None):
    """One step of the cavity-eliminated equations (rotation + boundary flow)."""
    p = params or ensemble.params
    if ensemble.steps_per_tau < 200:
        raise ValueError("adiabatic mode requires dt <= tau/200")
    del p, dt, rng  # step size is fixed by the ensemble discretization
    return ensemble._advance(1)


def step_full(ensemble, params=None, dt=None, rng=None):
    """One step of the coupled field + dipole equations."""
    p = params or ensemble.params
    if ensemble.steps_per_tau < 100 or ensemble.dt > 0.1 / p.kappa:
        raise ValueError("full mode requires dt <= min(tau/100, 0.1/kappa)")
    del dt, rng
    return ensemble._advance(1)


@dataclass
class TrajectoryRecord:
    """Uniformly sampled time series of one stochastic run."""

    times: np.ndarray
    j: np.ndarray                       # complex collective dipole
    alpha: Optional[np.ndarray] = None  # complex field (full mode only)
    dt_sample: float = 0.0
    n_atoms: int = 0
    mode: str = "adiabatic"
    params_hash: str = ""
    run_index: int = 0

    def to_csv(self, path):
        cols = "t,re_j,im_j" + (",re_alpha,im_alpha" if self.alpha is not None else "")
        with open(path, "w", newline="") as fh:
            fh.write(f"# params_hash={self.params_hash} mode={self.mode} "
                     f"n_atoms={self.n_atoms} run={self.run_index}\n")
            fh.write(cols + "\n")
            for i, t in enumerate(self.times):
                row = [repr(float(t)), repr(float(self.j[i].real)),
                       repr(float(self.j[i].imag))]
                if self.alpha is not None:
                    row += [repr(float(self.alpha[i].real)),
                            repr(float(self.alpha[i].imag))]
                fh.write(",".join(row) + "\n")

    def to_binary(self, path):
        """Flat binary layout.

        Header: magic 'SRBJ', u16 version, u16 flags (bit0 = has field),
        20-byte params hash, u64 n_atoms, f64 dt_sample, u64 length; then
        little-endian f64 payload arrays: t, Re J, Im J [, Re a, Im a].
        """
        flags = 1 if self.alpha is not None else 0
        n = len(self.times)
        hash_bytes = bytes.fromhex(self.params_hash or "0" * 40)
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<HH", _BIN_VERSION, flags))
            fh.write(hash_bytes)
            fh.write(struct.pack("<QdQ", self.n_atoms, self.dt_sample, n))
            for arr in self._payload_arrays():
                fh.write(np.asarray(arr, dtype="<f8").tobytes())

    def _payload_arrays(self):
        arrs = [self.times, self.j.real, self.j.imag]
        if self.alpha is not None:
            arrs += [self.alpha.real, self.alpha.imag]
        return arrs

    @classmethod
    def from_binary(cls, path):
        with open(path, "rb") as fh:
            if fh.read(4) != _MAGIC:
                raise ValueError("not a trajectory file")
            version, flags = struct.unpack("<HH", fh.read(4))
            if version != _BIN_VERSION:
                raise ValueError(f"unsupported version {version}")
            params_hash = fh.read(20).hex()
            n_atoms, dt_sample, n = struct.unpack("<QdQ", fh.read(24))
            def read_arr():
                return np.frombuffer(fh.read(8 * n), dtype="<f8").astype(float)
            times = read_arr()
            j = read_arr() + 1j * read_arr()
            alpha = (read_arr() + 1j * read_arr()) if flags & 1 else None
        return cls(times=times, j=j, alpha=alpha, dt_sample=dt_sample,
                   n_atoms=int(n_atoms), params_hash=params_hash,
                   mode="full" if flags & 1 else "adiabatic")


def _run_one(params, mode, n_samples, sample_every, seed_seqs, poisson,
             run_index, phash):
    ens = Ensemble(params, mode=mode, seed_seqs=seed_seqs, poisson=poisson)
    dt_sample = sample_every * ens.dt
    times = np.arange(n_samples + 1) * dt_sample
    j = np.empty(n_samples + 1, dtype=complex)
    alpha = np.empty(n_samples + 1, dtype=complex) if mode == "full" else None
    j[0] = ens.collective_dipole()
    if alpha is not None:
        alpha[0] = ens.alpha
    for k in range(1, n_samples + 1):
        ens._advance(sample_every)
        j[k] = ens.collective_dipole()
        if alpha is not None:
            alpha[k] = ens.alpha
    return TrajectoryRecord(times=times, j=j, alpha=alpha,
                            dt_sample=dt_sample, n_atoms=params.n_atoms,
                            mode=mode, params_hash=phash, run_index=run_index)


def simulate(params, mode, total_time, n_runs, sample_dt, n_workers=1,
             poisson=False):
    """Integrate n_runs independent trajectories.

    Runs are seeded by counter-based splitting of the master seed, so the
    result is deterministic and independent of execution order or worker
    count. ``total_time`` and ``sample_dt`` are in the same units as
    ``params.tau``. Raises NonFiniteState (with the run index) if any
    trajectory diverges.
    """
    if mode not in ("adiabatic", "full"):
        raise ValueError(f"unknown mode {mode!r}")
    steps_per_tau = int(round(params.tau / params.dt))
    if mode == "adiabatic" and steps_per_tau < 200:
        raise ValueError("adiabatic mode requires dt <= tau/200")
    if mode == "full" and (steps_per_tau < 100
                           or params.tau / steps_per_tau > 0.1 / params.kappa):
        raise ValueError("full mode requires dt <= min(tau/100, 0.1/kappa)")
    dt = params.tau / steps_per_tau
    sample_every = max(1, int(round(sample_dt / dt)))
    n_samples = int(math.floor(total_time / (sample_every * dt) + 1e-9))
    phash = content_hash(params)
    streams = params.spawn_trajectory_streams(n_runs)
    jobs = [(params, mode, n_samples, sample_every, streams[r], poisson, r, phash)
            for r in range(n_runs)]
    records = []
    try:
        if n_workers > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                records = list(pool.map(_run_one_star, jobs))
        else:
            records = [_run_one_star(job) for job in jobs]
    except NonFiniteState:
        raise
    return records


def _run_one_star(job):
    params, mode, n_samples, sample_every, seqs, poisson, r, phash = job
    try:
        return _run_one(params, mode, n_samples, sample_every, seqs, poisson,
                        r, phash)
    except NonFiniteState as exc:
        raise NonFiniteState(f"run {r}: {exc}", run_index=r) from exc
