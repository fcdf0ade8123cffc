"""Estimators mapping dipole time series to light-field observables.

All quantities derive from the collective dipole J(t): the per-atom
output power (photons emitted per atom per transit), the zero-delay
second-order coherence g2(0), and the finite-window emission spectrum.
The semiclassical records carry symmetric-ordered statistics, so these
are the same estimators used for the published curves.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivisionUnstable, InsufficientData

_MIN_POST_TRANSIENT = 50.0  # transit times of usable data for moment estimators


def _pool_samples(records, t0, min_span):
    """Concatenate |J| samples with t > t0 across records."""
    pools = []
    for rec in records:
        span = rec.times[-1] - t0
        if span < min_span * (1.0 - 1e-9):
            raise InsufficientData(
                f"need {min_span} transit times after t0, have {span:.1f}")
        pools.append(rec.j[rec.times > t0])
    return np.concatenate(pools)


def output_power(records, params, t0):
    """Per-atom output power Gamma_c cos^2(chi) tau <|J|^2> / N.

    Time-and-ensemble average over t > t0; in units of one photon per
    atom per transit.
    """
    chi = params.bad_cavity_chi()
    j = _pool_samples(records, t0, _MIN_POST_TRANSIENT)
    return (params.gamma_c * chi.cos ** 2 * params.tau
            * float(np.mean(np.abs(j) ** 2)) / params.n_atoms)


def g2_zero(records, t0):
    """Zero-delay second-order coherence <|J|^4> / <|J|^2>^2."""
    j = _pool_samples(records, t0, _MIN_POST_TRANSIENT)
    m2 = float(np.mean(np.abs(j) ** 2))
    n = records[0].n_atoms or 1
    if m2 < 1e-12 * n * n:
        raise DivisionUnstable(f"<|J|^2> = {m2:.3e} too small for a stable ratio")
    return float(np.mean(np.abs(j) ** 4)) / m2 ** 2


@dataclass
class SpectrumResult:
    """Finite-window emission spectrum, normalized to its maximum."""

    frequencies: np.ndarray     # units 1/tau (record time units)
    magnitude: np.ndarray       # |S| / max |S|
    resolution: float           # 2*pi / t_cut
    scale: float                # max |S| before normalization
    values: np.ndarray          # complex unnormalized S(nu)
    metadata: dict = field(default_factory=dict)
    window_times: np.ndarray = None
    window_weights: np.ndarray = None


def spectrum(records, t0, t_cut, nu_max=16.0, sliding=False, hann=False):
    """Windowed transform of the dipole correlation <J*(t0+t) J(t0)>.

    The correlation is estimated by an ensemble average at fixed t0
    (default); ``sliding=True`` additionally averages the start time over
    the available stationary stretch (variance reduction, flagged in the
    metadata). The plain truncated window is the default; ``hann=True``
    tapers the correlation for leakage studies. The frequency grid is
    symmetric with spacing resolution/8.
    """
    rec0 = records[0]
    dt = rec0.dt_sample
    i0 = int(round(t0 / dt))
    nc = int(round(t_cut / dt))
    if i0 + nc >= len(rec0.times):
        raise InsufficientData(
            f"records of length {rec0.times[-1]:.1f} cannot window "
            f"t0 + t_cut = {t0 + t_cut:.1f}")
    corr = np.zeros(nc + 1, dtype=complex)
    n_terms = 0
    for rec in records:
        if sliding:
            for s in range(i0, len(rec.j) - nc):
                corr += np.conj(rec.j[s:s + nc + 1]) * rec.j[s]
                n_terms += 1
        else:
            corr += np.conj(rec.j[i0:i0 + nc + 1]) * rec.j[i0]
            n_terms += 1
    corr /= n_terms
    tt = np.arange(nc + 1) * dt
    weights = np.full(nc + 1, dt)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    if hann:
        weights = weights * (0.5 * (1.0 + np.cos(math.pi * tt / t_cut)))
    dnu = math.pi / (4.0 * t_cut)
    n_half = int(math.floor(nu_max / dnu))
    nus = np.arange(-n_half, n_half + 1) * dnu
    vals = np.exp(-1j * np.outer(nus, tt)) @ (weights * corr)
    mag = np.abs(vals)
    scale = float(mag.max())
    return SpectrumResult(
        frequencies=nus, magnitude=mag / scale, resolution=2.0 * math.pi / t_cut,
        scale=scale, values=vals,
        metadata={"estimator": "sliding" if sliding else "fixed-t0",
                  "taper": "hann" if hann else "none",
                  "t0": t0, "t_cut": t_cut, "n_terms": n_terms},
        window_times=tt, window_weights=weights)


def _line_kernel(spec, nu0):
    """Window transform of a unit tone at nu0 on the result's grid."""
    return np.exp(-1j * np.outer(spec.frequencies - nu0, spec.window_times)) \
        @ spec.window_weights


def peak_find(spec, min_prominence=0.1, max_peaks=32, return_amplitudes=False):
    """Spectral lines above a fractional threshold, sorted by magnitude.

    The truncated window gives every line sidelobes at 0.22 of its
    height, so raw local maxima over-count; lines are instead extracted
    iteratively (matching pursuit): take the strongest residual maximum,
    refine it parabolically, fit the complex line amplitude, subtract the
    full window kernel, repeat until the residual drops below
    min_prominence of the original maximum.
    """
    residual = spec.values.copy()
    floor = min_prominence * spec.scale
    dnu = spec.frequencies[1] - spec.frequencies[0]
    found = []
    last_max = np.inf
    for _ in range(max_peaks):
        mags = np.abs(residual)
        i = int(np.argmax(mags))
        peak = mags[i]
        if peak < floor or peak >= last_max * (1.0 - 1e-12):
            break
        last_max = peak
        nu0 = spec.frequencies[i]
        if 0 < i < len(mags) - 1:
            y0, y1, y2 = mags[i - 1], mags[i], mags[i + 1]
            denom = y0 - 2.0 * y1 + y2
            if denom != 0.0:
                shift = 0.5 * (y0 - y2) / denom
                nu0 += float(np.clip(shift, -0.5, 0.5)) * dnu
        kern = _line_kernel(spec, nu0)
        amp = np.vdot(kern, residual) / np.vdot(kern, kern)
        residual = residual - amp * kern
        # refinement of an already-extracted line (finite linewidth leaves
        # residual wings): subtract but do not count it twice
        if all(abs(nu0 - f) >= spec.resolution for f, _ in found):
            found.append((nu0, abs(amp) * np.abs(kern).max() / spec.scale))
    found.sort(key=lambda p: -p[1])
    freqs = [f for f, _ in found]
    if return_amplitudes:
        return freqs, [a for _, a in found]
    return freqs
