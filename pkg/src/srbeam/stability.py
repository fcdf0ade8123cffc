"""Linear stability of the stationary beam configurations.

Two dispersion relations are implemented: a scalar one for fluctuations
about the inverted (non-emitting) beam, and a 2x2 matrix one for
fluctuations about the collective-emission fixed point. Complex zeros
give growth rates (real part) and oscillation frequencies (imaginary
part) of the fluctuation modes; under the forward-Laplace convention
used here the emitted line of a mode sits at ``-Im(nu)``.

For the box mode the linearization generator is piecewise constant, so
the fundamental solution along a transit characteristic is a closed-form
rotation; the Laplace integral truncates exactly at the residence time
and is evaluated by Gauss-Legendre quadrature with two-resolution error
control.
"""

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InconclusiveBoundary, NoRootFound, QuadratureFailure
from .params import ChiAngle
from .steady import Branch, solve_steady_state_groups

# root-search window (in units of the transit time) and grid density
_RE_WINDOW = 5.0
_IM_WINDOW = 4.0 * math.pi
_N_RE = 41
_N_IM = 81
_NEWTON_H = 1e-6
_RESIDUAL_TOL = 1e-9
_NEUTRAL_TOL = 1e-6      # radius of the exact symmetry zero to exclude
_BOUNDARY_TOL = 1e-6     # |Re nu| below which classification is ambiguous


class Phase(enum.Enum):
    NON_SUPERRADIANT = "non_superradiant"
    STEADY_SUPERRADIANT = "steady_superradiant"
    MULTICOMPONENT = "multicomponent"


@dataclass(frozen=True)
class DispersionRoot:
    nu: complex            # in params units (1/time)
    relation: str          # "nonsr" | "sr"
    residual: float
    basin: complex         # grid point the Newton polish started from

    @property
    def emission_frequency(self):
        """Spectral-line position predicted by this mode (-Im nu)."""
        return -self.nu.imag


def _laplace_kernel(z):
    """(1/z)(1 - (1 - e^-z)/z) with a series branch near the removable zero."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 0.0, z)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = (1.0 - (1.0 - np.exp(-zs)) / np.where(small, 1.0, zs)) \
            / np.where(small, 1.0, zs)
    series = np.zeros_like(z)
    fact = 2.0
    term = np.ones_like(z)
    for n in range(8):
        series = series + term / fact
        term = term * (-z)
        fact *= n + 3
    out = np.where(small, series, direct)
    return out if out.ndim else complex(out)


def dispersion_nonsr(nu, params):
    """Scalar dispersion function for the inverted beam, D(nu).

    Zero of D with the largest real part controls the fate of dipole
    fluctuations. Accepts scalar or array nu (units 1/time).
    """
    chi = params.bad_cavity_chi()
    g = params.n_gamma_tau
    z = np.asarray(nu, dtype=complex) * params.tau
    out = 1.0 - 0.5 * g * chi.cos * cmath.exp(-1j * chi.chi) * _laplace_kernel(z)
    return out if out.ndim else complex(out)


def _newton_polish(func, z0, max_iter=80):
    """Complex Newton with central-difference derivative; returns (z, |f|)."""
    z = z0
    for _ in range(max_iter):
        if abs(z) > 1e4:
            break
        f = func(z)
        df = (func(z + _NEWTON_H) - func(z - _NEWTON_H)) / (2.0 * _NEWTON_H)
        if df == 0:
            break
        step = f / df
        z = z - step
        if abs(step) < 1e-13 * max(1.0, abs(z)):
            break
    return z, abs(func(z))


def _grid_starts(values_abs, grid_re, grid_im):
    """Local minima of |D| on the scan grid."""
    starts = []
    n_re, n_im = values_abs.shape
    for i in range(n_re):
        for j in range(n_im):
            v = values_abs[i, j]
            neigh = values_abs[max(0, i - 1):i + 2, max(0, j - 1):j + 2]
            if v <= neigh.min():
                starts.append(complex(grid_re[i], grid_im[j]))
    return starts


def _collect_roots(func, extra_starts=()):
    """Grid scan + Newton polish in transit-time units; deduped roots."""
    grid_re = np.linspace(-_RE_WINDOW, _RE_WINDOW, _N_RE)
    grid_im = np.linspace(-_IM_WINDOW, _IM_WINDOW, _N_IM)
    zz = grid_re[:, None] + 1j * grid_im[None, :]
    vals = np.abs(func(zz))
    roots = []
    for z0 in _grid_starts(vals, grid_re, grid_im) + list(extra_starts):
        z, res = _newton_polish(lambda s: complex(func(s)), z0)
        if res <= _RESIDUAL_TOL and not any(abs(z - r[0]) < 1e-6 for r in roots):
            roots.append((z, res, z0))
    return roots


def find_root_nonsr(params):
    """Root of the inverted-beam dispersion relation with maximal real part."""
    tau = params.tau
    chi = params.bad_cavity_chi()
    g = params.n_gamma_tau

    def func(z):
        return 1.0 - 0.5 * g * chi.cos * np.exp(-1j * chi.chi) * _laplace_kernel(z)

    # large-root asymptote D ~ 1 - (g/2) cos(chi) e^{-i chi}/z as extra seed
    extra = [0.5 * g * chi.cos * cmath.exp(-1j * chi.chi)]
    roots = _collect_roots(func, extra_starts=extra)
    if not roots:
        raise NoRootFound("no dispersion root converged from the scan grid")
    z, res, basin = max(roots, key=lambda r: (r[0].real, r[0].imag))
    return DispersionRoot(nu=z / tau, relation="nonsr", residual=res,
                          basin=basin / tau)


# -- collective-emission (matrix) dispersion relation -------------------

def _trace_angles(state, w, x):
    """Stationary Bloch angles (polar, azimuth) along the transit; see steady."""
    theta = state.xi * (np.asarray(x) + w) / (4.0 * w)
    f = state.f
    chi = state.chi.chi
    if f == 0.0:
        return 2.0 * theta, np.full_like(theta, chi)
    sq = math.sqrt(1.0 + f * f)
    polar = 2.0 * np.arcsin(np.clip(np.sin(theta) / sq, -1.0, 1.0))
    azimuth = chi + np.arctan2(f * np.sin(theta) / sq, np.cos(theta))
    return polar, azimuth


@dataclass(frozen=True)
class SRLinearization:
    """Frozen quadrature cache for the matrix dispersion relation.

    ``rot_rate`` is the in-mode generator magnitude
    a = Gamma_c cos(chi) J0_par_total / 2 (units 1/tau); the generator is
    the antisymmetric matrix of the rotation vector
    (-a sin chi, a cos chi, -omega). The Laplace-transform tables hold
    t-nodes, weights and the real 2x2 inner matrices at two quadrature
    resolutions for error control. All rates are in transit-time units;
    ``tau`` converts to params units at the interface.
    """

    state: object
    tau: float
    w: float
    rot_rate: float
    omega: float
    chi: ChiAngle
    pref: float
    tables: tuple  # ((t, wt, B) coarse, (t, wt, B) fine)

    def generator(self, x):
        """L1(x): antisymmetric drift generator (zero outside the mode)."""
        a = self.rot_rate
        c, s = self.chi.cos, self.chi.sin
        om = self.omega
        x = np.asarray(x, dtype=float)
        inside = (np.abs(x) <= self.w * (1 + 1e-12)) & (x < self.w)
        inside = inside | np.isclose(x, -self.w)
        l1 = np.array([[0.0, om, a * c],
                       [-om, 0.0, a * s],
                       [-a * c, -a * s, 0.0]])
        if x.ndim == 0:
            return l1 if inside else np.zeros((3, 3))
        out = np.zeros(x.shape + (3, 3))
        out[inside] = l1
        return out

    def source(self, x):
        """S0(x): 3x2 coupling of dipole fluctuations back to the drive."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        polar, az = _trace_angles(self.state, self.w, xv)
        c, s = self.chi.cos, self.chi.sin
        sx = np.cos(az) * np.sin(polar)
        sy = np.sin(az) * np.sin(polar)
        sz = np.cos(polar)
        out = np.zeros((len(xv), 3, 2))
        out[:, 0, 0] = c * sz
        out[:, 0, 1] = -s * sz
        out[:, 1, 0] = s * sz
        out[:, 1, 1] = c * sz
        out[:, 2, 0] = -c * sx - s * sy
        out[:, 2, 1] = s * sx - c * sy
        out *= self.pref
        inside = (xv >= -self.w) & (xv < self.w)
        out[~inside] = 0.0
        return out[0] if scalar else out

    def rotation_vector(self):
        a = self.rot_rate
        return np.array([-a * self.chi.sin, a * self.chi.cos, -self.omega])


def fundamental_matrix(lin, x, t):
    """M(x, t): propagator along the characteristic arriving at x after t.

    Time is in units of lin.tau. Inside the mode the generator is a
    constant rotation, so M is the matrix exponential in closed form
    (orthogonal by construction); portions of the path before entry do
    not evolve.
    """
    t_inside = min(t, (x + lin.w) / 2.0 * lin.tau / lin.w)  # v = 2 w / tau
    om = lin.rotation_vector()
    n = np.linalg.norm(om)
    if n == 0.0 or t_inside <= 0.0:
        return np.eye(3)
    ax = om / n
    kmat = np.array([[0.0, -ax[2], ax[1]],
                     [ax[2], 0.0, -ax[0]],
                     [-ax[1], ax[0], 0.0]])
    th = n * t_inside
    return np.eye(3) + math.sin(th) * kmat + (1 - math.cos(th)) * (kmat @ kmat)


def _build_tables(state, w, pref, rot_vec, n_t, n_x):
    """Precompute B(t_k) = rows12(R(t_k)) @ int_{-w}^{w - v t_k} S0 dy."""
    tq, twt = np.polynomial.legendre.leggauss(n_t)
    t = 0.5 * (tq + 1.0)          # transit-time units, [0, 1]
    wt = 0.5 * twt
    v = 2.0 * w                   # per transit time
    yq, ywt = np.polynomial.legendre.leggauss(n_x)

    n = np.linalg.norm(rot_vec)
    if n > 0:
        ax = rot_vec / n
        kmat = np.array([[0.0, -ax[2], ax[1]],
                         [ax[2], 0.0, -ax[0]],
                         [-ax[1], ax[0], 0.0]])
    c, s = math.cos(state.chi.chi), math.sin(state.chi.chi)
    B = np.empty((n_t, 2, 2))
    for k in range(n_t):
        u = w - v * t[k]
        ys = 0.5 * (u + w) * yq + 0.5 * (u - w)
        wys = 0.5 * (u + w) * ywt
        polar, az = _trace_angles(state, w, ys)
        sx = np.cos(az) * np.sin(polar)
        sy = np.sin(az) * np.sin(polar)
        sz = np.cos(polar)
        scum = np.empty((3, 2))
        scum[0, 0] = (wys * (c * sz)).sum()
        scum[0, 1] = (wys * (-s * sz)).sum()
        scum[1, 0] = (wys * (s * sz)).sum()
        scum[1, 1] = (wys * (c * sz)).sum()
        scum[2, 0] = (wys * (-c * sx - s * sy)).sum()
        scum[2, 1] = (wys * (s * sx - c * sy)).sum()
        if n > 0:
            th = n * t[k]
            rot = np.eye(3) + math.sin(th) * kmat \
                + (1 - math.cos(th)) * (kmat @ kmat)
        else:
            rot = np.eye(3)
        B[k] = (rot[:2, :] @ scum) * pref
    return t, wt, B


def build_sr_linearization(state, params):
    """Freeze the linearization about a collective-emission fixed point."""
    if state.branch is not Branch.SUPERRADIANT:
        raise ValueError("linearization requires the collective-emission branch")
    w = params.w
    g = state.n_gamma_tau
    chi = state.chi
    # all rates in transit-time units
    a = 0.5 * g * chi.cos * state.j0_par
    omega = state.omega if params.tau == 1.0 else state.omega * params.tau
    pref = g * chi.cos / (4.0 * w)
    rot_vec = np.array([-a * chi.sin, a * chi.cos, -omega])
    lin = SRLinearization(
        state=state, tau=params.tau, w=w, rot_rate=a, omega=omega, chi=chi,
        pref=pref,
        tables=(_build_tables(state, w, pref, rot_vec, 192, 96),
                _build_tables(state, w, pref, rot_vec, 384, 128)),
    )
    return lin


def _det_matrix(z, table):
    """det D at transit-unit Laplace variable z (scalar or array)."""
    t, wt, B = table
    z = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        e = np.exp(-np.multiply.outer(z, t)) * wt
        m = np.tensordot(e, B, axes=([-1], [0]))  # (..., 2, 2)
        m = np.eye(2) - m
        det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return det


def dispersion_sr(nu, lin, params=None):
    """det of the 2x2 matrix dispersion relation at complex nu (params units).

    Evaluated at two quadrature resolutions; raises QuadratureFailure if
    they disagree beyond 1e-9 absolute. The global-phase symmetry of the
    fixed point makes nu = 0 an exact zero (useful accuracy check).
    """
    z = np.asarray(nu, dtype=complex) * lin.tau
    lo = _det_matrix(z, lin.tables[0])
    hi = _det_matrix(z, lin.tables[1])
    err = np.max(np.abs(lo - hi))
    if err > 1e-9:
        raise QuadratureFailure(f"quadrature disagreement {err:.2e}")
    return hi if hi.ndim else complex(hi)


def find_root_sr(lin, params=None):
    """Max-real-part root of the matrix dispersion relation.

    The exact neutral root at nu = 0 (global phase of the fixed point) is
    excluded; the remaining roots come in conjugate pairs and the member
    with Im >= 0 is reported. Im(nu) predicts sideband offsets of the
    emitted line at omega +/- Im(nu).
    """
    def func(z):
        return _det_matrix(z, lin.tables[1])

    roots = _collect_roots(func)
    roots = [r for r in roots if abs(r[0]) > _NEUTRAL_TOL]
    if not roots:
        raise NoRootFound("no non-neutral dispersion root found in the window")
    z, res, basin = max(roots, key=lambda r: (r[0].real, r[0].imag >= 0))
    if z.imag < 0 and any(abs(np.conj(z) - r[0]) < 1e-6 for r in roots):
        z = np.conj(z)
    # final evaluation through the error-controlled path
    res = abs(dispersion_sr(z / lin.tau, lin))
    return DispersionRoot(nu=complex(z) / lin.tau, relation="sr",
                          residual=res, basin=complex(basin) / lin.tau)


def classify_phase(params):
    """Decision tree over the two dispersion relations.

    Raises InconclusiveBoundary when the governing root satisfies
    |Re(nu)| < 1e-6 / tau (parameter point on a published boundary).
    """
    state = solve_steady_state_groups(params.n_gamma_tau,
                                      params.delta_over_halfkappa)
    if not state.is_superradiant:
        root = find_root_nonsr(params)
        if abs(root.nu.real) * params.tau < _BOUNDARY_TOL:
            raise InconclusiveBoundary(f"Re(nu0) tau = {root.nu.real * params.tau:.2e}")
        return Phase.NON_SUPERRADIANT
    lin = build_sr_linearization(state, params)
    root = find_root_sr(lin, params)
    if abs(root.nu.real) * params.tau < _BOUNDARY_TOL:
        raise InconclusiveBoundary(f"Re(nu1) tau = {root.nu.real * params.tau:.2e}")
    if root.nu.real < 0:
        return Phase.STEADY_SUPERRADIANT
    return Phase.MULTICOMPONENT


def threshold_nonsr_rate(delta_over_halfkappa, tol=1e-9):
    """Collective rate where Re(nu0) crosses zero at fixed detuning.

    Independent of the fixed-point existence boundary in construction;
    the two agree because the instability and the bifurcation coincide.
    """
    from .params import SystemParams

    def re_nu0(g):
        p = SystemParams.from_dimensionless(g, delta_over_halfkappa)
        return find_root_nonsr(p).nu.real

    lo, hi = 3.0, 4.5
    while re_nu0(hi) < 0:
        lo = hi
        hi *= 1.4
        if hi > 1e6:
            raise NoRootFound("no instability below n_gamma_tau = 1e6")
    from scipy.optimize import brentq
    return brentq(re_nu0, lo, hi, xtol=tol)
