"""Core parameter types and the box-mode geometry.

All rates are plain angular frequencies. The internal unit convention is
"transit time = 1": constructors built from the dimensionless control
groups return parameters with ``tau = 1`` so that downstream solvers are
well conditioned; conversion to other units happens only at I/O.
"""

from dataclasses import dataclass, field
import math

import numpy as np


@dataclass(frozen=True)
class ChiAngle:
    """Detuning/retardation angle of the cavity response.

    The bad-cavity value satisfies tan(chi) = delta / (kappa/2); the
    retarded value replaces delta by (delta - omega) to account for the
    finite emission frequency. ``chi`` always lies in (-pi/2, pi/2).
    """

    chi: float

    @classmethod
    def bad_cavity(cls, delta, kappa):
        return cls(math.atan2(delta, 0.5 * kappa))

    @classmethod
    def retarded(cls, delta, omega, kappa):
        return cls(math.atan2(delta - omega, 0.5 * kappa))

    @property
    def cos(self):
        return math.cos(self.chi)

    @property
    def sin(self):
        return math.sin(self.chi)

    @property
    def tan(self):
        return math.tan(self.chi)


@dataclass(frozen=True)
class SystemParams:
    """Physical and numerical parameters of one beam-cavity configuration.

    Consistency: the transit relation tau = 2 w / vx always holds; the
    constructor recomputes vx from (tau, w) when tau is given, otherwise
    tau from (w, vx). The physics of the analytic layer depends only on
    the dimensionless groups (n_gamma_tau, delta_over_halfkappa,
    kappa_tau) exposed as properties.
    """

    delta: float            # cavity-atom detuning (omega_c - omega_a)
    kappa: float            # cavity linewidth
    gamma_c: float          # single-atom emission rate g^2/kappa
    n_atoms: int            # mean intracavity atom number
    tau: float = None       # transit time 2 w / vx
    w: float = 1.0          # half-width of the box mode
    vx: float = None        # beam speed
    rng_seed: int = 0
    dt: float = None        # integration step (default tau/200)

    def __post_init__(self):
        if self.tau is None and self.vx is None:
            object.__setattr__(self, "tau", 1.0)
        if self.tau is not None:
            object.__setattr__(self, "vx", 2.0 * self.w / self.tau)
        else:
            object.__setattr__(self, "tau", 2.0 * self.w / self.vx)
        if self.dt is None:
            object.__setattr__(self, "dt", self.tau / 200.0)
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.gamma_c < 0:
            raise ValueError("gamma_c must be non-negative")
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be at least 1")
        if self.tau <= 0 or self.w <= 0:
            raise ValueError("tau and w must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.dt > self.tau / 100.0:
            raise ValueError("dt must resolve the transit: dt <= tau/100")

    @classmethod
    def from_dimensionless(cls, n_gamma_tau, delta_over_halfkappa=0.0,
                           kappa_tau=1000.0, n_atoms=500, rng_seed=0,
                           dt_over_tau=None, w=1.0):
        """Build parameters in transit-time units from the control groups."""
        tau = 1.0
        kappa = kappa_tau / tau
        return cls(
            delta=delta_over_halfkappa * 0.5 * kappa,
            kappa=kappa,
            gamma_c=n_gamma_tau / (n_atoms * tau),
            n_atoms=n_atoms,
            tau=tau,
            w=w,
            rng_seed=rng_seed,
            dt=None if dt_over_tau is None else dt_over_tau * tau,
        )

    # dimensionless control groups
    @property
    def n_gamma_tau(self):
        return self.n_atoms * self.gamma_c * self.tau

    @property
    def delta_over_halfkappa(self):
        return self.delta / (0.5 * self.kappa)

    @property
    def kappa_tau(self):
        return self.kappa * self.tau

    @property
    def g_coupling(self):
        """Vacuum Rabi frequency, from gamma_c = g^2/kappa."""
        return math.sqrt(self.gamma_c * self.kappa)

    def bad_cavity_chi(self):
        return ChiAngle.bad_cavity(self.delta, self.kappa)

    def spawn_trajectory_streams(self, n_runs):
        """Per-trajectory RNG streams from the master seed.

        Uses counter-based seed splitting so each trajectory is
        reproducible independently of execution order. Each trajectory
        gets three child streams: entry spins (consumed in atom-entry
        order), stepping noise, and arrival counts (Poisson mode only).
        """
        master = np.random.SeedSequence(self.rng_seed)
        return [seq.spawn(3) for seq in master.spawn(n_runs)]


def mode_function(x, params):
    """Box mode profile: 1 on the half-open interval [-w, w), else 0.

    Atoms at the exact exit edge count as outside so that entry/exit
    bookkeeping never double counts.
    """
    x = np.asarray(x)
    out = ((x >= -params.w) & (x < params.w)).astype(float)
    return out if out.ndim else float(out)


def gamma_of_x(x, chi, params):
    """Position-dependent collective decay rate gamma_c * eta(x) * cos(chi)."""
    return params.gamma_c * mode_function(x, params) * chi.cos


def homogeneous_density(params):
    """Linear atom density n_atoms/(2 w) once the mode is filled (t >> tau)."""
    return params.n_atoms / (2.0 * params.w)
