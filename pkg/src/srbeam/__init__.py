"""Superradiant emission of an atomic beam crossing an off-resonant cavity.

Layers:

* ``params``      -- parameter types and the box-mode geometry
* ``dynamics``    -- stochastic ensemble integrator (full / adiabatic)
* ``steady``      -- analytic stationary states and cavity pulling
* ``stability``   -- dispersion-relation roots and phase classification
* ``observables`` -- output power, g2(0), emission spectrum
* ``cli``         -- command-line front end and sweep orchestration

The hot stepping kernels are compiled (Cython) with a pure-numpy
fallback selected at import; see ``srbeam.engine.BACKEND``.
"""

__version__ = "0.1.0"

from .engine import BACKEND
from .params import ChiAngle, SystemParams, gamma_of_x, homogeneous_density, mode_function
from .dynamics import Ensemble, TrajectoryRecord, inject_and_retire, simulate, step_adiabatic, step_full
from .steady import (Branch, BlochTrace, SteadyState, bloch_trace,
                     pulling_coefficient, solve_f, solve_steady_state,
                     solve_steady_state_groups, solve_xi,
                     threshold_collective_rate)
from .stability import (DispersionRoot, Phase, SRLinearization,
                        build_sr_linearization, classify_phase,
                        dispersion_nonsr, dispersion_sr, find_root_nonsr,
                        find_root_sr, fundamental_matrix, threshold_nonsr_rate)
from .observables import SpectrumResult, g2_zero, output_power, peak_find, spectrum

__all__ = [
    "__version__", "BACKEND",
    "ChiAngle", "SystemParams", "gamma_of_x", "homogeneous_density",
    "mode_function",
    "Ensemble", "TrajectoryRecord", "inject_and_retire", "simulate",
    "step_adiabatic", "step_full",
    "Branch", "BlochTrace", "SteadyState", "bloch_trace",
    "pulling_coefficient", "solve_f", "solve_steady_state",
    "solve_steady_state_groups", "solve_xi", "threshold_collective_rate",
    "DispersionRoot", "Phase", "SRLinearization", "build_sr_linearization",
    "classify_phase", "dispersion_nonsr", "dispersion_sr",
    "find_root_nonsr", "find_root_sr", "fundamental_matrix",
    "threshold_nonsr_rate",
    "SpectrumResult", "g2_zero", "output_power", "peak_find", "spectrum",
]
