"""Stepping-kernel backend selection.

The compiled Cython kernels are used when available; setting the
environment variable ``SRBEAM_PURE_PYTHON=1`` (or a failed extension
build) selects the pure-numpy fallback. Both backends implement the
same chunk semantics; see ``benchmarks/bench_kernels.py`` for a
throughput comparison.
"""

import os

from . import pykernels

if os.environ.get("SRBEAM_PURE_PYTHON", "").strip() in ("1", "true", "yes"):
    _impl = pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = pykernels
        BACKEND = "python"

adiabatic_chunk = _impl.adiabatic_chunk
full_chunk = _impl.full_chunk
dipole_sums = _impl.dipole_sums

__all__ = ["adiabatic_chunk", "full_chunk", "dipole_sums", "BACKEND",
           "pykernels"]
