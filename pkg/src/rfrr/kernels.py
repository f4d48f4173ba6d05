"""Backend selection for the spectral kernels.

The compiled extension is preferred; the numpy fallback is used when it
is not built or when ``RFRR_PURE_PYTHON`` is set to a truthy value.
"""
import os

from . import _kernels_py

if os.environ.get("RFRR_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

CONVERGED = _kernels_py.CONVERGED
STALLED = _kernels_py.STALLED
MAX_ITER = _kernels_py.MAX_ITER

nu1_from_nu2 = _impl.nu1_from_nu2
trace_power = _impl.trace_power
resolvent_sums = _impl.resolvent_sums
iterate_fixed_point = _impl.iterate_fixed_point
t_sum = _impl.t_sum

__all__ = [
    "BACKEND",
    "CONVERGED",
    "STALLED",
    "MAX_ITER",
    "nu1_from_nu2",
    "trace_power",
    "resolvent_sums",
    "iterate_fixed_point",
    "t_sum",
]
