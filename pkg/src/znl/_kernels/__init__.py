"""Kernel backend selection: compiled core if available, numpy fallback otherwise.

Set ZNL_PURE_PY=1 to force the fallback (used by the benchmark suite).
"""
import os

import numpy as np

from . import _ref

if os.environ.get("ZNL_PURE_PY") == "1":
    _impl = _ref
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND


def holder_sup(values: np.ndarray, times: np.ndarray, alpha: float) -> float:
    values = np.ascontiguousarray(values, dtype=np.float64)
    times = np.ascontiguousarray(times, dtype=np.float64)
    return float(_impl.holder_sup(values, times, float(alpha)))


def phase_apply(u: np.ndarray, pot: np.ndarray, dt: float) -> None:
    """In place u *= exp(-1j*dt*pot); u complex128 C-contiguous, pot real."""
    flat_u = u.reshape(-1)
    flat_p = np.ascontiguousarray(pot, dtype=np.float64).reshape(-1)
    _impl.phase_apply(flat_u, flat_p, float(dt))


def abs2(u: np.ndarray) -> np.ndarray:
    return np.asarray(_impl.abs2(u.reshape(-1))).reshape(u.shape)


def gbm_path(dw_sum: np.ndarray, c_norm_sq: float, dt_steps: np.ndarray) -> np.ndarray:
    dw_sum = np.ascontiguousarray(dw_sum, dtype=np.float64)
    dt_steps = np.ascontiguousarray(dt_steps, dtype=np.float64)
    return np.asarray(_impl.gbm_path(dw_sum, float(c_norm_sq), dt_steps))
