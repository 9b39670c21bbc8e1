"""Pure-numpy reference implementations of the hot kernels.

Used when the compiled extension is unavailable (or when ZNL_PURE_PY=1).
Semantics must match ``_core.pyx`` exactly; the benchmark suite compares both.
"""
import numpy as np

BACKEND = "numpy"

_CHUNK = 256  # rows per broadcast block in holder_sup, caps peak memory


def holder_sup(values: np.ndarray, times: np.ndarray, alpha: float) -> float:
    """sup over all pairs of |g(t)-g(s)| / |t-s|^alpha, exact O(n^2)."""
    n = values.shape[0]
    best = 0.0
    for i0 in range(0, n - 1, _CHUNK):
        i1 = min(i0 + _CHUNK, n - 1)
        block = values[i0:i1, None]
        tblock = times[i0:i1, None]
        # only j > i pairs; ragged tail handled by masking zero gaps
        dv = np.abs(values[None, :] - block)
        dt = np.abs(times[None, :] - tblock)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = dv / dt**alpha
        q[dt == 0.0] = 0.0
        m = float(q.max())
        if m > best:
            best = m
    return best


def phase_apply(u: np.ndarray, pot: np.ndarray, dt: float) -> None:
    """In place u *= exp(-1j * dt * pot) for real pot."""
    u *= np.exp(-1j * dt * pot)


def abs2(u: np.ndarray) -> np.ndarray:
    return (u.real * u.real + u.imag * u.imag).astype(np.float64)


def gbm_path(dw_sum: np.ndarray, c_norm_sq: float, dt_steps: np.ndarray) -> np.ndarray:
    """Multiplicative GBM update h_{n+1} = h_n * exp(-2 dW_n - 2|c|^2 dt_n).

    ``dw_sum[n]`` is sum_k c_k (beta_k(t_{n+1}) - beta_k(t_n)). Returns the
    h values on the full grid (length len(dw_sum)+1, h[0]=1), exactly positive.
    """
    n = dw_sum.shape[0]
    out = np.empty(n + 1)
    out[0] = 1.0
    factors = np.exp(-2.0 * dw_sum - 2.0 * c_norm_sq * dt_steps)
    np.cumprod(factors, out=out[1:])
    return out
