"""Discrete space-time norms adapted to the Schroedinger and half-wave flows.

A trajectory sampled on a uniform time grid over a torus is treated as a
function on a space-time block. Frequency localization uses the same smooth
dyadic windows as the spatial Littlewood-Paley decomposition, applied to:
  spatial frequency |xi|           (P_lambda)
  temporal frequency |tau|         (P^(t)_lambda)
  Schroedinger modulation |tau + |xi|^2|   (C_lambda)
applied via FFT in time and space. A smooth taper in time controls spectral
leakage from the non-periodic time interval.

Conventions: a plane wave e^{i(tau t + xi.x)} has temporal frequency tau, so
the free Schroedinger wave e^{i(-|xi|^2 t + xi.x)} has zero modulation and the
free half-wave e^{i(|xi| t + xi.x)} has zero wave modulation |tau - |xi||.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lp_besov import eta0, eta_lambda, eta_le, smooth_step
from .spectral import TorusGrid


@dataclass(frozen=True)
class SpaceTimeBlock:
    """Samples u[j, ...] at times t0 + j*dt over a fixed torus grid."""

    grid: TorusGrid
    dt: float
    samples: np.ndarray  # shape (nt, n, ..., n)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape[1:] != self.grid.shape:
            raise ValueError("sample spatial shape does not match the grid")
        if arr.shape[0] < 4:
            raise ValueError("need at least 4 time samples")
        object.__setattr__(self, "samples", arr)

    @property
    def nt(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return self.dt * (self.nt - 1)

    @cached_property
    def tau(self) -> np.ndarray:
        """Temporal frequencies, broadcastable against the space axes."""
        t = 2.0 * np.pi * np.fft.fftfreq(self.nt, d=self.dt)
        return t.reshape((self.nt,) + (1,) * self.grid.d)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        return self.grid.k2[np.newaxis]

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return self.grid.kabs[np.newaxis]


def taper_window(nt: int, margin: float = 0.1) -> np.ndarray:
    """Smooth window equal to 1 on the middle (1 - 2*margin) fraction, rolling
    off to 0 at the ends with the same C^infty step as the dyadic cutoffs."""
    if not 0 < margin < 0.5:
        raise ValueError("margin must lie in (0, 1/2)")
    x = np.linspace(0.0, 1.0, nt)
    rise = smooth_step(x / margin)
    fall = smooth_step((1.0 - x) / margin)
    return rise * fall


def tapered(block: SpaceTimeBlock, margin: float = 0.1) -> SpaceTimeBlock:
    w = taper_window(block.nt, margin).reshape((block.nt,) + (1,) * block.grid.d)
    return SpaceTimeBlock(block.grid, block.dt, block.samples * w)


def _fft_all(samples: np.ndarray) -> np.ndarray:
    return np.fft.fftn(samples)


def _ifft_all(coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(coeffs)


def spatial_project(block: SpaceTimeBlock, lam: float) -> np.ndarray:
    """P_lambda in space (low block for lam <= 1), identity in time."""
    sym = eta_le(block.grid.kabs, 1.0) if lam <= 1 else eta_lambda(block.grid.kabs, lam)
    hat = np.fft.fftn(block.samples, axes=tuple(range(1, block.grid.d + 1)))
    return np.fft.ifftn(sym[np.newaxis] * hat, axes=tuple(range(1, block.grid.d + 1)))


def temporal_project(block: SpaceTimeBlock, lam: float, low: bool = False) -> np.ndarray:
    """P^(t)_lambda or P^(t)_{<=lambda} acting on |partial_t|."""
    a = np.abs(block.tau)
    sym = eta0(a / lam) if low else eta_lambda(a, lam)
    hat = np.fft.fft(block.samples, axis=0)
    return np.fft.ifft(sym * hat, axis=0)


def modulation_project(
    block: SpaceTimeBlock, lam: float, kind: str = "schrodinger", low: bool = False, high: bool = False
) -> np.ndarray:
    """C_lambda: dyadic localization of the flow modulation.

    kind='schrodinger' uses |tau + |xi|^2|, kind='wave' uses |tau - |xi||.
    low selects the <=lambda block, high the >=lambda complement.
    """
    if block.nt < 16:
        raise ValueError("window too short: need at least 16 temporal samples")
    if kind == "schrodinger":
        mod = np.abs(block.tau + block.xi_sq)
    elif kind == "wave":
        mod = np.abs(block.tau - block.xi_abs)
    else:
        raise ValueError(f"unknown modulation kind {kind!r}")
    if low and high:
        raise ValueError("choose at most one of low, high")
    if low:
        sym = eta0(mod / lam)
    elif high:
        sym = 1.0 - eta0(mod / lam)
    else:
        sym = eta_lambda(mod, lam)
    return _ifft_all(sym * _fft_all(block.samples))


def _dyadic_scales(block: SpaceTimeBlock) -> list[float]:
    lam = 1.0
    top = block.grid.nyquist
    out = [1.0]
    while 2 * lam <= top:
        lam *= 2.0
        out.append(lam)
    return out


def _linf_l2(samples: np.ndarray, grid: TorusGrid) -> float:
    sq = np.abs(samples) ** 2
    per_t = sq.reshape(sq.shape[0], -1).sum(axis=1) * grid.dV
    return float(np.sqrt(per_t.max()))


def _l2_l2(samples: np.ndarray, grid: TorusGrid, dt: float) -> float:
    sq = np.abs(samples) ** 2
    return float(np.sqrt(sq.sum() * grid.dV * dt))


def _l2_lp(samples: np.ndarray, grid: TorusGrid, dt: float, p: float) -> float:
    ab = np.abs(samples)
    per_t = (ab**p).reshape(ab.shape[0], -1).sum(axis=1) * grid.dV
    per_t = per_t ** (2.0 / p)
    return float(np.sqrt(per_t.sum() * dt))


def _apply_symbol(block: SpaceTimeBlock, sym: np.ndarray) -> np.ndarray:
    return _ifft_all(sym * _fft_all(block.samples))


def schrodinger_operator(block: SpaceTimeBlock) -> SpaceTimeBlock:
    """(i d/dt + Laplacian) u computed spectrally; symbol -(tau + |xi|^2)."""
    sym = -(block.tau + block.xi_sq)
    return SpaceTimeBlock(block.grid, block.dt, _apply_symbol(block, sym))


def wave_operator(block: SpaceTimeBlock) -> SpaceTimeBlock:
    """(i d/dt + |grad|) v; symbol -(tau - |xi|)."""
    sym = -(block.tau - block.xi_abs)
    return SpaceTimeBlock(block.grid, block.dt, _apply_symbol(block, sym))


def _dual_lebesgue(d: int) -> float:
    # 2d/(d-2); at d <= 2 fall back to a large finite exponent
    return 2.0 * d / (d - 2) if d >= 3 else 6.0


def s_norm_dyadic(
    block: SpaceTimeBlock, lam: float, s: float, a: float, b: float, variant: str = "plain"
) -> float:
    """One dyadic piece of the Schroedinger-adapted norm.

    Three components: an energy piece lam^s L^inf L^2, a smoothed local
    Strichartz piece lam^(s-2a) (lam + |dt|)^a in L^2 L^{2d/(d-2)}, and a
    modulation-weighted piece of (i d/dt + Laplacian)u at weight
    lam^(s-1+b) ((lam + |dt|)/(lam^2 + |dt|))^a in L^2.
    variant='split' separates the high-modulation part (>= lam^2 / 8) of the
    third component, measuring it without the modulation weight.
    """
    grid = block.grid
    dt = block.dt
    proj = SpaceTimeBlock(grid, dt, spatial_project(block, lam))
    out = lam**s * _linf_l2(proj.samples, grid)

    adt = np.abs(proj.tau)
    w_a = (lam + adt) ** a
    smoothed = _apply_symbol(proj, w_a + np.zeros_like(proj.xi_sq))
    out += lam ** (s - 2 * a) * _l2_lp(smoothed, grid, dt, _dual_lebesgue(grid.d))

    op = schrodinger_operator(proj)
    weight = ((lam + adt) / (lam**2 + adt)) ** a + np.zeros_like(proj.xi_sq)
    if variant == "plain":
        out += lam ** (s - 1 + b) * _l2_l2(_apply_symbol(op, weight), grid, dt)
    elif variant == "split":
        cutoff = lam**2 / 8.0
        mod = np.abs(op.tau + op.xi_sq)
        hi_sym = 1.0 - eta0(mod / cutoff)
        hi = _ifft_all(hi_sym * _fft_all(op.samples))
        lo = op.samples - hi
        out += lam ** (s - 1 + b) * _l2_l2(hi, grid, dt)
        lo_block = SpaceTimeBlock(grid, dt, lo)
        out += lam ** (s - 1) * _l2_l2(_apply_symbol(lo_block, weight), grid, dt)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return out


def w_norm_dyadic(block: SpaceTimeBlock, lam: float, l: float, alpha: float, beta: float) -> float:
    """One dyadic piece of the wave-adapted norm: an energy piece lam^l
    L^inf L^2, a temporally smoothed piece lam^(l-alpha) (lam + |dt|)^alpha
    restricted to temporal frequencies <= (lam/2^8)^2, and the flow-operator
    piece lam^(beta-1) (i d/dt + |grad|)v in L^2."""
    grid = block.grid
    dt = block.dt
    proj = SpaceTimeBlock(grid, dt, spatial_project(block, lam))
    out = lam**l * _linf_l2(proj.samples, grid)

    adt = np.abs(proj.tau)
    low_sym = eta0(adt / (lam / 2**8) ** 2)
    w_sym = (lam + adt) ** alpha * low_sym + np.zeros_like(proj.xi_sq)
    out += lam ** (l - alpha) * _linf_l2(_apply_symbol(proj, w_sym), grid)

    op = wave_operator(proj)
    out += lam ** (beta - 1) * _l2_l2(op.samples, grid, dt)
    return out


@dataclass(frozen=True)
class NormReport:
    """Per-dyadic-scale contributions and their ell^2 total."""

    kind: str
    params: tuple[float, ...]
    per_scale: tuple[tuple[float, float], ...]  # (lambda, value)
    total: float

    def __float__(self) -> float:
        return self.total


def s_norm(
    block: SpaceTimeBlock,
    s: float,
    a: float,
    b: float,
    variant: str = "plain",
    taper_margin: float = 0.1,
) -> NormReport:
    """Schroedinger-adapted norm: ell^2 sum over dyadic spatial scales."""
    if block.nt < 16:
        raise ValueError("window too short: need at least 16 temporal samples")
    blk = tapered(block, taper_margin) if taper_margin > 0 else block
    scales = _dyadic_scales(blk)
    pieces = [s_norm_dyadic(blk, lam, s, a, b, variant) for lam in scales]
    total = float(np.sqrt(np.sum(np.square(pieces))))
    return NormReport("schrodinger", (s, a, b), tuple(zip(scales, pieces)), total)


def w_norm(
    block: SpaceTimeBlock,
    l: float,
    alpha: float,
    beta: float,
    taper_margin: float = 0.1,
) -> NormReport:
    """Wave-adapted norm: ell^2 sum over dyadic spatial scales."""
    if block.nt < 16:
        raise ValueError("window too short: need at least 16 temporal samples")
    blk = tapered(block, taper_margin) if taper_margin > 0 else block
    scales = _dyadic_scales(blk)
    pieces = [w_norm_dyadic(blk, lam, l, alpha, beta) for lam in scales]
    total = float(np.sqrt(np.sum(np.square(pieces))))
    return NormReport("wave", (l, alpha, beta), tuple(zip(scales, pieces)), total)
